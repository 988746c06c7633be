// Copyright 2026 The IncRec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef INCREC_COMMON_H_
#define INCREC_COMMON_H_

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace increc {

// Dense ids assigned at ingestion time. Raw ids from the log live in the
// vocabularies of EventLog.
using UserId = int32_t;
using ItemId = int32_t;
using Timestamp = int64_t;  // milliseconds since epoch

constexpr ItemId kNoItem = -1;
constexpr Timestamp kHourMs = 3600LL * 1000;
constexpr Timestamp kDayMs = 24 * kHourMs;

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Base class for all recoverable failures raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or missing user input (bad log line, missing file, bad config).
class InputError : public Error {
 public:
  using Error::Error;
};

// A checked internal invariant did not hold.
class InvariantError : public Error {
 public:
  using Error::Error;
};

struct ScoredItem {
  ItemId item = kNoItem;
  double score = 0.0;

  friend bool operator==(const ScoredItem&, const ScoredItem&) = default;
};

// Descending score, ascending id on ties.
inline bool ScoreOrder(const ScoredItem& a, const ScoredItem& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.item < b.item;
}

}  // namespace increc

#endif  // INCREC_COMMON_H_
