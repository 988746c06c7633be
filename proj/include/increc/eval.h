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

// Incremental hitrate, the Base@K / Sup@K / Inc@K protocol and exposure
// hitrate over per-user ranked lists.

#ifndef INCREC_EVAL_H_
#define INCREC_EVAL_H_

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "increc/common.h"

namespace increc {

using ItemList = std::vector<ItemId>;

enum class Aggregation : uint8_t {
  kMean,  // mean over qualifying users
  kSum,   // plain sum of per-user ratios
};

std::string_view AggregationName(Aggregation aggregation);
std::optional<Aggregation> ParseAggregation(std::string_view name);

struct Rate {
  double value = 0.0;
  size_t n_users = 0;  // users that entered the aggregate
};

// |top-K(list) ∩ itg| / |itg| per user, over users with non-empty `itg`.
// `lists[u]` and `itg[u]` belong to the same user. Errors when K <= 0.
Rate HitrateInc(std::span<const ItemList> lists, std::span<const ItemList> itg, int k,
                Aggregation aggregation = Aggregation::kMean);

// First K items of `enhanced` that are not in base[0, K). Errors when the
// base list is shorter than K or fewer than K items survive.
ItemList DedupIncremental(std::span<const ItemId> base, std::span<const ItemId> enhanced,
                          int k);

struct BaseSupInc {
  Rate base;  // base ranks [0, K)
  Rate sup;   // base ranks [K, 2K)
  Rate inc;   // enhanced list after removing base[0, K), first K survivors
};

// Errors when any base list is shorter than 2K or an enhanced list cannot
// provide K survivors.
BaseSupInc ComputeBaseSupInc(std::span<const ItemList> base, std::span<const ItemList> enhanced,
                             std::span<const ItemList> itg, int k,
                             Aggregation aggregation = Aggregation::kMean);

// Mean of |list ∩ exposed| / |exposed| over users with non-empty `exposed`.
// Lists are used whole; pass the deduplicated incremental list.
Rate ExposureHitrate(std::span<const ItemList> lists, std::span<const ItemList> exposed);

struct ReportRow {
  std::string metric;  // base_at_k, sup_at_k, inc_at_k, exposure_inc_at_k
  int k = 0;
  double value = 0.0;
  size_t n_users = 0;
};

struct EvalReport {
  Aggregation aggregation = Aggregation::kMean;
  size_t n_users = 0;  // users with an evaluation request
  std::vector<ReportRow> rows;

  // The row for (metric, k), or nullptr.
  const ReportRow* Find(std::string_view metric, int k) const;
};

struct EvalUser {
  ItemList base;      // base model ranking, at least 2K long
  ItemList enhanced;  // ranking of the model under test
  ItemList itg;
  ItemList exposed;
};

EvalReport Evaluate(std::span<const EvalUser> users, std::span<const int> ks,
                    Aggregation aggregation = Aggregation::kMean);

// `metric \t K \t value \t n_users` lines.
void WriteReportRecords(std::ostream& out, const EvalReport& report);
// Aligned table, one line per K.
void WriteReportTable(std::ostream& out, const EvalReport& report);

}  // namespace increc

#endif  // INCREC_EVAL_H_
