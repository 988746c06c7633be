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

// Self-contained binary bundle of everything downstream stages need:
// vocabularies, item features, request contexts with their split, target
// partitions and training examples.

#ifndef INCREC_SAMPLE_BUNDLE_H_
#define INCREC_SAMPLE_BUNDLE_H_

#include <filesystem>
#include <vector>

#include "increc/event_log.h"
#include "increc/losses.h"
#include "increc/sample_builder.h"

namespace increc {

struct SampleBundle {
  std::vector<int64_t> raw_users;  // dense user id -> raw id
  std::vector<int64_t> raw_items;  // dense item id -> raw id
  ItemCatalog catalog;
  std::vector<int32_t> profile_vocab;  // per slot, includes the unknown id
  std::vector<RequestContext> requests;
  std::vector<uint8_t> is_test;  // per request
  std::vector<SamplePartition> partitions;  // one per request
  std::vector<TrainingExample> examples;    // training requests only

  int32_t num_items() const { return static_cast<int32_t>(raw_items.size()); }
  TrainingView view() const { return {requests, partitions, &catalog}; }
  // Indices of test requests, in request order.
  std::vector<size_t> TestRequests() const;
};

// Marks each user's last request as the test request.
std::vector<uint8_t> LastRequestSplit(std::span<const RequestContext> requests);

void WriteSampleBundle(const SampleBundle& bundle, const std::filesystem::path& path);
SampleBundle ReadSampleBundle(const std::filesystem::path& path);

}  // namespace increc

#endif  // INCREC_SAMPLE_BUNDLE_H_
