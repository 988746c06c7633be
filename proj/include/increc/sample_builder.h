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

// Baseline retrieval simulation (item-to-item + popularity), RTG/ITG
// partitioning of request targets, and training example assembly.

#ifndef INCREC_SAMPLE_BUILDER_H_
#define INCREC_SAMPLE_BUILDER_H_

#include <map>
#include <ostream>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "increc/common.h"
#include "increc/event_log.h"

namespace increc {

struct I2IOptions {
  Timestamp window = kHourMs;
  int top_m = 20;
};

// Item-to-item co-occurrence index. Each trigger keeps its top-M co-items
// sorted by descending count, ties by ascending id.
class I2IIndex {
 public:
  I2IIndex() = default;
  explicit I2IIndex(std::vector<std::vector<ScoredItem>> lists)
      : lists_(std::move(lists)) {}

  std::span<const ScoredItem> Neighbors(ItemId trigger) const;
  size_t num_items() const { return lists_.size(); }
  bool empty() const;

 private:
  std::vector<std::vector<ScoredItem>> lists_;
};

// Unordered pair counts over each user's Click/Order stream: two events
// co-occur when their timestamps differ by at most `window`. Keys are
// (min id, max id). Exposed for the symmetry property test.
std::map<std::pair<ItemId, ItemId>, int64_t> CountCooccurrence(
    const EventLog& log, Timestamp window);

I2IIndex BuildI2IIndex(const EventLog& log, const I2IOptions& options);

// All item ids by descending popularity, ascending id on ties.
std::vector<ItemId> PopularityRanking(const EventLog& log);

// Simulated R^u: i2i candidates triggered by the distinct behavior items
// (scores summed across triggers) take precedence, then global popularity
// fills up to k_base. Returned sorted by id.
std::vector<ItemId> RetrieveBaseline(const I2IIndex& index,
                                     std::span<const ItemId> popularity,
                                     const RequestContext& ctx, int k_base);

struct SamplePartition {
  size_t request = 0;
  std::vector<ItemId> retrieved;  // R^u, sorted
  std::vector<ItemId> rtg;        // targets already in R^u
  std::vector<ItemId> itg;        // targets missing from R^u
};

SamplePartition PartitionTargets(const RequestContext& ctx,
                                 std::span<const ItemId> retrieved,
                                 size_t request_index = 0);

// n distinct ids drawn uniformly from [0, pool_size) minus `exclude`.
std::vector<ItemId> SampleNegatives(int pool_size, int n,
                                    std::span<const ItemId> exclude,
                                    std::mt19937_64& rng);

enum class SampleGroup : uint8_t { kRTG, kITG, kETG };

std::string_view SampleGroupName(SampleGroup group);

struct TrainingExample {
  uint32_t request = 0;
  ItemId positive = kNoItem;
  SampleGroup group = SampleGroup::kRTG;
  std::vector<ItemId> negatives;
};

struct SampleOptions {
  int n_neg = 64;
  int k_base = 500;
};

struct SampleSet {
  std::vector<SamplePartition> partitions;  // one per request
  std::vector<TrainingExample> examples;
};

// Partitions every request and emits one example per RTG/ITG target and per
// exposed item. Negatives exclude the request's targets and exposures.
// Requests with `train_mask[r] == false` get a partition but no examples;
// an empty mask means all requests are used for training.
SampleSet BuildTrainingSet(std::span<const RequestContext> contexts,
                           const I2IIndex& index,
                           std::span<const ItemId> popularity, int num_items,
                           const SampleOptions& options, std::mt19937_64& rng,
                           const std::vector<bool>& train_mask = {});

// `user_id \t request_time \t group \t item_id` audit records with raw ids.
void WritePartitions(std::ostream& out, const EventLog& log,
                     std::span<const RequestContext> contexts,
                     std::span<const SamplePartition> partitions);

}  // namespace increc

#endif  // INCREC_SAMPLE_BUILDER_H_
