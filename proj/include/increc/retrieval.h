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

// Top-K retrieval over item tower outputs by raw inner product: exact
// partial selection, or a hierarchical small-world graph for approximate
// search.

#ifndef INCREC_RETRIEVAL_H_
#define INCREC_RETRIEVAL_H_

#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <vector>

#include "increc/common.h"
#include "increc/event_log.h"
#include "increc/model.h"

namespace increc {

struct ItemIndex {
  Matrix vectors;            // one row per entry of `ids`
  std::vector<ItemId> ids;   // dense item ids, row order

  int32_t size() const { return static_cast<int32_t>(ids.size()); }
};

// One row per catalog item, computed with ItemForward.
ItemIndex BuildItemIndex(const ModelParams& params, const ItemCatalog& catalog);
ItemIndex MakeItemIndex(Matrix vectors);  // ids 0..rows-1

struct HnswOptions {
  int max_neighbors = 16;   // per node on upper layers; doubled on layer 0
  int ef_construction = 200;
  int ef_search = 400;
  uint64_t seed = 7;
};

// Inner-product search is reduced to a nearest-neighbor problem: every row x
// is stored as [x, sqrt(M^2 - |x|^2)] with M the largest row norm, and
// queries get a trailing 0. All stored points then share one norm, so the
// inner product orders them like Euclidean distance while query scores stay
// equal to the original inner products.
class HnswIndex {
 public:
  HnswIndex(const ItemIndex& index, const HnswOptions& options = {});

  // Best `k` rows by inner product among those reached by the search,
  // ordered like ScoreOrder. Scores are exact.
  std::vector<ScoredItem> Search(const Vector& user, int k) const;

 private:
  using Adjacency = std::vector<std::vector<int32_t>>;  // per node

  double Score(const Vector& query, int32_t node) const;  // query in augmented space
  std::vector<ScoredItem> SearchLayer(const Vector& query,
                                      const std::vector<int32_t>& entries,
                                      int ef, int layer) const;
  void Insert(int32_t node, int level);
  // Keeps a candidate only if it is closer to the base point than to every
  // neighbor kept so far; fills up with the best remaining ones.
  std::vector<int32_t> Select(const std::vector<ScoredItem>& candidates, int m) const;

  const ItemIndex& index_;
  Matrix points_;  // augmented rows
  HnswOptions options_;
  std::vector<Adjacency> layers_;  // layers_[l][node]
  std::vector<int> node_level_;
  int32_t entry_ = -1;
  int top_level_ = -1;
};

enum class SearchMode : uint8_t { kExact, kApprox };

struct RetrievalResult {
  std::vector<ScoredItem> items;  // non-increasing score, ties by ascending id
  Tower tower = Tower::kIncremental;
  bool approximate = false;
};

// Errors when k > index size or k <= 0, or when approximate mode has no graph.
RetrievalResult TopK(const Vector& user, const ItemIndex& index, int k,
                     SearchMode mode = SearchMode::kExact,
                     const HnswIndex* graph = nullptr);

double RecallAtK(std::span<const ScoredItem> approx, std::span<const ScoredItem> exact);

// `user_id \t rank \t item_id \t score` with raw ids and 1-based ranks.
void WriteRetrievalDump(std::ostream& out, std::span<const int64_t> raw_users,
                        std::span<const RetrievalResult> results,
                        const IdVocab& items);

// Raw user id -> raw item ids in rank order.
std::map<int64_t, std::vector<int64_t>> ReadRetrievalDump(std::istream& in);

}  // namespace increc

#endif  // INCREC_RETRIEVAL_H_
