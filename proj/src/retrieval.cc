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

#include "increc/retrieval.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <queue>
#include <random>
#include <string>
#include <unordered_set>

namespace increc {
namespace {

struct WorseFirst {
  bool operator()(const ScoredItem& a, const ScoredItem& b) const { return ScoreOrder(a, b); }
};
struct BetterFirst {
  bool operator()(const ScoredItem& a, const ScoredItem& b) const { return ScoreOrder(b, a); }
};

}  // namespace

ItemIndex BuildItemIndex(const ModelParams& params, const ItemCatalog& catalog) {
  ItemIndex index;
  index.vectors.resize(catalog.size(), params.config.dim);
  index.ids.resize(catalog.size());
  for (ItemId i = 0; i < catalog.size(); ++i) {
    index.ids[i] = i;
    index.vectors.row(i) = ItemForward(params, catalog, i).transpose();
  }
  return index;
}

ItemIndex MakeItemIndex(Matrix vectors) {
  ItemIndex index;
  index.ids.resize(vectors.rows());
  for (Eigen::Index i = 0; i < vectors.rows(); ++i) index.ids[i] = static_cast<ItemId>(i);
  index.vectors = std::move(vectors);
  return index;
}

HnswIndex::HnswIndex(const ItemIndex& index, const HnswOptions& options)
    : index_(index), options_(options) {
  if (options.max_neighbors < 2) throw InputError("graph needs at least 2 neighbors per node");
  const int32_t n = index.size();
  const Eigen::Index d = index.vectors.cols();
  points_.resize(n, d + 1);
  double max_sq = 0.0;
  for (int32_t r = 0; r < n; ++r) max_sq = std::max(max_sq, index.vectors.row(r).squaredNorm());
  for (int32_t r = 0; r < n; ++r) {
    points_.row(r).head(d) = index.vectors.row(r);
    points_(r, d) = std::sqrt(std::max(0.0, max_sq - index.vectors.row(r).squaredNorm()));
  }
  node_level_.assign(n, 0);
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double level_scale = 1.0 / std::log(static_cast<double>(options.max_neighbors));
  for (int32_t node = 0; node < n; ++node) {
    const double u = std::max(unit(rng), 1e-12);
    const int level = static_cast<int>(std::floor(-std::log(u) * level_scale));
    node_level_[node] = level;
    while (static_cast<int>(layers_.size()) <= level) layers_.emplace_back(n);
    Insert(node, level);
  }
}

double HnswIndex::Score(const Vector& query, int32_t node) const {
  return points_.row(node).dot(query.transpose());
}

std::vector<ScoredItem> HnswIndex::SearchLayer(const Vector& query,
                                               const std::vector<int32_t>& entries, int ef,
                                               int layer) const {
  std::unordered_set<int32_t> visited;
  std::priority_queue<ScoredItem, std::vector<ScoredItem>, BetterFirst> frontier;
  std::priority_queue<ScoredItem, std::vector<ScoredItem>, WorseFirst> best;
  for (int32_t e : entries) {
    if (!visited.insert(e).second) continue;
    ScoredItem s{e, Score(query, e)};
    frontier.push(s);
    best.push(s);
    if (static_cast<int>(best.size()) > ef) best.pop();
  }
  const Adjacency& adj = layers_[layer];
  while (!frontier.empty()) {
    ScoredItem current = frontier.top();
    frontier.pop();
    if (static_cast<int>(best.size()) >= ef && ScoreOrder(best.top(), current)) break;
    for (int32_t nb : adj[current.item]) {
      if (!visited.insert(nb).second) continue;
      ScoredItem s{nb, Score(query, nb)};
      if (static_cast<int>(best.size()) < ef || ScoreOrder(s, best.top())) {
        frontier.push(s);
        best.push(s);
        if (static_cast<int>(best.size()) > ef) best.pop();
      }
    }
  }
  std::vector<ScoredItem> out;
  out.reserve(best.size());
  while (!best.empty()) {
    out.push_back(best.top());
    best.pop();
  }
  std::sort(out.begin(), out.end(), ScoreOrder);
  return out;
}

std::vector<int32_t> HnswIndex::Select(const std::vector<ScoredItem>& candidates,
                                       int m) const {
  // Equal norms: a larger inner product means a smaller distance.
  std::vector<int32_t> out;
  std::vector<uint8_t> taken(candidates.size(), 0);
  for (size_t k = 0; k < candidates.size() && static_cast<int>(out.size()) < m; ++k) {
    const int32_t c = candidates[k].item;
    bool diverse = true;
    for (int32_t s : out) {
      if (points_.row(c).dot(points_.row(s)) > candidates[k].score) {
        diverse = false;
        break;
      }
    }
    if (diverse) {
      out.push_back(c);
      taken[k] = 1;
    }
  }
  for (size_t k = 0; k < candidates.size() && static_cast<int>(out.size()) < m; ++k) {
    if (!taken[k]) out.push_back(candidates[k].item);
  }
  return out;
}

void HnswIndex::Insert(int32_t node, int level) {
  if (entry_ < 0) {
    entry_ = node;
    top_level_ = level;
    return;
  }
  const Vector query = points_.row(node).transpose();
  std::vector<int32_t> entries{entry_};
  for (int l = top_level_; l > level; --l) {
    entries = {SearchLayer(query, entries, 1, l).front().item};
  }
  for (int l = std::min(level, top_level_); l >= 0; --l) {
    const int cap = l == 0 ? 2 * options_.max_neighbors : options_.max_neighbors;
    auto found = SearchLayer(query, entries, options_.ef_construction, l);
    found.erase(std::remove_if(found.begin(), found.end(),
                               [&](const ScoredItem& s) { return s.item == node; }),
                found.end());
    Adjacency& adj = layers_[l];
    adj[node] = Select(found, cap);
    for (int32_t nb : adj[node]) {
      auto& back = adj[nb];
      back.push_back(node);
      if (static_cast<int>(back.size()) > cap) {
        const Vector anchor = points_.row(nb).transpose();
        std::vector<ScoredItem> rescored;
        rescored.reserve(back.size());
        for (int32_t x : back) rescored.push_back({x, Score(anchor, x)});
        std::sort(rescored.begin(), rescored.end(), ScoreOrder);
        back = Select(rescored, cap);
      }
    }
    entries.clear();
    for (const ScoredItem& s : found) entries.push_back(s.item);
    if (entries.empty()) entries.push_back(entry_);
  }
  if (level > top_level_) {
    top_level_ = level;
    entry_ = node;
  }
}

std::vector<ScoredItem> HnswIndex::Search(const Vector& user, int k) const {
  if (entry_ < 0) return {};
  if (user.size() != index_.vectors.cols()) throw InputError("query dimension mismatch");
  Vector query = Vector::Zero(points_.cols());
  query.head(user.size()) = user;
  std::vector<int32_t> entries{entry_};
  for (int l = top_level_; l > 0; --l) {
    entries = {SearchLayer(query, entries, 1, l).front().item};
  }
  auto found = SearchLayer(query, entries, std::max(options_.ef_search, k), 0);
  for (ScoredItem& s : found) s.score = index_.vectors.row(s.item).dot(user.transpose());
  std::sort(found.begin(), found.end(), ScoreOrder);
  if (static_cast<int>(found.size()) > k) found.resize(k);
  for (ScoredItem& s : found) s.item = index_.ids[s.item];
  return found;
}

RetrievalResult TopK(const Vector& user, const ItemIndex& index, int k, SearchMode mode,
                     const HnswIndex* graph) {
  if (k <= 0) throw InputError("K must be positive");
  if (k > index.size()) {
    throw InputError("K = " + std::to_string(k) + " exceeds the index size " +
                     std::to_string(index.size()));
  }
  RetrievalResult result;
  result.approximate = mode == SearchMode::kApprox;
  if (mode == SearchMode::kApprox) {
    if (graph == nullptr) throw InputError("approximate search requested without a graph");
    result.items = graph->Search(user, k);
    return result;
  }
  std::vector<ScoredItem> scored(index.size());
  for (int32_t r = 0; r < index.size(); ++r) {
    scored[r] = {index.ids[r], index.vectors.row(r).dot(user.transpose())};
  }
  std::partial_sort(scored.begin(), scored.begin() + k, scored.end(), ScoreOrder);
  scored.resize(k);
  result.items = std::move(scored);
  return result;
}

double RecallAtK(std::span<const ScoredItem> approx, std::span<const ScoredItem> exact) {
  if (exact.empty()) return 1.0;
  std::unordered_set<ItemId> truth;
  for (const ScoredItem& s : exact) truth.insert(s.item);
  size_t hit = 0;
  for (const ScoredItem& s : approx) hit += truth.count(s.item);
  return static_cast<double>(hit) / static_cast<double>(exact.size());
}

void WriteRetrievalDump(std::ostream& out, std::span<const int64_t> raw_users,
                        std::span<const RetrievalResult> results, const IdVocab& items) {
  char buf[64];
  for (size_t u = 0; u < results.size(); ++u) {
    const auto& list = results[u].items;
    for (size_t rank = 0; rank < list.size(); ++rank) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), list[rank].score);
      out << raw_users[u] << '\t' << rank + 1 << '\t' << items.Raw(list[rank].item) << '\t'
          << std::string_view(buf, end - buf) << '\n';
    }
  }
}

std::map<int64_t, std::vector<int64_t>> ReadRetrievalDump(std::istream& in) {
  std::map<int64_t, std::vector<std::pair<int64_t, int64_t>>> ranked;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    int64_t user = 0, rank = 0, item = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    bool ok = true;
    for (int64_t* field : {&user, &rank, &item}) {
      auto [next, ec] = std::from_chars(p, end, *field);
      if (ec != std::errc() || next == end || *next != '\t') {
        ok = false;
        break;
      }
      p = next + 1;
    }
    if (!ok) throw InputError("retrieval dump line " + std::to_string(line_no) + " is malformed");
    ranked[user].push_back({rank, item});
  }
  std::map<int64_t, std::vector<int64_t>> out;
  for (auto& [user, entries] : ranked) {
    std::sort(entries.begin(), entries.end());
    auto& list = out[user];
    for (const auto& [rank, item] : entries) list.push_back(item);
  }
  return out;
}

}  // namespace increc
