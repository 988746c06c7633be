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

#include "increc/sample_builder.h"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace increc {

std::span<const ScoredItem> I2IIndex::Neighbors(ItemId trigger) const {
  if (trigger < 0 || static_cast<size_t>(trigger) >= lists_.size()) return {};
  return lists_[trigger];
}

bool I2IIndex::empty() const {
  return std::all_of(lists_.begin(), lists_.end(),
                     [](const auto& list) { return list.empty(); });
}

std::map<std::pair<ItemId, ItemId>, int64_t> CountCooccurrence(
    const EventLog& log, Timestamp window) {
  std::map<std::pair<ItemId, ItemId>, int64_t> counts;
  std::vector<const Event*> acts;
  for (const auto& stream : log.streams) {
    acts.clear();
    for (const Event& e : stream) {
      if (e.kind == EventKind::kClick || e.kind == EventKind::kOrder) {
        acts.push_back(&e);
      }
    }
    for (size_t p = 0; p < acts.size(); ++p) {
      for (size_t q = p + 1; q < acts.size(); ++q) {
        if (acts[q]->time - acts[p]->time > window) break;
        ItemId a = acts[p]->item;
        ItemId b = acts[q]->item;
        if (a == b) continue;
        ++counts[{std::min(a, b), std::max(a, b)}];
      }
    }
  }
  return counts;
}

I2IIndex BuildI2IIndex(const EventLog& log, const I2IOptions& options) {
  std::vector<std::vector<ScoredItem>> lists(log.num_items());
  for (const auto& [pair, count] : CountCooccurrence(log, options.window)) {
    double score = static_cast<double>(count);
    lists[pair.first].push_back({pair.second, score});
    lists[pair.second].push_back({pair.first, score});
  }
  for (auto& list : lists) {
    std::sort(list.begin(), list.end(), ScoreOrder);
    if (list.size() > static_cast<size_t>(options.top_m)) {
      list.resize(options.top_m);
    }
  }
  return I2IIndex(std::move(lists));
}

std::vector<ItemId> PopularityRanking(const EventLog& log) {
  std::vector<ItemId> order(log.num_items());
  for (ItemId i = 0; i < log.num_items(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](ItemId a, ItemId b) {
    return log.popularity[a] > log.popularity[b];
  });
  return order;
}

std::vector<ItemId> RetrieveBaseline(const I2IIndex& index,
                                     std::span<const ItemId> popularity,
                                     const RequestContext& ctx, int k_base) {
  std::vector<ItemId> triggers;
  triggers.reserve(ctx.behaviors.size());
  for (const Behavior& b : ctx.behaviors) triggers.push_back(b.item);
  std::sort(triggers.begin(), triggers.end());
  triggers.erase(std::unique(triggers.begin(), triggers.end()), triggers.end());

  std::unordered_map<ItemId, double> summed;
  for (ItemId trigger : triggers) {
    for (const ScoredItem& co : index.Neighbors(trigger)) {
      summed[co.item] += co.score;
    }
  }
  std::vector<ScoredItem> candidates;
  candidates.reserve(summed.size());
  for (const auto& [item, score] : summed) candidates.push_back({item, score});
  std::sort(candidates.begin(), candidates.end(), ScoreOrder);

  std::vector<ItemId> out;
  std::unordered_set<ItemId> taken;
  const size_t limit = static_cast<size_t>(std::max(k_base, 0));
  for (const ScoredItem& c : candidates) {
    if (out.size() >= limit) break;
    out.push_back(c.item);
    taken.insert(c.item);
  }
  for (ItemId item : popularity) {
    if (out.size() >= limit) break;
    if (taken.insert(item).second) out.push_back(item);
  }
  std::sort(out.begin(), out.end());
  return out;
}

SamplePartition PartitionTargets(const RequestContext& ctx,
                                 std::span<const ItemId> retrieved,
                                 size_t request_index) {
  SamplePartition part;
  part.request = request_index;
  part.retrieved.assign(retrieved.begin(), retrieved.end());
  std::sort(part.retrieved.begin(), part.retrieved.end());
  part.retrieved.erase(std::unique(part.retrieved.begin(), part.retrieved.end()),
                       part.retrieved.end());
  for (ItemId target : ctx.targets) {
    if (std::binary_search(part.retrieved.begin(), part.retrieved.end(), target)) {
      part.rtg.push_back(target);
    } else {
      part.itg.push_back(target);
    }
  }
  return part;
}

std::vector<ItemId> SampleNegatives(int pool_size, int n,
                                    std::span<const ItemId> exclude,
                                    std::mt19937_64& rng) {
  if (n < 0) throw InputError("negative sample count must be >= 0");
  std::vector<ItemId> banned;
  for (ItemId id : exclude) {
    if (id >= 0 && id < pool_size) banned.push_back(id);
  }
  std::sort(banned.begin(), banned.end());
  banned.erase(std::unique(banned.begin(), banned.end()), banned.end());
  const int64_t available = static_cast<int64_t>(pool_size) - static_cast<int64_t>(banned.size());
  if (n > available) {
    throw InputError("negative pool too small: need " + std::to_string(n) +
                     " of " + std::to_string(std::max<int64_t>(available, 0)) +
                     " available items");
  }
  std::vector<ItemId> out;
  if (n == 0) return out;
  out.reserve(n);

  auto is_banned = [&](ItemId id) {
    return std::binary_search(banned.begin(), banned.end(), id);
  };

  if (2 * static_cast<int64_t>(n) > available) {
    // Dense regime: partial Fisher-Yates over the allowed ids.
    std::vector<ItemId> allowed;
    allowed.reserve(available);
    for (ItemId id = 0; id < pool_size; ++id) {
      if (!is_banned(id)) allowed.push_back(id);
    }
    for (int k = 0; k < n; ++k) {
      std::uniform_int_distribution<size_t> pick(k, allowed.size() - 1);
      std::swap(allowed[k], allowed[pick(rng)]);
      out.push_back(allowed[k]);
    }
    return out;
  }

  std::uniform_int_distribution<ItemId> draw(0, pool_size - 1);
  std::unordered_set<ItemId> chosen;
  while (static_cast<int>(out.size()) < n) {
    ItemId id = draw(rng);
    if (is_banned(id) || !chosen.insert(id).second) continue;
    out.push_back(id);
  }
  return out;
}

std::string_view SampleGroupName(SampleGroup group) {
  switch (group) {
    case SampleGroup::kRTG:
      return "RTG";
    case SampleGroup::kITG:
      return "ITG";
    case SampleGroup::kETG:
      return "ETG";
  }
  return "?";
}

SampleSet BuildTrainingSet(std::span<const RequestContext> contexts,
                           const I2IIndex& index,
                           std::span<const ItemId> popularity, int num_items,
                           const SampleOptions& options, std::mt19937_64& rng,
                           const std::vector<bool>& train_mask) {
  SampleSet set;
  set.partitions.reserve(contexts.size());
  for (size_t r = 0; r < contexts.size(); ++r) {
    const RequestContext& ctx = contexts[r];
    auto retrieved = RetrieveBaseline(index, popularity, ctx, options.k_base);
    set.partitions.push_back(PartitionTargets(ctx, retrieved, r));
    if (!train_mask.empty() && !train_mask[r]) continue;

    const SamplePartition& part = set.partitions.back();
    std::vector<ItemId> exclude = ctx.targets;
    exclude.insert(exclude.end(), ctx.exposed.begin(), ctx.exposed.end());
    auto emit = [&](ItemId positive, SampleGroup group) {
      TrainingExample ex;
      ex.request = static_cast<uint32_t>(r);
      ex.positive = positive;
      ex.group = group;
      ex.negatives = SampleNegatives(num_items, options.n_neg, exclude, rng);
      set.examples.push_back(std::move(ex));
    };
    for (ItemId item : part.rtg) emit(item, SampleGroup::kRTG);
    for (ItemId item : part.itg) emit(item, SampleGroup::kITG);
    for (ItemId item : ctx.exposed) emit(item, SampleGroup::kETG);
  }
  return set;
}

void WritePartitions(std::ostream& out, const EventLog& log,
                     std::span<const RequestContext> contexts,
                     std::span<const SamplePartition> partitions) {
  for (const SamplePartition& part : partitions) {
    const RequestContext& ctx = contexts[part.request];
    const int64_t user = log.users.Raw(ctx.user);
    auto dump = [&](std::string_view group, const std::vector<ItemId>& items) {
      for (ItemId item : items) {
        out << user << '\t' << ctx.time << '\t' << group << '\t'
            << log.items.Raw(item) << '\n';
      }
    };
    dump("RTG", part.rtg);
    dump("ITG", part.itg);
    dump("ETG", ctx.exposed);
  }
}

}  // namespace increc
