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

// Independent reference implementations used as test oracles. They favor
// plain loops, std::set algebra and long double over speed.

#ifndef INCREC_TESTS_ORACLES_H_
#define INCREC_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <set>
#include <span>
#include <vector>

#include "increc/eval.h"
#include "increc/losses.h"
#include "increc/model.h"
#include "increc/sample_builder.h"

namespace increc::testing {

// -log softmax(z)[0] in long double without any shift.
inline long double NaiveCrossEntropy(const std::vector<long double>& z) {
  long double denom = 0.0L;
  for (long double v : z) denom += std::exp(v);
  return -(z[0] - std::log(denom));
}

inline long double Dot(const Vector& a, const Vector& b) {
  long double s = 0.0L;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    s += static_cast<long double>(a[k]) * static_cast<long double>(b[k]);
  }
  return s;
}

// One example's loss with the single-instance forward passes.
inline long double NaiveExampleLoss(const ModelParams& params, const TrainingView& data,
                                    const TrainingExample& ex, Tower tower, double tau) {
  const RequestContext& ctx = data.requests[ex.request];
  const Vector user = UserForward(params, tower, ctx);
  std::vector<ItemId> items{ex.positive};
  items.insert(items.end(), ex.negatives.begin(), ex.negatives.end());
  if (tower == Tower::kIncremental) {
    const auto& rtg = data.partitions[ex.request].rtg;
    items.insert(items.end(), rtg.begin(), rtg.end());
  }
  std::vector<long double> z;
  for (ItemId i : items) z.push_back(Dot(user, ItemForward(params, *data.catalog, i)) / tau);
  return NaiveCrossEntropy(z);
}

struct NaiveLosses {
  long double basic = 0.0L;
  long double inc = 0.0L;
  long double align = 0.0L;
  long double total = 0.0L;
};

inline NaiveLosses NaiveTotalLoss(const ModelParams& params, const TrainingView& data,
                                  const StepBatch& batch, const LossOptions& options) {
  NaiveLosses out;
  auto mean = [&](std::span<const TrainingExample* const> ex, Tower tower, auto weight_of) {
    if (ex.empty()) return 0.0L;
    long double sum = 0.0L;
    for (size_t e = 0; e < ex.size(); ++e) {
      sum += weight_of(e) * NaiveExampleLoss(params, data, *ex[e], tower, options.tau);
    }
    return sum / static_cast<long double>(ex.size());
  };
  out.basic = mean(batch.basic, Tower::kBasic, [&](size_t e) -> long double {
    return batch.basic[e]->group == SampleGroup::kITG ? options.itg_boost : 1.0;
  });
  out.inc = mean(batch.incremental, Tower::kIncremental,
                 [&](size_t e) -> long double { return batch.alphas[e]; });
  out.align = mean(batch.align, Tower::kAlign, [](size_t) -> long double { return 1.0L; });
  out.total = options.weight_basic * out.basic + options.weight_inc * out.inc +
              options.weight_align * out.align;
  return out;
}

struct NaivePartition {
  std::set<ItemId> rtg;
  std::set<ItemId> itg;
};

inline NaivePartition BrutePartition(std::span<const ItemId> targets,
                                     std::span<const ItemId> retrieved) {
  const std::set<ItemId> t(targets.begin(), targets.end());
  const std::set<ItemId> r(retrieved.begin(), retrieved.end());
  NaivePartition p;
  std::set_intersection(t.begin(), t.end(), r.begin(), r.end(),
                        std::inserter(p.rtg, p.rtg.end()));
  std::set_difference(t.begin(), t.end(), r.begin(), r.end(),
                      std::inserter(p.itg, p.itg.end()));
  return p;
}

// |set(list[from, to)) ∩ itg| / |itg|
inline double BruteRatio(const ItemList& list, size_t from, size_t to, const ItemList& itg) {
  std::set<ItemId> window;
  for (size_t r = from; r < std::min(to, list.size()); ++r) window.insert(list[r]);
  size_t hit = 0;
  for (ItemId i : std::set<ItemId>(itg.begin(), itg.end())) hit += window.count(i);
  return static_cast<double>(hit) / static_cast<double>(std::set<ItemId>(itg.begin(), itg.end()).size());
}

// Enhanced list with every item of base[0, k) removed, first k survivors.
inline ItemList BruteDedup(const ItemList& base, const ItemList& enhanced, int k) {
  ItemList out;
  for (ItemId i : enhanced) {
    bool in_base = false;
    for (int r = 0; r < k; ++r) in_base = in_base || base[r] == i;
    bool seen = false;
    for (ItemId o : out) seen = seen || o == i;
    if (!in_base && !seen && static_cast<int>(out.size()) < k) out.push_back(i);
  }
  return out;
}

}  // namespace increc::testing

#endif  // INCREC_TESTS_ORACLES_H_
