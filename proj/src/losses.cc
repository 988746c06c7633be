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

#include "increc/losses.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace increc {
namespace {

// Dense slot assignment for the items or requests touched by one step.
class SlotMap {
 public:
  explicit SlotMap(size_t universe) : slot_(universe, -1) {}

  int32_t Add(int32_t id) {
    int32_t& s = slot_.at(id);
    if (s < 0) {
      s = static_cast<int32_t>(ids_.size());
      ids_.push_back(id);
    }
    return s;
  }
  int32_t operator[](int32_t id) const { return slot_[id]; }
  const std::vector<int32_t>& ids() const { return ids_; }

 private:
  std::vector<int32_t> slot_;
  std::vector<int32_t> ids_;
};

void CheckGroup(std::span<const TrainingExample* const> batch,
                std::initializer_list<SampleGroup> allowed, const char* loss) {
  for (const TrainingExample* ex : batch) {
    if (std::find(allowed.begin(), allowed.end(), ex->group) == allowed.end()) {
      throw InputError(std::string(SampleGroupName(ex->group)) +
                       " example passed to " + loss);
    }
  }
}

std::vector<const RequestContext*> RequestPointers(const TrainingView& data,
                                                   const std::vector<int32_t>& ids) {
  std::vector<const RequestContext*> out;
  out.reserve(ids.size());
  for (int32_t r : ids) out.push_back(&data.requests[r]);
  return out;
}

}  // namespace

SoftmaxTerm SoftmaxCrossEntropy(std::span<const double> logits) {
  if (logits.size() < 2) throw InputError("sampled softmax needs at least one negative");
  double max_logit = -std::numeric_limits<double>::infinity();
  for (double z : logits) {
    if (!std::isfinite(z)) throw InputError("non-finite logit in sampled softmax");
    max_logit = std::max(max_logit, z);
  }
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - max_logit);
  const double log_sum_exp = max_logit + std::log(sum);

  SoftmaxTerm term;
  term.loss = log_sum_exp - logits[0];
  term.d_logits.resize(logits.size());
  for (size_t k = 0; k < logits.size(); ++k) {
    term.d_logits[k] = std::exp(logits[k] - log_sum_exp);
  }
  term.d_logits[0] -= 1.0;
  return term;
}

SoftmaxTerm SampledSoftmaxTerm(const Vector& user, const Vector& positive,
                               std::span<const Vector> negatives, double tau) {
  if (negatives.empty()) throw InputError("sampled softmax needs at least one negative");
  std::vector<double> logits;
  logits.reserve(negatives.size() + 1);
  logits.push_back(user.dot(positive) / tau);
  for (const Vector& v : negatives) logits.push_back(user.dot(v) / tau);
  return SoftmaxCrossEntropy(logits);
}

std::string_view AlphaModeName(AlphaMode mode) {
  switch (mode) {
    case AlphaMode::kIncRec:
      return "increc";
    case AlphaMode::kIncRecOri:
      return "increc-ori";
    case AlphaMode::kConstant:
      return "none";
  }
  return "?";
}

std::optional<AlphaMode> ParseAlphaMode(std::string_view name) {
  if (name == "increc") return AlphaMode::kIncRec;
  if (name == "increc-ori") return AlphaMode::kIncRecOri;
  if (name == "none") return AlphaMode::kConstant;
  return std::nullopt;
}

ConsistencyWeight ComputeConsistencyWeight(const ModelParams& params,
                                           const ItemCatalog& catalog,
                                           ItemId itg_item,
                                           const RequestContext& ctx,
                                           AlphaMode mode) {
  ConsistencyWeight w;
  if (mode == AlphaMode::kConstant) {
    w.fixed = true;
    return w;
  }
  const Vector item = ItemForward(params, catalog, itg_item);
  const Vector user = UserForward(params, Tower::kAlign, ctx);
  if (mode == AlphaMode::kIncRecOri) {
    w.raw = user.dot(item);
    w.alpha = std::max(0.0, w.raw);
    return w;
  }
  if (ctx.exposed.empty()) {
    w.fixed = true;
    return w;
  }
  double best = -std::numeric_limits<double>::infinity();
  Vector best_vec;
  for (ItemId j : ctx.exposed) {  // ascending ids: strict > keeps the smallest on ties
    Vector v = ItemForward(params, catalog, j);
    const double sim = item.dot(v);
    if (sim > best) {
      best = sim;
      w.matched = j;
      best_vec = std::move(v);
    }
  }
  w.raw = user.dot(best_vec);
  w.alpha = std::max(0.0, w.raw);
  return w;
}

void NormalizeConsistencyWeights(std::span<ConsistencyWeight> weights) {
  double sum = 0.0;
  size_t count = 0;
  for (const ConsistencyWeight& w : weights) {
    if (!w.fixed && w.alpha > 0.0) {
      sum += w.alpha;
      ++count;
    }
  }
  const double divisor = count > 0 ? sum / static_cast<double>(count) : 1.0;
  for (ConsistencyWeight& w : weights) {
    if (!w.fixed) w.alpha /= divisor;
  }
}

std::vector<ConsistencyWeight> ComputeConsistencyWeights(
    const ModelParams& params, const TrainingView& data,
    std::span<const TrainingExample* const> itg_batch, AlphaMode mode) {
  CheckGroup(itg_batch, {SampleGroup::kITG}, "consistency weights");
  std::vector<ConsistencyWeight> weights(itg_batch.size());
  if (mode == AlphaMode::kConstant || itg_batch.empty()) {
    for (auto& w : weights) w.fixed = true;
    return weights;
  }

  SlotMap items(params.config.num_items);
  SlotMap requests(data.requests.size());
  for (const TrainingExample* ex : itg_batch) {
    items.Add(ex->positive);
    requests.Add(static_cast<int32_t>(ex->request));
    if (mode == AlphaMode::kIncRec) {
      for (ItemId j : data.requests[ex->request].exposed) items.Add(j);
    }
  }
  ItemTowerTape item_tape;
  item_tape.Forward(params, *data.catalog, items.ids());
  UserTowerTape user_tape;
  auto request_ptrs = RequestPointers(data, requests.ids());
  user_tape.Forward(params, Tower::kAlign, request_ptrs);
  const Matrix& v = item_tape.output();
  const Matrix& u = user_tape.output();

  for (size_t e = 0; e < itg_batch.size(); ++e) {
    const TrainingExample& ex = *itg_batch[e];
    const RequestContext& ctx = data.requests[ex.request];
    ConsistencyWeight& w = weights[e];
    const auto user = u.row(requests[static_cast<int32_t>(ex.request)]);
    const auto item = v.row(items[ex.positive]);
    if (mode == AlphaMode::kIncRecOri) {
      w.raw = user.dot(item);
      w.alpha = std::max(0.0, w.raw);
      continue;
    }
    if (ctx.exposed.empty()) {
      w.fixed = true;
      continue;
    }
    double best = -std::numeric_limits<double>::infinity();
    for (ItemId j : ctx.exposed) {
      const double sim = item.dot(v.row(items[j]));
      if (sim > best) {
        best = sim;
        w.matched = j;
      }
    }
    w.raw = user.dot(v.row(items[w.matched]));
    w.alpha = std::max(0.0, w.raw);
  }
  NormalizeConsistencyWeights(weights);
  return weights;
}

LossBreakdown TotalLoss(const ModelParams& params, const TrainingView& data,
                        const StepBatch& batch, const LossOptions& options,
                        GradientBuffer* grads) {
  CheckGroup(batch.basic, {SampleGroup::kRTG, SampleGroup::kITG}, "the basic loss");
  CheckGroup(batch.incremental, {SampleGroup::kITG}, "the incremental loss");
  CheckGroup(batch.align, {SampleGroup::kETG}, "the alignment loss");
  if (batch.alphas.size() != batch.incremental.size()) {
    throw InputError("one consistency weight per incremental example is required");
  }
  for (double a : batch.alphas) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw InputError("consistency weight must be finite and >= 0");
    }
  }
  if (!(options.tau > 0.0)) throw InputError("temperature must be positive");

  const int dim = params.config.dim;
  const double inv_tau = 1.0 / options.tau;

  // Item rows for every positive and negative, plus RTG items used as
  // negatives by the incremental loss.
  SlotMap items(params.config.num_items);
  auto rtg_of = [&](const TrainingExample& ex) -> const std::vector<ItemId>& {
    return data.partitions[ex.request].rtg;
  };
  auto add_items = [&](std::span<const TrainingExample* const> examples, bool with_rtg) {
    for (const TrainingExample* ex : examples) {
      items.Add(ex->positive);
      for (ItemId n : ex->negatives) items.Add(n);
      if (with_rtg) {
        for (ItemId n : rtg_of(*ex)) items.Add(n);
      }
    }
  };
  add_items(batch.basic, false);
  add_items(batch.incremental, true);
  add_items(batch.align, false);

  ItemTowerTape item_tape;
  item_tape.Forward(params, *data.catalog, items.ids());
  const Matrix& item_vecs = item_tape.output();
  Matrix d_items = Matrix::Zero(item_vecs.rows(), dim);

  LossBreakdown out;
  std::vector<double> logits;
  std::vector<int32_t> slots;

  struct Part {
    Tower tower;
    std::span<const TrainingExample* const> examples;
    double weight;
    double* value;
  };
  const Part parts[] = {
      {Tower::kBasic, batch.basic, options.weight_basic, &out.l_basic},
      {Tower::kIncremental, batch.incremental, options.weight_inc, &out.l_inc},
      {Tower::kAlign, batch.align, options.weight_align, &out.l_align},
  };

  for (const Part& part : parts) {
    if (part.examples.empty()) continue;
    SlotMap requests(data.requests.size());
    for (const TrainingExample* ex : part.examples) {
      requests.Add(static_cast<int32_t>(ex->request));
    }
    UserTowerTape user_tape;
    auto request_ptrs = RequestPointers(data, requests.ids());
    user_tape.Forward(params, part.tower, request_ptrs);
    const Matrix& user_vecs = user_tape.output();
    Matrix d_users = Matrix::Zero(user_vecs.rows(), dim);

    const double n = static_cast<double>(part.examples.size());
    double sum = 0.0;
    for (size_t e = 0; e < part.examples.size(); ++e) {
      const TrainingExample& ex = *part.examples[e];
      const int32_t urow = requests[static_cast<int32_t>(ex.request)];
      const auto user = user_vecs.row(urow);

      slots.clear();
      slots.push_back(items[ex.positive]);
      for (ItemId neg : ex.negatives) slots.push_back(items[neg]);
      if (part.tower == Tower::kIncremental) {
        for (ItemId neg : rtg_of(ex)) slots.push_back(items[neg]);
      }
      logits.resize(slots.size());
      for (size_t k = 0; k < slots.size(); ++k) {
        logits[k] = user.dot(item_vecs.row(slots[k])) * inv_tau;
      }
      SoftmaxTerm term = SoftmaxCrossEntropy(logits);

      double example_weight = 1.0;
      if (part.tower == Tower::kBasic && ex.group == SampleGroup::kITG) {
        example_weight = options.itg_boost;
      } else if (part.tower == Tower::kIncremental) {
        example_weight = batch.alphas[e];
      }
      sum += example_weight * term.loss;

      ExampleDiagnostic diag;
      diag.group = ex.group;
      diag.positive_logit = logits[0];
      diag.max_negative_logit = *std::max_element(logits.begin() + 1, logits.end());
      diag.alpha = part.tower == Tower::kIncremental ? batch.alphas[e] : 1.0;
      diag.loss = term.loss;
      out.diagnostics.push_back(diag);

      if (grads == nullptr) continue;
      const double scale = part.weight * example_weight / n * inv_tau;
      if (scale == 0.0) continue;
      auto d_user = d_users.row(urow);
      for (size_t k = 0; k < slots.size(); ++k) {
        const double g = scale * term.d_logits[k];
        d_user += g * item_vecs.row(slots[k]);
        d_items.row(slots[k]) += g * user;
      }
    }
    *part.value = sum / n;
    if (grads != nullptr) user_tape.Backward(params, d_users, grads);
  }

  if (grads != nullptr && item_vecs.rows() > 0) {
    item_tape.Backward(params, d_items, grads);
  }
  out.l_total = options.weight_basic * out.l_basic + options.weight_inc * out.l_inc +
                options.weight_align * out.l_align;
  if (!batch.alphas.empty()) {
    double s = 0.0;
    for (double a : batch.alphas) s += a;
    out.mean_alpha = s / static_cast<double>(batch.alphas.size());
  }
  return out;
}

double LossBasic(const ModelParams& params, const TrainingView& data,
                 std::span<const TrainingExample* const> batch,
                 const LossOptions& options, GradientBuffer* grads) {
  LossOptions o = options;
  o.weight_basic = 1.0;
  StepBatch step;
  step.basic = batch;
  return TotalLoss(params, data, step, o, grads).l_basic;
}

double LossIncremental(const ModelParams& params, const TrainingView& data,
                       std::span<const TrainingExample* const> batch,
                       std::span<const double> alphas, const LossOptions& options,
                       GradientBuffer* grads) {
  LossOptions o = options;
  o.weight_inc = 1.0;
  StepBatch step;
  step.incremental = batch;
  step.alphas = alphas;
  return TotalLoss(params, data, step, o, grads).l_inc;
}

double LossAlign(const ModelParams& params, const TrainingView& data,
                 std::span<const TrainingExample* const> batch,
                 const LossOptions& options, GradientBuffer* grads) {
  LossOptions o = options;
  o.weight_align = 1.0;
  StepBatch step;
  step.align = batch;
  return TotalLoss(params, data, step, o, grads).l_align;
}

}  // namespace increc
