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

#include "increc/trainer.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <random>

namespace increc {
namespace {

ModelParams ZeroLike(const ModelParams& params) {
  ModelParams z = params;
  for (const Block& b : ParamBlocks(z)) std::fill(b.data, b.data + b.size(), 0.0);
  return z;
}

inline void AdaGradUpdate(double* w, double* accum, const double* g, size_t n,
                          double lr, double eps) {
  for (size_t k = 0; k < n; ++k) {
    if (g[k] == 0.0) continue;
    if (!std::isfinite(g[k])) throw InputError("non-finite gradient");
    accum[k] += g[k] * g[k];
    w[k] -= lr * g[k] / (std::sqrt(accum[k]) + eps);
  }
}

void UpdateRows(Matrix& w, Matrix& accum, const RowGrad& g, double lr, double eps) {
  const Eigen::Index cols = w.cols();
  for (int32_t row : g.touched_rows()) {
    AdaGradUpdate(w.data() + row * cols, accum.data() + row * cols,
                  g.dense().data() + row * cols, static_cast<size_t>(cols), lr, eps);
  }
}

void UpdateMlp(Mlp& w, Mlp& accum, const MlpGrad& g, double lr, double eps) {
  if (!g.touched) return;
  AdaGradUpdate(w.w1.data(), accum.w1.data(), g.w1.data(), w.w1.size(), lr, eps);
  AdaGradUpdate(w.b1.data(), accum.b1.data(), g.b1.data(), w.b1.size(), lr, eps);
  AdaGradUpdate(w.w2.data(), accum.w2.data(), g.w2.data(), w.w2.size(), lr, eps);
  AdaGradUpdate(w.b2.data(), accum.b2.data(), g.b2.data(), w.b2.size(), lr, eps);
}

constexpr std::array<Variant, 6> kVariants = {{
    {"tb-online", Ablation::kTbOnline, AlphaMode::kConstant, Tower::kBasic},
    {"tb-itg", Ablation::kTbItg, AlphaMode::kConstant, Tower::kBasic},
    {"tb-boost", Ablation::kTbBoost, AlphaMode::kConstant, Tower::kBasic},
    {"increc-na", Ablation::kNoAlign, AlphaMode::kConstant, Tower::kIncremental},
    {"increc-ori", Ablation::kFull, AlphaMode::kIncRecOri, Tower::kIncremental},
    {"increc", Ablation::kFull, AlphaMode::kIncRec, Tower::kIncremental},
}};

std::span<const TrainingExample* const> Chunk(const std::vector<const TrainingExample*>& pool,
                                              int64_t step, int64_t steps) {
  const size_t begin = pool.size() * step / steps;
  const size_t end = pool.size() * (step + 1) / steps;
  return std::span<const TrainingExample* const>(pool.data() + begin, end - begin);
}

}  // namespace

AdaGradState::AdaGradState(const ModelParams& params, double lr_in, double eps_in)
    : accum(ZeroLike(params)), lr(lr_in), eps(eps_in) {}

void AdaGradStep(ModelParams& params, AdaGradState& state, const GradientBuffer& grads) {
  if (!(params.config == state.accum.config) || !(params.config == grads.config())) {
    throw InputError("AdaGrad: parameter, accumulator and gradient shapes differ");
  }
  if (!grads.AllFinite()) throw InputError("non-finite gradient");
  const double lr = state.lr;
  const double eps = state.eps;
  UpdateRows(params.item_embedding, state.accum.item_embedding, grads.item_embedding, lr, eps);
  UpdateRows(params.category_embedding, state.accum.category_embedding,
             grads.category_embedding, lr, eps);
  UpdateRows(params.brand_embedding, state.accum.brand_embedding, grads.brand_embedding, lr,
             eps);
  for (size_t s = 0; s < params.profile_embedding.size(); ++s) {
    UpdateRows(params.profile_embedding[s], state.accum.profile_embedding[s],
               grads.profile_embedding[s], lr, eps);
  }
  UpdateMlp(params.item_tower, state.accum.item_tower, grads.item_tower, lr, eps);
  for (int t = 0; t < kNumUserTowers; ++t) {
    UpdateMlp(params.user_towers[t], state.accum.user_towers[t], grads.user_towers[t], lr, eps);
  }
  ++state.step;
}

std::string_view AblationName(Ablation ablation) {
  switch (ablation) {
    case Ablation::kFull:
      return "full";
    case Ablation::kNoAlign:
      return "no-align";
    case Ablation::kTbOnline:
      return "tb-online";
    case Ablation::kTbItg:
      return "tb-itg";
    case Ablation::kTbBoost:
      return "tb-boost";
  }
  return "?";
}

std::span<const Variant> AllVariants() { return kVariants; }

std::optional<Variant> FindVariant(std::string_view name) {
  for (const Variant& v : kVariants) {
    if (v.name == name) return v;
  }
  return std::nullopt;
}

void WriteStepRecords(std::ostream& out, std::span<const StepRecord> steps) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(10);
  for (const StepRecord& r : steps) {
    out << r.step << '\t' << r.l_basic << '\t' << r.l_inc << '\t' << r.l_align << '\t'
        << r.l_total << '\t' << r.mean_alpha << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

TrainResult Train(const TrainingView& data, std::span<const TrainingExample> examples,
                  const ModelConfig& model_config, const TrainConfig& config) {
  return TrainFrom(InitParams(model_config, config.seed), data, examples, config);
}

TrainResult TrainFrom(ModelParams init, const TrainingView& data,
                      std::span<const TrainingExample> examples,
                      const TrainConfig& config) {
  if (config.epochs <= 0 || config.batch_size <= 0) {
    throw InputError("epochs and batch size must be positive");
  }
  std::vector<const TrainingExample*> targets;  // RTG and ITG
  std::vector<const TrainingExample*> itg;
  std::vector<const TrainingExample*> etg;
  for (const TrainingExample& ex : examples) {
    switch (ex.group) {
      case SampleGroup::kRTG:
        targets.push_back(&ex);
        break;
      case SampleGroup::kITG:
        targets.push_back(&ex);
        itg.push_back(&ex);
        break;
      case SampleGroup::kETG:
        etg.push_back(&ex);
        break;
    }
  }

  const Ablation mode = config.ablation;
  const bool use_inc = mode == Ablation::kFull || mode == Ablation::kNoAlign;
  const bool use_align = mode == Ablation::kFull;
  const auto& basic_pool = mode == Ablation::kTbItg ? itg : targets;
  if (basic_pool.empty()) throw InputError("basic tower has no positives");
  if (use_inc && itg.empty()) throw InputError("incremental tower has no positives");
  if (use_align && etg.empty()) throw InputError("alignment tower has no positives");

  LossOptions loss_options;
  loss_options.tau = config.tau;
  loss_options.weight_basic = config.weight_basic;
  loss_options.weight_inc = config.weight_inc;
  loss_options.weight_align = config.weight_align;
  loss_options.itg_boost = mode == Ablation::kTbBoost ? config.itg_boost : 1.0;
  const AlphaMode alpha_mode = mode == Ablation::kNoAlign ? AlphaMode::kConstant : config.alpha;

  TrainResult result{std::move(init), {}};
  ModelParams& params = result.params;
  AdaGradState state(params, config.lr, config.eps);
  GradientBuffer grads(params);

  const int64_t steps_per_epoch =
      (static_cast<int64_t>(basic_pool.size()) + config.batch_size - 1) / config.batch_size;

  // Shuffle every pool each epoch regardless of mode so that variants see
  // identical batches for a fixed seed.
  std::vector<const TrainingExample*> shuffled_targets = targets;
  std::vector<const TrainingExample*> shuffled_itg = itg;
  std::vector<const TrainingExample*> shuffled_etg = etg;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::seed_seq seq{static_cast<uint64_t>(config.seed), static_cast<uint64_t>(epoch),
                      uint64_t{0x5eed}};
    std::mt19937_64 rng(seq);
    shuffled_targets = targets;
    shuffled_itg = itg;
    shuffled_etg = etg;
    std::shuffle(shuffled_targets.begin(), shuffled_targets.end(), rng);
    std::shuffle(shuffled_itg.begin(), shuffled_itg.end(), rng);
    std::shuffle(shuffled_etg.begin(), shuffled_etg.end(), rng);
    const auto& basic = mode == Ablation::kTbItg ? shuffled_itg : shuffled_targets;

    for (int64_t s = 0; s < steps_per_epoch; ++s) {
      StepBatch batch;
      batch.basic = Chunk(basic, s, steps_per_epoch);
      std::vector<double> alphas;
      double mean_clamped = 0.0;
      if (use_inc) {
        batch.incremental = Chunk(shuffled_itg, s, steps_per_epoch);
        auto weights = ComputeConsistencyWeights(params, data, batch.incremental, alpha_mode);
        size_t n_free = 0;
        for (const ConsistencyWeight& w : weights) {
          alphas.push_back(w.alpha);
          if (!w.fixed) {
            mean_clamped += std::max(0.0, w.raw);
            ++n_free;
          }
        }
        mean_clamped = n_free > 0 ? mean_clamped / static_cast<double>(n_free) : 1.0;
        batch.alphas = alphas;
      }
      if (use_align) batch.align = Chunk(shuffled_etg, s, steps_per_epoch);

      grads.Clear();
      LossBreakdown loss = TotalLoss(params, data, batch, loss_options, &grads);
      AdaGradStep(params, state, grads);

      StepRecord record;
      record.step = state.step;
      record.l_basic = loss.l_basic;
      record.l_inc = loss.l_inc;
      record.l_align = loss.l_align;
      record.l_total = loss.l_total;
      record.mean_alpha = use_inc ? mean_clamped : 0.0;
      result.steps.push_back(record);
    }
  }
  return result;
}

}  // namespace increc
