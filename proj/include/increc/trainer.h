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

// AdaGrad training loop over RTG/ITG/ETG examples, with the ablation
// variants wired as loss selections.

#ifndef INCREC_TRAINER_H_
#define INCREC_TRAINER_H_

#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "increc/losses.h"
#include "increc/model.h"

namespace increc {

struct AdaGradState {
  explicit AdaGradState(const ModelParams& params, double lr = 0.05, double eps = 1e-8);

  // Squared-gradient accumulators, same shapes as the parameters.
  ModelParams accum;
  double lr;
  double eps;
  int64_t step = 0;
};

// G += g^2; w -= lr * g / (sqrt(G) + eps), for touched coordinates only.
void AdaGradStep(ModelParams& params, AdaGradState& state, const GradientBuffer& grads);

enum class Ablation : uint8_t {
  kFull,      // L_b + L_inc + L_align
  kNoAlign,   // L_b + L_inc with alpha = 1 (IncRec-NA)
  kTbOnline,  // L_b on RTG and ITG
  kTbItg,     // L_b on ITG only
  kTbBoost,   // L_b on RTG and ITG, ITG terms amplified
};

std::string_view AblationName(Ablation ablation);

// The six grid variants: tb-online, tb-itg, tb-boost, increc-na,
// increc-ori, increc.
struct Variant {
  std::string_view name;
  Ablation ablation;
  AlphaMode alpha;
  Tower serving_tower;
};

std::span<const Variant> AllVariants();
std::optional<Variant> FindVariant(std::string_view name);

struct TrainConfig {
  int epochs = 5;
  int batch_size = 1024;
  uint64_t seed = 1;
  double tau = 1.0;
  double lr = 0.05;
  double eps = 1e-8;
  double itg_boost = 5.0;
  double weight_basic = 1.0;
  double weight_inc = 1.0;
  double weight_align = 1.0;
  AlphaMode alpha = AlphaMode::kIncRec;
  Ablation ablation = Ablation::kFull;
  int dim = 64;
  int hidden = 128;
  int feature_dim = 16;
};

struct StepRecord {
  int64_t step = 0;
  double l_basic = 0.0;
  double l_inc = 0.0;
  double l_align = 0.0;
  double l_total = 0.0;
  double mean_alpha = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<StepRecord> steps;
};

// `step \t l_basic \t l_inc \t l_align \t l_total \t mean_alpha` lines.
void WriteStepRecords(std::ostream& out, std::span<const StepRecord> steps);

// Errors when the selected variant has no positives for one of its losses,
// e.g. full mode without ETG examples.
TrainResult Train(const TrainingView& data, std::span<const TrainingExample> examples,
                  const ModelConfig& model_config, const TrainConfig& config);

// Starts from the given parameters instead of a seeded initialization.
TrainResult TrainFrom(ModelParams init, const TrainingView& data,
                      std::span<const TrainingExample> examples,
                      const TrainConfig& config);

}  // namespace increc

#endif  // INCREC_TRAINER_H_
