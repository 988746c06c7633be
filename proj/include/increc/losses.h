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

// Sampled-softmax objectives for the basic, incremental and alignment user
// towers, the consistency weight that links alignment to the incremental
// objective, and the combined objective with analytic gradients.

#ifndef INCREC_LOSSES_H_
#define INCREC_LOSSES_H_

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "increc/common.h"
#include "increc/event_log.h"
#include "increc/model.h"
#include "increc/sample_builder.h"

namespace increc {

struct SoftmaxTerm {
  double loss = 0.0;
  // d(loss)/d(logit); entry 0 is the positive.
  std::vector<double> d_logits;
};

// -log(e^{z_0} / sum_k e^{z_k}) evaluated with a max shift. `logits[0]` is the
// positive; at least one negative is required.
SoftmaxTerm SoftmaxCrossEntropy(std::span<const double> logits);

// Same term from vectors: z = (u . v) / tau.
SoftmaxTerm SampledSoftmaxTerm(const Vector& user, const Vector& positive,
                               std::span<const Vector> negatives, double tau = 1.0);

enum class AlphaMode : uint8_t {
  kIncRec,     // alignment score of the most similar exposed item
  kIncRecOri,  // alignment score of the incremental item itself
  kConstant,   // alpha = 1
};

std::string_view AlphaModeName(AlphaMode mode);
std::optional<AlphaMode> ParseAlphaMode(std::string_view name);

struct ConsistencyWeight {
  double alpha = 1.0;
  ItemId matched = kNoItem;  // exposed item j, kNoItem when none was used
  double raw = 0.0;          // inner product before clamping
  bool fixed = false;        // declared fallback, excluded from normalization
};

// Pre-normalization weight of one ITG item, computed with the single-instance
// forward passes. Empty exposure sets give alpha = 1 (fixed).
ConsistencyWeight ComputeConsistencyWeight(const ModelParams& params,
                                           const ItemCatalog& catalog,
                                           ItemId itg_item,
                                           const RequestContext& ctx,
                                           AlphaMode mode);

// Divides every non-fixed alpha by the mean of the positive ones. If none is
// positive the divisor is 1.
void NormalizeConsistencyWeights(std::span<ConsistencyWeight> weights);

// Everything the losses need to resolve example references.
struct TrainingView {
  std::span<const RequestContext> requests;
  std::span<const SamplePartition> partitions;
  const ItemCatalog* catalog = nullptr;
};

// Batched version for one step's ITG batch, already normalized. Values are
// plain numbers: nothing downstream differentiates through them.
std::vector<ConsistencyWeight> ComputeConsistencyWeights(
    const ModelParams& params, const TrainingView& data,
    std::span<const TrainingExample* const> itg_batch, AlphaMode mode);

struct LossOptions {
  double tau = 1.0;
  double weight_basic = 1.0;
  double weight_inc = 1.0;
  double weight_align = 1.0;
  // Multiplier on ITG terms inside the basic loss (TB-boost).
  double itg_boost = 1.0;
};

struct ExampleDiagnostic {
  SampleGroup group = SampleGroup::kRTG;
  double positive_logit = 0.0;
  double max_negative_logit = 0.0;
  double alpha = 1.0;
  double loss = 0.0;
};

struct LossBreakdown {
  double l_basic = 0.0;
  double l_inc = 0.0;
  double l_align = 0.0;
  double l_total = 0.0;
  double mean_alpha = 0.0;  // over the incremental batch, after normalization
  std::vector<ExampleDiagnostic> diagnostics;
};

struct StepBatch {
  std::span<const TrainingExample* const> basic;        // RTG or ITG
  std::span<const TrainingExample* const> incremental;  // ITG
  std::span<const TrainingExample* const> align;        // ETG
  std::span<const double> alphas;                       // one per incremental
};

// L = w_b L_b + w_inc L_inc + w_align L_align, each a batch mean. The
// incremental term uses the request's RTG items as extra negatives. When
// `grads` is non-null the gradient is accumulated into it.
LossBreakdown TotalLoss(const ModelParams& params, const TrainingView& data,
                        const StepBatch& batch, const LossOptions& options,
                        GradientBuffer* grads);

double LossBasic(const ModelParams& params, const TrainingView& data,
                 std::span<const TrainingExample* const> batch,
                 const LossOptions& options, GradientBuffer* grads);

double LossIncremental(const ModelParams& params, const TrainingView& data,
                       std::span<const TrainingExample* const> batch,
                       std::span<const double> alphas, const LossOptions& options,
                       GradientBuffer* grads);

double LossAlign(const ModelParams& params, const TrainingView& data,
                 std::span<const TrainingExample* const> batch,
                 const LossOptions& options, GradientBuffer* grads);

}  // namespace increc

#endif  // INCREC_LOSSES_H_
