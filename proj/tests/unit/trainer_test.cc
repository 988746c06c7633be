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

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "increc/trainer.h"
#include "test_support.h"

namespace increc {
namespace {

using testing::MakeTinyWorld;

TEST_CASE("AdaGrad follows the hand-computed trajectory") {
  auto w = MakeTinyWorld(31);
  ModelParams params = InitParams(w.config, 1);
  const double w0 = params.item_embedding(2, 1);
  const double b0 = params.user_tower(Tower::kAlign).b2[0];
  AdaGradState state(params, 0.1, 1e-8);
  GradientBuffer g(params);

  double w_expect = w0, accum = 0.0;
  for (double grad : {0.5, -1.0, 2.0}) {
    g.Clear();
    g.item_embedding.Row(2)[1] = grad;
    AdaGradStep(params, state, g);
    accum += grad * grad;
    w_expect -= 0.1 * grad / (std::sqrt(accum) + 1e-8);
    CHECK(std::abs(params.item_embedding(2, 1) - w_expect) < 1e-15);
  }
  // 0.5 -> w - 0.1; -1 -> + 0.1 / sqrt(1.25) * 1; 2 -> - 0.2 / sqrt(5.25)
  const double hand = w0 - 0.1 + 0.1 / std::sqrt(1.25) - 0.2 / std::sqrt(5.25);
  CHECK(std::abs(params.item_embedding(2, 1) - hand) < 1e-7);
  CHECK(state.accum.item_embedding(2, 1) == doctest::Approx(5.25));
  CHECK(params.user_tower(Tower::kAlign).b2[0] == b0);
  CHECK(state.step == 3);
}

TEST_CASE("AdaGrad rejects non-finite and mismatched gradients") {
  auto w = MakeTinyWorld(32);
  ModelParams params = InitParams(w.config, 1);
  AdaGradState state(params);
  GradientBuffer g(params);
  g.item_embedding.Row(0)[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(AdaGradStep(params, state, g), InputError);

  auto other = MakeTinyWorld(32, 20, 6);
  GradientBuffer wrong(InitParams(other.config, 1));
  CHECK_THROWS_AS(AdaGradStep(params, state, wrong), InputError);
}

TrainConfig SmallConfig(Ablation a, AlphaMode alpha = AlphaMode::kIncRec) {
  TrainConfig c;
  c.epochs = 3;
  c.batch_size = 4;
  c.ablation = a;
  c.alpha = alpha;
  c.seed = 11;
  return c;
}

bool SameParams(ModelParams a, ModelParams b) {
  auto pa = ParamBlocks(a), pb = ParamBlocks(b);
  for (size_t k = 0; k < pa.size(); ++k) {
    if (!std::equal(pa[k].data, pa[k].data + pa[k].size(), pb[k].data)) return false;
  }
  return true;
}

TEST_CASE("training is deterministic for a seed") {
  auto w = MakeTinyWorld(33, 30, 4, 8, 2, 12);
  for (const Variant& v : AllVariants()) {
    TrainConfig c = SmallConfig(v.ablation, v.alpha);
    TrainResult a = Train(w.view(), w.examples, w.config, c);
    TrainResult b = Train(w.view(), w.examples, w.config, c);
    CHECK(SameParams(a.params, b.params));
    std::ostringstream sa, sb;
    WriteStepRecords(sa, a.steps);
    WriteStepRecords(sb, b.steps);
    CHECK(sa.str() == sb.str());
    for (const StepRecord& r : a.steps) CHECK(std::isfinite(r.l_total));
  }
}

TEST_CASE("variants touch only their towers") {
  auto w = MakeTinyWorld(34, 30, 4, 8, 2, 12);
  ModelParams init = InitParams(w.config, 11);
  auto tower_changed = [&](const TrainResult& r, Tower t) {
    const Mlp& a = init.user_tower(t);
    const Mlp& b = r.params.user_tower(t);
    return a.w1 != b.w1 || a.w2 != b.w2;
  };
  TrainResult online = Train(w.view(), w.examples, w.config, SmallConfig(Ablation::kTbOnline));
  CHECK(tower_changed(online, Tower::kBasic));
  CHECK(!tower_changed(online, Tower::kIncremental));
  CHECK(!tower_changed(online, Tower::kAlign));
  for (const StepRecord& s : online.steps) CHECK(s.l_inc == 0.0);

  TrainResult na = Train(w.view(), w.examples, w.config, SmallConfig(Ablation::kNoAlign));
  CHECK(tower_changed(na, Tower::kIncremental));
  CHECK(!tower_changed(na, Tower::kAlign));
  for (const StepRecord& s : na.steps) CHECK(s.mean_alpha == 1.0);

  TrainResult full = Train(w.view(), w.examples, w.config, SmallConfig(Ablation::kFull));
  CHECK(tower_changed(full, Tower::kAlign));
  CHECK(!SameParams(full.params, na.params));
}

TEST_CASE("training loss decreases on a learnable world") {
  auto w = MakeTinyWorld(35, 30, 4, 8, 2, 12);
  TrainConfig c = SmallConfig(Ablation::kTbOnline);
  c.epochs = 60;
  c.batch_size = 1000;
  c.lr = 0.1;
  TrainResult r = Train(w.view(), w.examples, w.config, c);
  CHECK(r.steps.back().l_basic < 0.8 * r.steps.front().l_basic);
}

TEST_CASE("training input errors") {
  auto w = MakeTinyWorld(36);
  TrainConfig c = SmallConfig(Ablation::kFull);
  c.batch_size = 0;
  CHECK_THROWS_AS(Train(w.view(), w.examples, w.config, c), InputError);
  std::vector<TrainingExample> no_etg;
  for (const TrainingExample& ex : w.examples) {
    if (ex.group != SampleGroup::kETG) no_etg.push_back(ex);
  }
  CHECK_THROWS_AS(Train(w.view(), no_etg, w.config, SmallConfig(Ablation::kFull)), InputError);
  CHECK_NOTHROW(Train(w.view(), no_etg, w.config, SmallConfig(Ablation::kNoAlign)));
  CHECK(FindVariant("increc-ori")->alpha == AlphaMode::kIncRecOri);
  CHECK(!FindVariant("increc-xx").has_value());
  CHECK(AllVariants().size() == 6);
}

}  // namespace
}  // namespace increc
