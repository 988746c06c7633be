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
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "increc/model.h"
#include "test_support.h"

namespace increc {
namespace {

using testing::CheckGradients;
using testing::MakeTinyWorld;

// sum(output .* weights) for a fixed random weight matrix.
double Project(const Matrix& output, const Matrix& weights) {
  return output.cwiseProduct(weights).sum();
}

TEST_CASE("tapes match the single-instance forward passes") {
  auto w = MakeTinyWorld(2);
  ModelParams params = InitParams(w.config, 17);
  std::vector<ItemId> items{0, 3, 3, 19, 7};
  ItemTowerTape item_tape;
  item_tape.Forward(params, w.catalog, items);
  for (size_t r = 0; r < items.size(); ++r) {
    Vector want = ItemForward(params, w.catalog, items[r]);
    CHECK((item_tape.output().row(r).transpose() - want).cwiseAbs().maxCoeff() < 1e-12);
  }
  std::vector<const RequestContext*> reqs;
  for (const RequestContext& ctx : w.requests) reqs.push_back(&ctx);
  for (Tower t : {Tower::kBasic, Tower::kIncremental, Tower::kAlign}) {
    UserTowerTape user_tape;
    user_tape.Forward(params, t, reqs);
    for (size_t r = 0; r < reqs.size(); ++r) {
      Vector want = UserForward(params, t, *reqs[r]);
      CHECK((user_tape.output().row(r).transpose() - want).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("towers differ and are deterministic in the seed") {
  auto w = MakeTinyWorld(3);
  ModelParams a = InitParams(w.config, 5);
  ModelParams b = InitParams(w.config, 5);
  ModelParams c = InitParams(w.config, 6);
  auto ba = ParamBlocks(a), bb = ParamBlocks(b), bc = ParamBlocks(c);
  bool any_diff = false;
  for (size_t k = 0; k < ba.size(); ++k) {
    CHECK(std::equal(ba[k].data, ba[k].data + ba[k].size(), bb[k].data));
    any_diff = any_diff || !std::equal(ba[k].data, ba[k].data + ba[k].size(), bc[k].data);
  }
  CHECK(any_diff);
  const RequestContext& ctx = w.requests[1];
  CHECK((UserForward(a, Tower::kBasic, ctx) - UserForward(a, Tower::kAlign, ctx)).norm() > 0);
}

TEST_CASE("item tape backward matches finite differences") {
  auto w = MakeTinyWorld(4);
  ModelParams params = InitParams(w.config, 9);
  std::vector<ItemId> items{1, 2, 2, 11};
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Matrix weights(items.size(), w.config.dim);
  for (Eigen::Index k = 0; k < weights.size(); ++k) weights.data()[k] = g(rng);

  auto loss = [&](const ModelParams& p) {
    ItemTowerTape tape;
    tape.Forward(p, w.catalog, items);
    return Project(tape.output(), weights);
  };
  ItemTowerTape tape;
  tape.Forward(params, w.catalog, items);
  GradientBuffer grads(params);
  tape.Backward(params, weights, &grads);
  auto r = CheckGradients(params, grads, loss);
  CHECK_MESSAGE(r.max_rel_error < 1e-6, r.worst);
  CHECK(r.checked > 0);
  CHECK(grads.HasEntry(0, 2));
  CHECK(!grads.HasEntry(0, 3));
  CHECK(grads.user_tower(Tower::kBasic).touched == false);
}

TEST_CASE("user tape backward matches finite differences") {
  auto w = MakeTinyWorld(5);
  ModelParams params = InitParams(w.config, 10);
  std::vector<const RequestContext*> reqs;
  for (const RequestContext& ctx : w.requests) reqs.push_back(&ctx);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  Matrix weights(reqs.size(), w.config.dim);
  for (Eigen::Index k = 0; k < weights.size(); ++k) weights.data()[k] = g(rng);
  for (Tower t : {Tower::kBasic, Tower::kIncremental, Tower::kAlign}) {
    auto loss = [&](const ModelParams& p) {
      UserTowerTape tape;
      tape.Forward(p, t, reqs);
      return Project(tape.output(), weights);
    };
    UserTowerTape tape;
    tape.Forward(params, t, reqs);
    GradientBuffer grads(params);
    tape.Backward(params, weights, &grads);
    auto r = CheckGradients(params, grads, loss);
    CHECK_MESSAGE(r.max_rel_error < 1e-6, r.worst);
    for (int other = 0; other < kNumUserTowers; ++other) {
      CHECK(grads.user_towers[other].touched == (other == static_cast<int>(t)));
    }
  }
}

TEST_CASE("gradient buffer bookkeeping") {
  auto w = MakeTinyWorld(6);
  ModelParams params = InitParams(w.config, 1);
  GradientBuffer a(params);
  CHECK(a.IsZero());
  CHECK(a.AllFinite());
  a.item_embedding.Row(4)[0] = 2.0;
  GradientBuffer b(params);
  b.item_embedding.Row(4)[0] = 1.0;
  b.item_embedding.Row(7)[1] = -1.0;
  a.Add(b);
  CHECK(a.item_embedding.dense()(4, 0) == 3.0);
  CHECK(a.item_embedding.dense()(7, 1) == -1.0);
  CHECK(a.HasEntry(0, 7));
  CHECK(a.Blocks().size() == ParamBlocks(params).size());
  a.brand_embedding.Row(0)[0] = std::nan("");
  CHECK(!a.AllFinite());
  a.Clear();
  CHECK(a.IsZero());
  CHECK(!a.HasEntry(0, 4));
}

TEST_CASE("checkpoint roundtrip and shape checks") {
  auto w = MakeTinyWorld(7);
  ModelParams params = InitParams(w.config, 3);
  const auto dir = std::filesystem::temp_directory_path() / "increc_model_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "ck.bin";
  SaveCheckpoint(params, path);
  ModelParams back = LoadCheckpoint(path, &w.config);
  CHECK(back.config == params.config);
  auto pa = ParamBlocks(params), pb = ParamBlocks(back);
  REQUIRE(pa.size() == pb.size());
  for (size_t k = 0; k < pa.size(); ++k) {
    CHECK(pa[k].name == pb[k].name);
    CHECK(std::equal(pa[k].data, pa[k].data + pa[k].size(), pb[k].data));
  }

  ModelConfig other = w.config;
  other.dim = 8;
  CHECK_THROWS_AS(LoadCheckpoint(path, &other), InputError);

  {
    std::ofstream out(dir / "bad.bin", std::ios::binary);
    out << "NOTACKPT";
  }
  CHECK_THROWS_AS(LoadCheckpoint(dir / "bad.bin"), InputError);
  const auto size = std::filesystem::file_size(path);
  std::filesystem::copy_file(path, dir / "short.bin",
                             std::filesystem::copy_options::overwrite_existing);
  std::filesystem::resize_file(dir / "short.bin", size - 8);
  CHECK_THROWS_AS(LoadCheckpoint(dir / "short.bin"), InputError);
  CHECK_THROWS_AS(LoadCheckpoint(dir / "missing.bin"), InputError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("initialization bounds") {
  ModelConfig c;
  c.num_items = 1000;
  c.profile_vocab = {3};
  ModelParams p = InitParams(c, 1);
  CHECK(p.item_embedding.rows() == 1000);
  CHECK(p.item_embedding.cols() == 64);
  CHECK(p.item_embedding.cwiseAbs().maxCoeff() < 1.0 / 8.0);
  CHECK(p.user_tower(Tower::kBasic).b1.isZero());
  const Mlp& m = p.user_tower(Tower::kAlign);
  const double glorot = std::sqrt(6.0 / static_cast<double>(m.w1.rows() + m.w1.cols()));
  CHECK(m.w1.cwiseAbs().maxCoeff() <= glorot);
}

TEST_CASE("out-of-vocabulary ids are rejected") {
  auto w = MakeTinyWorld(8);
  ModelParams params = InitParams(w.config, 1);
  RequestContext ctx = w.requests[0];
  ctx.behaviors.push_back({static_cast<ItemId>(w.config.num_items), 0, 0});
  CHECK_THROWS_AS(UserForward(params, Tower::kBasic, ctx), InputError);
  RequestContext bad_profile = w.requests[0];
  bad_profile.profile[0] = 99;
  CHECK_THROWS_AS(UserForward(params, Tower::kBasic, bad_profile), InputError);
  CHECK_THROWS_AS(ItemForward(params, w.catalog, -1), InputError);
}

TEST_CASE("model config validation") {
  ModelConfig c;
  c.num_items = 10;
  c.profile_vocab = {2};
  CHECK_NOTHROW(c.Validate());
  c.dim = 0;
  CHECK_THROWS_AS(c.Validate(), InputError);
  c.dim = 4;
  c.profile_vocab = {0};
  CHECK_THROWS_AS(c.Validate(), InputError);
  CHECK(ParseTower("incremental") == Tower::kIncremental);
  CHECK(!ParseTower("nope").has_value());
}

}  // namespace
}  // namespace increc
