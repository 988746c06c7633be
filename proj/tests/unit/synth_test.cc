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

#include <filesystem>
#include <set>

#include "doctest.h"
#include "increc/config.h"
#include "increc/manifest.h"
#include "increc/pipeline.h"
#include "increc/sample_bundle.h"
#include "increc/synth.h"

namespace increc {
namespace {

namespace fs = std::filesystem;

SynthConfig SmallSynth(uint64_t seed) {
  SynthConfig c;
  c.n_users = 150;
  c.n_items = 600;
  c.n_clusters = 8;
  c.n_hidden_clusters = 2;
  c.homepage_pool = 40;
  c.n_days = 5;
  c.seed = seed;
  return c;
}

TEST_CASE("generator output is deterministic in the seed") {
  SynthData a = Generate(SmallSynth(3));
  SynthData b = Generate(SmallSynth(3));
  SynthData c = Generate(SmallSynth(4));
  REQUIRE(a.events.size() == b.events.size());
  bool same = true;
  for (size_t k = 0; k < a.events.size(); ++k) {
    const SynthEvent &x = a.events[k], &y = b.events[k];
    same = same && x.user == y.user && x.item == y.item && x.time == y.time && x.kind == y.kind &&
           x.scenario == y.scenario;
  }
  CHECK(same);
  CHECK(a.user_attrs == b.user_attrs);
  CHECK((a.events.size() != c.events.size() || a.user_attrs != c.user_attrs));

  const fs::path dir = fs::temp_directory_path() / "increc_synth_test";
  fs::remove_all(dir);
  WriteSynthFiles(a, dir / "a");
  WriteSynthFiles(b, dir / "b");
  for (const char* name : {"events.tsv", "user_attrs.tsv", "item_features.tsv",
                           "item_clusters.tsv", "user_clusters.tsv"}) {
    CHECK(Sha256File(dir / "a" / name) == Sha256File(dir / "b" / name));
  }
  fs::remove_all(dir);
}

TEST_CASE("generated events respect the world structure") {
  SynthConfig cfg = SmallSynth(5);
  SynthData d = Generate(cfg);
  CHECK(d.item_cluster.size() == static_cast<size_t>(cfg.n_items));
  CHECK(d.user_hidden.size() == static_cast<size_t>(cfg.n_users));
  int64_t prev_user = -1;
  Timestamp prev_time = 0;
  size_t cross_orders = 0, hidden_cross = 0, exposures = 0, visible_exposures = 0;
  for (const SynthEvent& e : d.events) {
    if (e.user == prev_user) CHECK(e.time >= prev_time);
    prev_user = e.user;
    prev_time = e.time;
    CHECK((e.scenario >= 0 && e.scenario < cfg.n_scenarios));
    if (e.kind == EventKind::kRequest) {
      CHECK(e.scenario == 0);
      continue;
    }
    REQUIRE((e.item >= 1 && e.item <= cfg.n_items));
    const int cluster = d.item_cluster[e.item - 1];
    if (e.kind == EventKind::kExposure) {
      CHECK(e.scenario == 0);
      ++exposures;
      const auto& vis = d.user_visible[e.user - 1];
      visible_exposures += cluster == vis[0] || cluster == vis[1];
      CHECK(vis[0] < cfg.n_clusters - cfg.n_hidden_clusters);
    }
    if (e.kind == EventKind::kOrder && e.scenario != 0) {
      ++cross_orders;
      hidden_cross += cluster == d.user_hidden[e.user - 1];
    }
  }
  REQUIRE(cross_orders > 100);
  const double frac = static_cast<double>(hidden_cross) / static_cast<double>(cross_orders);
  CHECK(frac > cfg.p_cross - 0.1);
  CHECK(visible_exposures > exposures / 2);
}

TEST_CASE("generator validation") {
  auto bad = [](auto mutate) {
    SynthConfig c = SmallSynth(1);
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(Generate(bad([](SynthConfig& c) { c.n_users = 0; })), InputError);
  CHECK_THROWS_AS(Generate(bad([](SynthConfig& c) { c.p_cross = 1.5; })), InputError);
  CHECK_THROWS_AS(Generate(bad([](SynthConfig& c) { c.n_scenarios = 1; })), InputError);
  CHECK_THROWS_AS(Generate(bad([](SynthConfig& c) { c.n_hidden_clusters = 7; })), InputError);
  CHECK_THROWS_AS(Generate(bad([](SynthConfig& c) { c.homepage_pool = 2; })), InputError);
  CHECK_THROWS_AS(Generate(bad([](SynthConfig& c) { c.exposure_noise = -1; })), InputError);
  CHECK_THROWS_AS(Generate(bad([](SynthConfig& c) { c.horizon = kHourMs; })), InputError);
}

double ItgShare(const SampleBundle& bundle) {
  size_t rtg = 0, itg = 0;
  for (const SamplePartition& p : bundle.partitions) {
    rtg += p.rtg.size();
    itg += p.itg.size();
  }
  return static_cast<double>(itg) / static_cast<double>(rtg + itg);
}

TEST_CASE("incremental share grows with cross-scenario intent") {
  const fs::path dir = fs::temp_directory_path() / "increc_share_test";
  fs::remove_all(dir);
  std::vector<double> shares;
  for (double p : {0.0, 0.4, 0.8}) {
    PipelineConfig config;
    config.synth = SmallSynth(2);
    config.synth.p_cross = p;
    config.samples.k_base = 60;
    const RunLayout layout = RunLayout::Single(dir / std::to_string(shares.size()));
    RunSynth(config, layout);
    RunBuildSamples(config, layout);
    shares.push_back(ItgShare(ReadSampleBundle(layout.samples / "samples.bin")));
  }
  CHECK(shares[0] < shares[1]);
  CHECK(shares[1] < shares[2]);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace increc
