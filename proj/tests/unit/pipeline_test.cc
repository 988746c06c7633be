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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "increc/config.h"
#include "increc/manifest.h"
#include "increc/pipeline.h"
#include "increc/sample_bundle.h"

namespace increc {
namespace {

namespace fs = std::filesystem;

fs::path FreshDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

constexpr const char* kTinyConfig = R"([synth]
n_users = 80
n_items = 400
n_clusters = 6
n_hidden_clusters = 2
homepage_pool = 30
n_days = 4

[samples]
k_base = 40
n_neg = 16

[train]
epochs = 1
batch_size = 256
dim = 8
hidden = 16
feature_dim = 4

[retrieve]
k = 40

[eval]
ks = 10,20

[experiment]
seeds = 1,2
)";

TEST_CASE("config parsing") {
  std::istringstream in(kTinyConfig);
  PipelineConfig c = ParseConfig(in);
  CHECK(c.synth.n_users == 80);
  CHECK(c.eval_ks == std::vector<int>{10, 20});
  CHECK(c.seeds == std::vector<uint64_t>{1, 2});
  CHECK(c.train.lr == PipelineConfig{}.train.lr);

  std::istringstream unknown("[train]\nlearning_rate = 0.1\n");
  CHECK_THROWS_AS(ParseConfig(unknown), InputError);
  std::istringstream bad_value("[train]\nepochs = many\n");
  CHECK_THROWS_AS(ParseConfig(bad_value), InputError);
  std::istringstream inconsistent("[retrieve]\nk = 100\n[eval]\nks = 60\n");
  CHECK_THROWS_AS(ParseConfig(inconsistent), InputError);
  CHECK_THROWS_AS(LoadConfig("/nonexistent/increc.conf"), InputError);

  PipelineConfig d;
  const std::string h = ConfigHash(d);
  CHECK(ConfigHash(LoadConfig(fs::path(INCREC_SOURCE_DIR) / "tools" / "default.conf")) == h);
  CHECK(h.size() == 8);
  SetConfigValue(d, "train.lr", "0.1");
  CHECK(ConfigHash(d) != h);
  for (const auto& [key, value] : ConfigEntries(c)) {
    PipelineConfig e;
    SetConfigValue(e, key, value);
  }
}

TEST_CASE("manifest roundtrip and chain checks") {
  const fs::path dir = FreshDir("increc_manifest_test");
  {
    std::ofstream(dir / "a.txt") << "hello";
  }
  CHECK(Sha256Hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  Manifest m;
  m.stage = "train";
  m.seed = 9;
  m.config = {{"train.lr", "0.05"}};
  RecordFile(m.outputs, dir, dir / "a.txt");
  RecordFile(m.inputs, dir, dir / "a.txt");
  m.timings_ms["total"] = 1.5;
  WriteManifest(m, dir / "manifest.json");
  Manifest back = ReadManifest(dir / "manifest.json");
  CHECK(back.stage == "train");
  CHECK(back.seed == 9);
  CHECK(back.config == m.config);
  CHECK(back.outputs == m.outputs);
  CHECK(back.outputs.count("a.txt") == 1);
  CHECK_NOTHROW(VerifyOutputs(back, dir));
  CHECK_NOTHROW(VerifyInput(back, dir, dir / "a.txt"));
  {
    std::ofstream(dir / "a.txt") << "changed";
  }
  CHECK_THROWS_AS(VerifyOutputs(back, dir), ChainError);
  CHECK_THROWS_AS(VerifyInput(back, dir, dir / "a.txt"), ChainError);
  fs::remove(dir / "a.txt");
  CHECK_THROWS_AS(VerifyOutputs(back, dir), ChainError);
  fs::remove_all(dir);
}

TEST_CASE("tiny pipeline runs end to end and detects tampering") {
  const fs::path dir = FreshDir("increc_pipeline_test");
  std::istringstream in(kTinyConfig);
  PipelineConfig config = ParseConfig(in);
  GridReport grid = RunExperiment(config, dir / "run", 1);
  for (const Variant& v : AllVariants()) {
    for (int k : config.eval_ks) {
      auto inc = grid.Median(v.name, "inc_at_k", k);
      REQUIRE(inc.has_value());
      CHECK((*inc >= 0.0 && *inc <= 1.0));
    }
  }
  CHECK(grid.Median("tb-online", "inc_at_k", 10) == grid.Median("tb-online", "sup_at_k", 10));
  CHECK(fs::exists(dir / "run" / "grid.tsv"));
  CHECK(fs::exists(dir / "run" / "seed-2" / "train-increc" / "checkpoint.bin"));

  const RunLayout layout = RunLayout::Single(dir / "run");
  SampleBundle bundle = ReadSampleBundle(layout.samples / "samples.bin");
  CHECK(bundle.partitions.size() == bundle.requests.size());
  CHECK(!bundle.TestRequests().empty());
  WriteSampleBundle(bundle, dir / "copy.bin");
  CHECK(Sha256File(dir / "copy.bin") == Sha256File(layout.samples / "samples.bin"));

  // Tampering with the bundle breaks the chain for the next stage.
  {
    std::ofstream out(layout.samples / "samples.bin", std::ios::app | std::ios::binary);
    out << 'x';
  }
  PipelineConfig seed_config = config;
  RunLayout seed_layout = layout;
  seed_layout.stages = dir / "run" / "seed-1";
  CHECK_THROWS_AS(RunTrain(seed_config, seed_layout, *FindVariant("increc")), ChainError);
  fs::remove_all(dir);
}

int RunCli(const std::string& args) {
  const std::string cmd = std::string(INCREC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

TEST_CASE("command-line exit codes") {
  const fs::path dir = FreshDir("increc_cli_test");
  {
    std::ofstream(dir / "tiny.conf") << kTinyConfig;
  }
  const std::string conf = "--config " + (dir / "tiny.conf").string();
  const std::string out = "--out " + (dir / "run").string();
  CHECK(RunCli("--help") == 0);
  CHECK(RunCli("") == 2);
  CHECK(RunCli("frobnicate") == 2);
  CHECK(RunCli("train " + conf + " " + out) == 2);
  CHECK(RunCli("synth --config /nonexistent.conf " + out) == 2);
  CHECK(RunCli("build-samples " + conf + " " + out) == 2);
  CHECK(RunCli("synth " + conf + " " + out) == 0);
  CHECK(RunCli("build-samples " + conf + " " + out) == 0);
  CHECK(RunCli("train " + conf + " " + out + " --variant nope") == 2);
  CHECK(RunCli("train " + conf + " " + out + " --variant tb-online") == 0);
  CHECK(RunCli("retrieve " + conf + " " + out + " --variant tb-online") == 0);
  CHECK(RunCli("train " + conf + " " + out + " --variant increc-na") == 0);
  CHECK(RunCli("retrieve " + conf + " " + out + " --variant increc-na") == 0);
  CHECK(RunCli("eval " + conf + " " + out + " --variant increc-na") == 0);
  CHECK(RunCli("retrieve " + conf + " " + out + " --variant increc-na --mode approx") == 0);
  CHECK(RunCli("retrieve " + conf + " " + out + " --variant increc-na --mode fuzzy") == 2);
  CHECK(fs::exists(dir / "run" / "eval-increc-na" / "report.tsv"));

  {
    std::ofstream o(dir / "run" / "train-increc-na" / "checkpoint.bin",
                    std::ios::app | std::ios::binary);
    o << 'x';
  }
  CHECK(RunCli("retrieve " + conf + " " + out + " --variant increc-na") == 1);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace increc
