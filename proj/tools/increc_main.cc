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

// Command-line driver: synth, build-samples, train, retrieve, eval and
// experiment.
//
// Exit codes: 0 success, 1 internal invariant or manifest chain failure,
// 2 missing input, bad flags or bad configuration.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "increc/config.h"
#include "increc/pipeline.h"

namespace {

using increc::PipelineConfig;
namespace fs = std::filesystem;

struct CommonFlags {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::string out;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
};

void AddCommon(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "Configuration file (defaults built in)");
  cmd->add_option("--seed", flags.seed, "Seed override for this stage");
  cmd->add_option("--out", flags.out, "Run directory (default runs/<config hash>-s<seed>)");
  cmd->add_option("--threads", flags.threads, "Worker threads")->check(CLI::PositiveNumber);
}

PipelineConfig LoadOrDefault(const CommonFlags& flags) {
  if (flags.config_path.empty()) return PipelineConfig{};
  return increc::LoadConfig(flags.config_path);
}

fs::path RunRoot(const CommonFlags& flags, const PipelineConfig& config) {
  if (!flags.out.empty()) return flags.out;
  return increc::DefaultRunDir(config, flags.seed.value_or(config.train.seed));
}

increc::Variant RequireVariant(const std::string& name) {
  auto v = increc::FindVariant(name);
  if (!v) throw increc::InputError("unknown variant " + name);
  return *v;
}

increc::Tower TowerOr(const std::string& name, increc::Tower fallback) {
  if (name.empty()) return fallback;
  auto t = increc::ParseTower(name);
  if (!t) throw increc::InputError("unknown tower " + name + " (basic, incremental, align)");
  return *t;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Incremental-sample retrieval: data synthesis, training and evaluation"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string variant_name;
  std::string tower_name;
  std::string base_name;
  std::string mode_name;
  std::optional<int> k;
  std::string input_dir;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic log into <run>/data");
  AddCommon(synth, flags);

  auto* samples = app.add_subcommand("build-samples",
                                     "Simulate the baseline, partition targets, build examples");
  AddCommon(samples, flags);
  samples->add_option("--input", input_dir, "Log directory (default <run>/data)");

  auto* train = app.add_subcommand("train", "Train one variant");
  AddCommon(train, flags);
  train->add_option("--variant", variant_name, "tb-online, tb-itg, tb-boost, increc-na, "
                                               "increc-ori or increc")
      ->required();

  auto* retrieve = app.add_subcommand("retrieve", "Top-K retrieval for held-out requests");
  AddCommon(retrieve, flags);
  retrieve->add_option("--variant", variant_name, "Trained variant")->required();
  retrieve->add_option("--tower", tower_name, "basic, incremental or align "
                                              "(default: the variant's serving tower)");
  retrieve->add_option("--k", k, "List length")->check(CLI::PositiveNumber);
  retrieve->add_option("--mode", mode_name, "exact or approx");

  auto* eval = app.add_subcommand("eval", "Base/Sup/Inc@K and exposure hitrate");
  AddCommon(eval, flags);
  eval->add_option("--variant", variant_name, "Variant under test")->required();
  eval->add_option("--tower", tower_name, "Tower whose dump is scored");
  eval->add_option("--base", base_name, "Base variant (default from config)");
  eval->add_option("--k", k, "Evaluate a single K")->check(CLI::PositiveNumber);

  auto* experiment = app.add_subcommand("experiment", "Full ablation grid");
  AddCommon(experiment, flags);
  experiment->add_option("--input", input_dir, "Use this log directory instead of synth");
  experiment->add_option("--k", k, "Evaluate a single K")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    PipelineConfig config = LoadOrDefault(flags);
    if (k && (eval->parsed() || experiment->parsed())) {
      config.eval_ks = {*k};
      config.retrieve_k = std::max(config.retrieve_k, 2 * *k);
    }
    if (!mode_name.empty()) {
      increc::SetConfigValue(config, "retrieve.mode", mode_name);
    }
    const fs::path root = RunRoot(flags, config);
    const increc::RunLayout layout = increc::RunLayout::Single(root);
    std::optional<fs::path> input;
    if (!input_dir.empty()) input = input_dir;

    if (synth->parsed()) {
      if (flags.seed) config.synth.seed = *flags.seed;
      increc::RunSynth(config, layout);
    } else if (samples->parsed()) {
      if (flags.seed) config.sample_seed = *flags.seed;
      increc::RunBuildSamples(config, layout, input);
    } else if (train->parsed()) {
      if (flags.seed) config.train.seed = *flags.seed;
      increc::RunTrain(config, layout, RequireVariant(variant_name));
    } else if (retrieve->parsed()) {
      if (flags.seed) config.train.seed = *flags.seed;
      const increc::Variant v = RequireVariant(variant_name);
      increc::RunRetrieve(config, layout, v, TowerOr(tower_name, v.serving_tower),
                          k.value_or(config.retrieve_k), config.search);
    } else if (eval->parsed()) {
      if (flags.seed) config.train.seed = *flags.seed;
      config.Validate();
      const increc::Variant v = RequireVariant(variant_name);
      const increc::Variant base =
          RequireVariant(base_name.empty() ? config.base_variant : base_name);
      auto report = increc::RunEval(config, layout, v, TowerOr(tower_name, v.serving_tower), base);
      increc::WriteReportTable(std::cout, report);
    } else if (experiment->parsed()) {
      if (flags.seed) config.seeds = {*flags.seed};
      config.Validate();
      auto grid = increc::RunExperiment(config, root, flags.threads, input);
      increc::WriteGridTable(std::cout, grid, config);
    }
  } catch (const increc::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
