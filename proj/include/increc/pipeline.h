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

// Pipeline stages behind the command-line tool and the ablation grid.
//
// A run directory holds data/ (logs), samples/ (sample bundle), and one
// train-<variant>/, retrieve-<variant>/ and eval-<variant>/ directory per
// variant. Each stage writes manifest.json next to its artifacts and checks
// the manifests of the stages it reads from.

#ifndef INCREC_PIPELINE_H_
#define INCREC_PIPELINE_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "increc/config.h"
#include "increc/eval.h"
#include "increc/manifest.h"
#include "increc/model.h"
#include "increc/trainer.h"

namespace increc {

struct RunLayout {
  std::filesystem::path root;     // manifest paths are relative to this
  std::filesystem::path data;
  std::filesystem::path samples;
  std::filesystem::path stages;   // parent of train-*, retrieve-*, eval-*

  static RunLayout Single(const std::filesystem::path& root);

  std::filesystem::path TrainDir(std::string_view variant) const;
  std::filesystem::path RetrieveDir(std::string_view variant) const;
  std::filesystem::path EvalDir(std::string_view variant) const;
  // retrieve-<variant>/<tower>.tsv
  std::filesystem::path DumpPath(std::string_view variant, Tower tower) const;
};

// Default run directory: runs/<config hash>-s<seed>.
std::filesystem::path DefaultRunDir(const PipelineConfig& config, uint64_t seed);

// Generator output in layout.data, seeded by config.synth.seed.
void RunSynth(const PipelineConfig& config, const RunLayout& layout);

// Reads the logs in `input` (default layout.data) and writes
// samples/samples.bin and samples/partitions.tsv. Seeded by
// config.sample_seed. Each user's last request is held out for evaluation.
void RunBuildSamples(const PipelineConfig& config, const RunLayout& layout,
                     const std::optional<std::filesystem::path>& input = std::nullopt);

// checkpoint.bin and loss.tsv in train-<variant>/. Seeded by
// config.train.seed.
void RunTrain(const PipelineConfig& config, const RunLayout& layout, const Variant& variant);

// Top-k lists for every held-out request in retrieve-<variant>/<tower>.tsv.
void RunRetrieve(const PipelineConfig& config, const RunLayout& layout, const Variant& variant,
                 Tower tower, int k, SearchMode mode);

// Scores the variant's `tower` dump against the base variant's basic-tower
// dump. Writes report.tsv and report.txt in eval-<variant>/.
EvalReport RunEval(const PipelineConfig& config, const RunLayout& layout, const Variant& variant,
                   Tower tower, const Variant& base);

struct GridRow {
  std::string seed;  // decimal seed, or "median"
  std::string variant;
  std::string metric;
  int k = 0;
  double value = 0.0;
  size_t n_users = 0;
};

struct GridReport {
  std::vector<GridRow> rows;

  // Median over seeds, or nullopt if absent.
  std::optional<double> Median(std::string_view variant, std::string_view metric, int k) const;
};

// synth (unless `input` is given), build-samples, then train + retrieve for
// every (seed, variant) on `threads` workers, then eval. Writes grid.tsv and
// grid.txt under `root`. Every job is single-threaded, so artifacts do not
// depend on `threads`.
GridReport RunExperiment(const PipelineConfig& config, const std::filesystem::path& root,
                         int threads,
                         const std::optional<std::filesystem::path>& input = std::nullopt);

void WriteGridRecords(std::ostream& out, const GridReport& grid);
void WriteGridTable(std::ostream& out, const GridReport& grid, const PipelineConfig& config);

}  // namespace increc

#endif  // INCREC_PIPELINE_H_
