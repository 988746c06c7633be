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

// Pipeline configuration: one INI-style file with [synth], [samples],
// [train], [retrieve], [eval] and [experiment] sections. Every key has a
// default; unknown keys are rejected.

#ifndef INCREC_CONFIG_H_
#define INCREC_CONFIG_H_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "increc/eval.h"
#include "increc/retrieval.h"
#include "increc/sample_builder.h"
#include "increc/synth.h"
#include "increc/trainer.h"

namespace increc {

struct PipelineConfig {
  SynthConfig synth;
  RequestOptions requests;
  I2IOptions i2i;
  SampleOptions samples;
  uint64_t sample_seed = 7;
  TrainConfig train;
  int retrieve_k = 200;
  SearchMode search = SearchMode::kExact;
  HnswOptions hnsw;
  std::vector<int> eval_ks = {50, 100};
  Aggregation aggregation = Aggregation::kMean;
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<std::string> variants = {"tb-online", "tb-itg",     "tb-boost",
                                       "increc-na", "increc-ori", "increc"};
  std::string base_variant = "tb-online";

  // Throws InputError on inconsistent values.
  void Validate() const;
};

// Canonical `section.key`, value pairs in a fixed order.
std::vector<std::pair<std::string, std::string>> ConfigEntries(const PipelineConfig& config);

// Sets one `section.key`. Throws InputError for unknown keys or bad values.
void SetConfigValue(PipelineConfig& config, const std::string& key, const std::string& value);

PipelineConfig ParseConfig(std::istream& in);
PipelineConfig LoadConfig(const std::filesystem::path& path);

// First 8 hex digits of the SHA-256 of the canonical entries.
std::string ConfigHash(const PipelineConfig& config);

}  // namespace increc

#endif  // INCREC_CONFIG_H_
