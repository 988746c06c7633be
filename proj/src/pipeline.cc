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

#include "increc/pipeline.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "increc/event_log.h"
#include "increc/retrieval.h"
#include "increc/sample_builder.h"
#include "increc/sample_bundle.h"
#include "increc/synth.h"

namespace increc {
namespace fs = std::filesystem;

namespace {

std::mutex log_mutex;

void Log(const std::string& stage, const std::string& message) {
  std::lock_guard<std::mutex> lock(log_mutex);
  std::cerr << "[" << stage << "] " << message << '\n';
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::ofstream OpenOut(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

Manifest NewManifest(const char* stage, const PipelineConfig& config, uint64_t seed) {
  Manifest m;
  m.stage = stage;
  m.seed = seed;
  m.config = ConfigEntries(config);
  return m;
}

fs::path ManifestPath(const fs::path& dir) { return dir / "manifest.json"; }

fs::path BundlePath(const RunLayout& layout) { return layout.samples / "samples.bin"; }

// Reads the sample bundle after checking it against its manifest.
SampleBundle LoadVerifiedBundle(const RunLayout& layout) {
  const fs::path bundle = BundlePath(layout);
  if (!fs::exists(bundle)) throw InputError("missing sample bundle " + bundle.string());
  VerifyOutputs(ReadManifest(ManifestPath(layout.samples)), layout.root);
  return ReadSampleBundle(bundle);
}

ModelConfig ModelConfigFor(const SampleBundle& bundle, const TrainConfig& train) {
  ModelConfig c;
  c.dim = train.dim;
  c.hidden = train.hidden;
  c.feature_dim = train.feature_dim;
  c.num_items = bundle.num_items();
  c.num_categories = bundle.catalog.num_categories;
  c.num_brands = bundle.catalog.num_brands;
  c.profile_vocab.assign(bundle.profile_vocab.begin(), bundle.profile_vocab.end());
  return c;
}

std::string Fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// Ranked dense item ids per held-out request, in TestRequests() order.
std::vector<ItemList> LoadDump(const RunLayout& layout, const SampleBundle& bundle,
                               std::string_view variant, Tower tower) {
  const fs::path dump = layout.DumpPath(variant, tower);
  if (!fs::exists(dump)) throw InputError("missing retrieval dump " + dump.string());
  const fs::path manifest = ManifestPath(layout.RetrieveDir(variant));
  if (!fs::exists(manifest)) throw InputError("missing retrieval manifest " + manifest.string());
  const Manifest m = ReadManifest(manifest);
  VerifyOutputs(m, layout.root);
  if (!m.outputs.count(fs::relative(dump, layout.root).generic_string())) {
    throw ChainError("manifest chain mismatch: " + dump.string() +
                     " is not recorded by its retrieval manifest");
  }
  VerifyInput(m, layout.root, BundlePath(layout));

  std::ifstream in(dump);
  auto raw_lists = ReadRetrievalDump(in);
  std::unordered_map<int64_t, ItemId> item_index;
  for (size_t i = 0; i < bundle.raw_items.size(); ++i) {
    item_index[bundle.raw_items[i]] = static_cast<ItemId>(i);
  }
  std::vector<ItemList> lists;
  for (size_t r : bundle.TestRequests()) {
    const int64_t raw_user = bundle.raw_users[bundle.requests[r].user];
    auto it = raw_lists.find(raw_user);
    if (it == raw_lists.end()) {
      throw InputError(dump.string() + " has no list for user " + std::to_string(raw_user));
    }
    ItemList list;
    for (int64_t raw : it->second) {
      auto found = item_index.find(raw);
      if (found == item_index.end()) {
        throw InputError(dump.string() + " names unknown item " + std::to_string(raw));
      }
      list.push_back(found->second);
    }
    lists.push_back(std::move(list));
  }
  return lists;
}

}  // namespace

RunLayout RunLayout::Single(const fs::path& root) {
  return {root, root / "data", root / "samples", root};
}

fs::path RunLayout::TrainDir(std::string_view variant) const {
  return stages / ("train-" + std::string(variant));
}
fs::path RunLayout::RetrieveDir(std::string_view variant) const {
  return stages / ("retrieve-" + std::string(variant));
}
fs::path RunLayout::EvalDir(std::string_view variant) const {
  return stages / ("eval-" + std::string(variant));
}
fs::path RunLayout::DumpPath(std::string_view variant, Tower tower) const {
  return RetrieveDir(variant) / (std::string(TowerName(tower)) + ".tsv");
}

fs::path DefaultRunDir(const PipelineConfig& config, uint64_t seed) {
  return fs::path("runs") / (ConfigHash(config) + "-s" + std::to_string(seed));
}

void RunSynth(const PipelineConfig& config, const RunLayout& layout) {
  Stopwatch watch;
  SynthData data = Generate(config.synth);
  WriteSynthFiles(data, layout.data);
  Manifest m = NewManifest("synth", config, config.synth.seed);
  for (const char* name : {"events.tsv", "user_attrs.tsv", "item_features.tsv",
                           "item_clusters.tsv", "user_clusters.tsv"}) {
    RecordFile(m.outputs, layout.root, layout.data / name);
  }
  m.timings_ms["total"] = watch.ms();
  WriteManifest(m, ManifestPath(layout.data));
  Log("synth", std::to_string(data.events.size()) + " events for " +
                   std::to_string(config.synth.n_users) + " users in " + layout.data.string());
}

void RunBuildSamples(const PipelineConfig& config, const RunLayout& layout,
                     const std::optional<fs::path>& input) {
  Stopwatch watch;
  const fs::path dir = input.value_or(layout.data);
  const fs::path events = dir / "events.tsv";
  if (!fs::exists(events)) throw InputError("missing event log " + events.string());
  if (!input && fs::exists(ManifestPath(dir))) {
    VerifyOutputs(ReadManifest(ManifestPath(dir)), layout.root);
  }

  Manifest m = NewManifest("build-samples", config, config.sample_seed);
  const EventLog log = ReadEventLog(events);
  RecordFile(m.inputs, layout.root, events);
  UserProfiles profiles = EmptyUserProfiles(log);
  if (fs::exists(dir / "user_attrs.tsv")) {
    std::ifstream in(dir / "user_attrs.tsv");
    profiles = ParseUserProfiles(in, log);
    RecordFile(m.inputs, layout.root, dir / "user_attrs.tsv");
  }
  ItemCatalog catalog = EmptyItemCatalog(log);
  if (fs::exists(dir / "item_features.tsv")) {
    std::ifstream in(dir / "item_features.tsv");
    catalog = ParseItemCatalog(in, log);
    RecordFile(m.inputs, layout.root, dir / "item_features.tsv");
  }
  m.timings_ms["parse"] = watch.ms();

  SampleBundle bundle;
  bundle.raw_users = log.users.raw_ids();
  bundle.raw_items = log.items.raw_ids();
  bundle.catalog = catalog;
  bundle.profile_vocab = profiles.slot_vocab_sizes;
  bundle.requests = BuildRequests(log, profiles, config.requests);
  bundle.is_test = LastRequestSplit(bundle.requests);
  std::vector<bool> train_mask(bundle.requests.size());
  for (size_t r = 0; r < train_mask.size(); ++r) train_mask[r] = !bundle.is_test[r];

  const I2IIndex index = BuildI2IIndex(log, config.i2i);
  const std::vector<ItemId> popularity = PopularityRanking(log);
  std::mt19937_64 rng(config.sample_seed);
  SampleSet set = BuildTrainingSet(bundle.requests, index, popularity, log.num_items(),
                                   config.samples, rng, train_mask);
  bundle.partitions = std::move(set.partitions);
  bundle.examples = std::move(set.examples);
  m.timings_ms["build"] = watch.ms() - m.timings_ms["parse"];

  fs::create_directories(layout.samples);
  WriteSampleBundle(bundle, BundlePath(layout));
  {
    auto out = OpenOut(layout.samples / "partitions.tsv");
    WritePartitions(out, log, bundle.requests, bundle.partitions);
  }
  RecordFile(m.outputs, layout.root, BundlePath(layout));
  RecordFile(m.outputs, layout.root, layout.samples / "partitions.tsv");
  m.timings_ms["total"] = watch.ms();
  WriteManifest(m, ManifestPath(layout.samples));

  size_t rtg = 0, itg = 0;
  for (const SamplePartition& p : bundle.partitions) {
    rtg += p.rtg.size();
    itg += p.itg.size();
  }
  Log("build-samples", std::to_string(bundle.requests.size()) + " requests, " +
                           std::to_string(bundle.examples.size()) + " examples, ITG share " +
                           Fixed(rtg + itg > 0 ? static_cast<double>(itg) / (rtg + itg) : 0.0));
}

void RunTrain(const PipelineConfig& config, const RunLayout& layout, const Variant& variant) {
  Stopwatch watch;
  const SampleBundle bundle = LoadVerifiedBundle(layout);
  TrainConfig train = config.train;
  train.ablation = variant.ablation;
  train.alpha = variant.alpha;
  TrainResult result = Train(bundle.view(), bundle.examples, ModelConfigFor(bundle, train), train);

  const fs::path dir = layout.TrainDir(variant.name);
  fs::create_directories(dir);
  SaveCheckpoint(result.params, dir / "checkpoint.bin");
  {
    auto out = OpenOut(dir / "loss.tsv");
    WriteStepRecords(out, result.steps);
  }
  Manifest m = NewManifest("train", config, train.seed);
  m.config.emplace_back("variant", std::string(variant.name));
  RecordFile(m.inputs, layout.root, BundlePath(layout));
  RecordFile(m.outputs, layout.root, dir / "checkpoint.bin");
  RecordFile(m.outputs, layout.root, dir / "loss.tsv");
  m.timings_ms["total"] = watch.ms();
  WriteManifest(m, ManifestPath(dir));
  const double last = result.steps.empty() ? 0.0 : result.steps.back().l_total;
  Log("train", std::string(variant.name) + " seed " + std::to_string(train.seed) + ": " +
                   std::to_string(result.steps.size()) + " steps, final loss " + Fixed(last) +
                   ", " + Fixed(watch.ms() / 1000.0, 1) + " s");
}

void RunRetrieve(const PipelineConfig& config, const RunLayout& layout, const Variant& variant,
                 Tower tower, int k, SearchMode mode) {
  Stopwatch watch;
  const SampleBundle bundle = LoadVerifiedBundle(layout);
  const fs::path train_dir = layout.TrainDir(variant.name);
  const fs::path checkpoint = train_dir / "checkpoint.bin";
  if (!fs::exists(checkpoint)) throw InputError("missing checkpoint " + checkpoint.string());
  const Manifest train_manifest = ReadManifest(ManifestPath(train_dir));
  VerifyOutputs(train_manifest, layout.root);
  VerifyInput(train_manifest, layout.root, BundlePath(layout));

  const ModelConfig expected = ModelConfigFor(bundle, config.train);
  const ModelParams params = LoadCheckpoint(checkpoint, &expected);
  const ItemIndex index = BuildItemIndex(params, bundle.catalog);
  std::optional<HnswIndex> graph;
  if (mode == SearchMode::kApprox) graph.emplace(index, config.hnsw);

  std::vector<int64_t> users;
  std::vector<RetrievalResult> results;
  for (size_t r : bundle.TestRequests()) {
    const RequestContext& ctx = bundle.requests[r];
    RetrievalResult result =
        TopK(UserForward(params, tower, ctx), index, k, mode, graph ? &*graph : nullptr);
    result.tower = tower;
    users.push_back(bundle.raw_users[ctx.user]);
    results.push_back(std::move(result));
  }
  IdVocab items;
  for (int64_t raw : bundle.raw_items) items.Add(raw);

  const fs::path dir = layout.RetrieveDir(variant.name);
  fs::create_directories(dir);
  const fs::path dump = layout.DumpPath(variant.name, tower);
  {
    auto out = OpenOut(dump);
    WriteRetrievalDump(out, users, results, items);
  }
  Manifest m = NewManifest("retrieve", config, config.train.seed);
  m.config.emplace_back("variant", std::string(variant.name));
  m.config.emplace_back("tower", std::string(TowerName(tower)));
  m.config.emplace_back("k", std::to_string(k));
  m.config.emplace_back("mode", mode == SearchMode::kApprox ? "approx" : "exact");
  RecordFile(m.inputs, layout.root, BundlePath(layout));
  RecordFile(m.inputs, layout.root, checkpoint);
  // Dumps of other towers stay recorded while they come from the same inputs.
  if (fs::exists(ManifestPath(dir))) {
    const Manifest previous = ReadManifest(ManifestPath(dir));
    if (previous.inputs == m.inputs) m.outputs = previous.outputs;
  }
  RecordFile(m.outputs, layout.root, dump);
  m.timings_ms["total"] = watch.ms();
  WriteManifest(m, ManifestPath(dir));
  Log("retrieve", std::string(variant.name) + "/" + std::string(TowerName(tower)) + ": top-" +
                      std::to_string(k) + " for " + std::to_string(users.size()) + " users");
}

EvalReport RunEval(const PipelineConfig& config, const RunLayout& layout, const Variant& variant,
                   Tower tower, const Variant& base) {
  Stopwatch watch;
  const SampleBundle bundle = LoadVerifiedBundle(layout);
  const auto enhanced = LoadDump(layout, bundle, variant.name, tower);
  const auto base_lists = LoadDump(layout, bundle, base.name, Tower::kBasic);

  std::vector<EvalUser> users;
  const auto test = bundle.TestRequests();
  for (size_t u = 0; u < test.size(); ++u) {
    EvalUser e;
    e.base = base_lists[u];
    e.enhanced = enhanced[u];
    e.itg = bundle.partitions[test[u]].itg;
    e.exposed = bundle.requests[test[u]].exposed;
    users.push_back(std::move(e));
  }
  EvalReport report = Evaluate(users, config.eval_ks, config.aggregation);

  const fs::path dir = layout.EvalDir(variant.name);
  fs::create_directories(dir);
  {
    auto out = OpenOut(dir / "report.tsv");
    WriteReportRecords(out, report);
  }
  {
    auto out = OpenOut(dir / "report.txt");
    out << "variant " << variant.name << ", tower " << TowerName(tower) << ", base "
        << base.name << '\n';
    WriteReportTable(out, report);
  }
  Manifest m = NewManifest("eval", config, config.train.seed);
  m.config.emplace_back("variant", std::string(variant.name));
  m.config.emplace_back("tower", std::string(TowerName(tower)));
  m.config.emplace_back("base", std::string(base.name));
  RecordFile(m.inputs, layout.root, BundlePath(layout));
  RecordFile(m.inputs, layout.root, layout.DumpPath(variant.name, tower));
  RecordFile(m.inputs, layout.root, layout.DumpPath(base.name, Tower::kBasic));
  RecordFile(m.outputs, layout.root, dir / "report.tsv");
  RecordFile(m.outputs, layout.root, dir / "report.txt");
  m.timings_ms["total"] = watch.ms();
  WriteManifest(m, ManifestPath(dir));
  return report;
}

std::optional<double> GridReport::Median(std::string_view variant, std::string_view metric,
                                         int k) const {
  for (const GridRow& row : rows) {
    if (row.seed == "median" && row.variant == variant && row.metric == metric && row.k == k) {
      return row.value;
    }
  }
  return std::nullopt;
}

GridReport RunExperiment(const PipelineConfig& config, const fs::path& root, int threads,
                         const std::optional<fs::path>& input) {
  Stopwatch watch;
  const RunLayout shared = RunLayout::Single(root);
  if (!input) RunSynth(config, shared);
  RunBuildSamples(config, shared, input);

  std::vector<Variant> variants;
  for (const std::string& name : config.variants) variants.push_back(*FindVariant(name));
  const Variant base = *FindVariant(config.base_variant);
  if (std::none_of(variants.begin(), variants.end(),
                   [&](const Variant& v) { return v.name == base.name; })) {
    variants.insert(variants.begin(), base);
  }

  auto layout_for = [&](uint64_t seed) {
    RunLayout l = shared;
    l.stages = root / ("seed-" + std::to_string(seed));
    return l;
  };
  struct Job {
    uint64_t seed;
    Variant variant;
  };
  std::vector<Job> jobs;
  for (uint64_t seed : config.seeds) {
    for (const Variant& v : variants) jobs.push_back({seed, v});
  }

  std::atomic<size_t> next{0};
  std::vector<std::exception_ptr> errors(jobs.size());
  auto worker = [&]() {
    for (size_t j = next++; j < jobs.size(); j = next++) {
      try {
        PipelineConfig job_config = config;
        job_config.train.seed = jobs[j].seed;
        const RunLayout layout = layout_for(jobs[j].seed);
        RunTrain(job_config, layout, jobs[j].variant);
        RunRetrieve(job_config, layout, jobs[j].variant, jobs[j].variant.serving_tower,
                    config.retrieve_k, config.search);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  const int n_workers = std::max(1, std::min<int>(threads, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_workers; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  GridReport grid;
  for (uint64_t seed : config.seeds) {
    PipelineConfig seed_config = config;
    seed_config.train.seed = seed;
    for (const Variant& v : variants) {
      const EvalReport report = RunEval(seed_config, layout_for(seed), v, v.serving_tower, base);
      for (const ReportRow& row : report.rows) {
        grid.rows.push_back(
            {std::to_string(seed), std::string(v.name), row.metric, row.k, row.value, row.n_users});
      }
    }
  }
  // Medians over seeds, per (variant, metric, K).
  std::vector<GridRow> medians;
  for (const GridRow& row : grid.rows) {
    if (row.seed != std::to_string(config.seeds.front())) continue;
    std::vector<double> values;
    for (const GridRow& other : grid.rows) {
      if (other.variant == row.variant && other.metric == row.metric && other.k == row.k) {
        values.push_back(other.value);
      }
    }
    std::sort(values.begin(), values.end());
    const size_t n = values.size();
    const double median = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    medians.push_back({"median", row.variant, row.metric, row.k, median, row.n_users});
  }
  grid.rows.insert(grid.rows.end(), medians.begin(), medians.end());

  {
    auto out = OpenOut(root / "grid.tsv");
    WriteGridRecords(out, grid);
  }
  {
    auto out = OpenOut(root / "grid.txt");
    WriteGridTable(out, grid, config);
  }
  Manifest m = NewManifest("experiment", config, config.seeds.front());
  RecordFile(m.inputs, root, BundlePath(shared));
  RecordFile(m.outputs, root, root / "grid.tsv");
  RecordFile(m.outputs, root, root / "grid.txt");
  m.timings_ms["total"] = watch.ms();
  WriteManifest(m, ManifestPath(root));
  Log("experiment", std::to_string(jobs.size()) + " jobs in " +
                        Fixed(watch.ms() / 1000.0, 1) + " s");
  return grid;
}

void WriteGridRecords(std::ostream& out, const GridReport& grid) {
  char buf[64];
  out << "seed\tvariant\tmetric\tK\tvalue\tn_users\n";
  for (const GridRow& row : grid.rows) {
    std::snprintf(buf, sizeof(buf), "%.10g", row.value);
    out << row.seed << '\t' << row.variant << '\t' << row.metric << '\t' << row.k << '\t' << buf
        << '\t' << row.n_users << '\n';
  }
}

void WriteGridTable(std::ostream& out, const GridReport& grid, const PipelineConfig& config) {
  std::vector<std::string> variants;
  for (const GridRow& row : grid.rows) {
    if (std::find(variants.begin(), variants.end(), row.variant) == variants.end()) {
      variants.push_back(row.variant);
    }
  }
  out << "Median over " << config.seeds.size() << " seed(s); Base@K and Sup@K come from "
      << config.base_variant << ".\n";
  char line[200];
  for (int k : config.eval_ks) {
    auto cell = [&](std::string_view variant, std::string_view metric) {
      auto v = grid.Median(variant, metric, k);
      return v ? Fixed(*v) : std::string("-");
    };
    out << "\nK = " << k << '\n';
    std::snprintf(line, sizeof(line), "%-12s %10s %10s %10s %12s\n", "variant", "Base@K", "Sup@K",
                  "Inc@K", "ExposureHit");
    out << line;
    for (const std::string& v : variants) {
      std::snprintf(line, sizeof(line), "%-12s %10s %10s %10s %12s\n", v.c_str(),
                    cell(config.base_variant, "base_at_k").c_str(),
                    cell(config.base_variant, "sup_at_k").c_str(), cell(v, "inc_at_k").c_str(),
                    cell(v, "exposure_inc_at_k").c_str());
      out << line;
    }
  }
}

}  // namespace increc
