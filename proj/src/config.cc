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

#include "increc/config.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "increc/manifest.h"

namespace increc {
namespace {

struct Binding {
  const char* key;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const std::string&)> set;
};

[[noreturn]] void Bad(const std::string& key, const std::string& value) {
  throw InputError("config: bad value '" + value + "' for " + key);
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& text) {
  T value{};
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) Bad(key, text);
  return value;
}

std::string FormatDouble(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

template <typename T>
std::vector<T> ParseList(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    if constexpr (std::is_same_v<T, std::string>) {
      out.push_back(item);
    } else {
      out.push_back(ParseNumber<T>(key, item));
    }
  }
  if (out.empty()) Bad(key, text);
  return out;
}

template <typename T>
std::string JoinList(const std::vector<T>& values) {
  std::string out;
  for (const T& v : values) {
    if (!out.empty()) out += ',';
    if constexpr (std::is_same_v<T, std::string>) {
      out += v;
    } else {
      out += std::to_string(v);
    }
  }
  return out;
}

// Binding helpers for plain fields reached through a member accessor.
template <typename T, typename Access>
Binding Int(const char* key, Access access) {
  return {key, [access](const PipelineConfig& c) { return std::to_string(access(c)); },
          [access, key](PipelineConfig& c, const std::string& v) {
            access(c) = ParseNumber<T>(key, v);
          }};
}

template <typename Access>
Binding Real(const char* key, Access access) {
  return {key, [access](const PipelineConfig& c) { return FormatDouble(access(c)); },
          [access, key](PipelineConfig& c, const std::string& v) {
            access(c) = ParseNumber<double>(key, v);
          }};
}

// Durations are configured in minutes and stored in milliseconds.
template <typename Access>
Binding Minutes(const char* key, Access access) {
  return {key,
          [access](const PipelineConfig& c) {
            return std::to_string(access(c) / (60 * 1000));
          },
          [access, key](PipelineConfig& c, const std::string& v) {
            access(c) = ParseNumber<int64_t>(key, v) * 60 * 1000;
          }};
}

#define FIELD(expr) [](auto& c) -> auto& { return expr; }

const std::vector<Binding>& Bindings() {
  static const std::vector<Binding> bindings = {
      Int<int>("synth.n_users", FIELD(c.synth.n_users)),
      Int<int>("synth.n_items", FIELD(c.synth.n_items)),
      Int<int>("synth.n_scenarios", FIELD(c.synth.n_scenarios)),
      Int<int>("synth.n_clusters", FIELD(c.synth.n_clusters)),
      Int<int>("synth.n_hidden_clusters", FIELD(c.synth.n_hidden_clusters)),
      Int<int>("synth.n_brands", FIELD(c.synth.n_brands)),
      Real("synth.p_cross", FIELD(c.synth.p_cross)),
      Int<int>("synth.n_days", FIELD(c.synth.n_days)),
      Int<int>("synth.exposures_per_session", FIELD(c.synth.exposures_per_session)),
      Real("synth.p_click_visible", FIELD(c.synth.p_click_visible)),
      Real("synth.p_click_other", FIELD(c.synth.p_click_other)),
      Real("synth.p_home_order", FIELD(c.synth.p_home_order)),
      Real("synth.p_second_cross", FIELD(c.synth.p_second_cross)),
      Int<int>("synth.warmup_clicks", FIELD(c.synth.warmup_clicks)),
      Real("synth.zipf_exponent", FIELD(c.synth.zipf_exponent)),
      Real("synth.order_zipf_exponent", FIELD(c.synth.order_zipf_exponent)),
      Real("synth.quality_weight", FIELD(c.synth.quality_weight)),
      Real("synth.order_quality_weight", FIELD(c.synth.order_quality_weight)),
      Real("synth.visible_bonus", FIELD(c.synth.visible_bonus)),
      Real("synth.hidden_bonus", FIELD(c.synth.hidden_bonus)),
      Real("synth.exposure_noise", FIELD(c.synth.exposure_noise)),
      Int<int>("synth.homepage_pool", FIELD(c.synth.homepage_pool)),
      Real("synth.profile_noise", FIELD(c.synth.profile_noise)),
      Minutes("synth.horizon_minutes", FIELD(c.synth.horizon)),
      Int<int64_t>("synth.start_time", FIELD(c.synth.start_time)),
      Int<uint64_t>("synth.seed", FIELD(c.synth.seed)),

      Minutes("samples.horizon_minutes", FIELD(c.requests.horizon)),
      Int<int>("samples.max_seq", FIELD(c.requests.max_seq)),
      Minutes("samples.i2i_window_minutes", FIELD(c.i2i.window)),
      Int<int>("samples.i2i_top_m", FIELD(c.i2i.top_m)),
      Int<int>("samples.k_base", FIELD(c.samples.k_base)),
      Int<int>("samples.n_neg", FIELD(c.samples.n_neg)),
      Int<uint64_t>("samples.seed", FIELD(c.sample_seed)),

      Int<int>("train.epochs", FIELD(c.train.epochs)),
      Int<int>("train.batch_size", FIELD(c.train.batch_size)),
      Int<uint64_t>("train.seed", FIELD(c.train.seed)),
      Real("train.tau", FIELD(c.train.tau)),
      Real("train.lr", FIELD(c.train.lr)),
      Real("train.eps", FIELD(c.train.eps)),
      Real("train.itg_boost", FIELD(c.train.itg_boost)),
      Real("train.weight_basic", FIELD(c.train.weight_basic)),
      Real("train.weight_inc", FIELD(c.train.weight_inc)),
      Real("train.weight_align", FIELD(c.train.weight_align)),
      Int<int>("train.dim", FIELD(c.train.dim)),
      Int<int>("train.hidden", FIELD(c.train.hidden)),
      Int<int>("train.feature_dim", FIELD(c.train.feature_dim)),

      Int<int>("retrieve.k", FIELD(c.retrieve_k)),
      {"retrieve.mode",
       [](const PipelineConfig& c) {
         return std::string(c.search == SearchMode::kApprox ? "approx" : "exact");
       },
       [](PipelineConfig& c, const std::string& v) {
         if (v == "exact") {
           c.search = SearchMode::kExact;
         } else if (v == "approx") {
           c.search = SearchMode::kApprox;
         } else {
           Bad("retrieve.mode", v);
         }
       }},
      Int<int>("retrieve.hnsw_m", FIELD(c.hnsw.max_neighbors)),
      Int<int>("retrieve.hnsw_ef_construction", FIELD(c.hnsw.ef_construction)),
      Int<int>("retrieve.hnsw_ef_search", FIELD(c.hnsw.ef_search)),

      {"eval.ks", [](const PipelineConfig& c) { return JoinList(c.eval_ks); },
       [](PipelineConfig& c, const std::string& v) { c.eval_ks = ParseList<int>("eval.ks", v); }},
      {"eval.aggregation",
       [](const PipelineConfig& c) { return std::string(AggregationName(c.aggregation)); },
       [](PipelineConfig& c, const std::string& v) {
         auto a = ParseAggregation(v);
         if (!a) Bad("eval.aggregation", v);
         c.aggregation = *a;
       }},

      {"experiment.seeds", [](const PipelineConfig& c) { return JoinList(c.seeds); },
       [](PipelineConfig& c, const std::string& v) {
         c.seeds = ParseList<uint64_t>("experiment.seeds", v);
       }},
      {"experiment.variants", [](const PipelineConfig& c) { return JoinList(c.variants); },
       [](PipelineConfig& c, const std::string& v) {
         c.variants = ParseList<std::string>("experiment.variants", v);
       }},
      {"experiment.base_variant", [](const PipelineConfig& c) { return c.base_variant; },
       [](PipelineConfig& c, const std::string& v) { c.base_variant = v; }},
  };
  return bindings;
}

#undef FIELD

}  // namespace

void PipelineConfig::Validate() const {
  synth.Validate();
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw InputError("config: " + what);
  };
  require(requests.horizon > 0 && requests.max_seq > 0, "samples horizon and max_seq must be positive");
  require(i2i.window >= 0 && i2i.top_m > 0, "bad i2i settings");
  require(samples.k_base >= 0 && samples.n_neg >= 1, "bad sample settings");
  require(train.epochs > 0 && train.batch_size > 0, "epochs and batch size must be positive");
  require(train.tau > 0 && train.lr > 0 && train.eps > 0, "tau, lr and eps must be positive");
  require(train.dim > 0 && train.hidden > 0 && train.feature_dim > 0, "model sizes must be positive");
  require(retrieve_k > 0, "retrieve.k must be positive");
  for (int k : eval_ks) {
    require(k > 0, "eval.ks must be positive");
    require(2 * k <= retrieve_k, "retrieve.k must be at least twice every eval K");
  }
  for (const std::string& v : variants) {
    require(FindVariant(v).has_value(), "unknown variant " + v);
  }
  require(FindVariant(base_variant).has_value(), "unknown base variant " + base_variant);
}

std::vector<std::pair<std::string, std::string>> ConfigEntries(const PipelineConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Binding& b : Bindings()) out.emplace_back(b.key, b.get(config));
  return out;
}

void SetConfigValue(PipelineConfig& config, const std::string& key, const std::string& value) {
  for (const Binding& b : Bindings()) {
    if (key == b.key) {
      b.set(config, value);
      return;
    }
  }
  throw InputError("config: unknown key " + key);
}

PipelineConfig ParseConfig(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  PipelineConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw InputError("config: key " + section + " outside a section");
    for (const auto& [key, value] : body) {
      SetConfigValue(config, section + "." + key, value.data());
    }
  }
  config.Validate();
  return config;
}

PipelineConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("missing config file " + path.string());
  return ParseConfig(in);
}

std::string ConfigHash(const PipelineConfig& config) {
  std::string canonical;
  for (const auto& [key, value] : ConfigEntries(config)) {
    canonical += key + "=" + value + "\n";
  }
  return Sha256Hex(canonical).substr(0, 8);
}

}  // namespace increc
