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

#include "increc/synth.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

namespace increc {
namespace {

void Require(bool ok, const std::string& what) {
  if (!ok) throw InputError("synth: " + what);
}

bool Probability(double p) { return p >= 0.0 && p <= 1.0; }

std::ofstream OpenOut(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

}  // namespace

void SynthConfig::Validate() const {
  Require(n_users > 0 && n_items > 0 && n_brands > 0 && n_days > 0, "sizes must be positive");
  Require(n_scenarios >= 2, "need the homepage and at least one other scenario");
  Require(n_clusters >= 3, "need at least 3 clusters");
  Require(n_clusters <= n_items, "more clusters than items");
  Require(n_hidden_clusters >= 0 && n_clusters - n_hidden_clusters >= 2,
          "need at least 2 homepage clusters");
  Require(exposures_per_session > 0 && exposures_per_session <= n_items,
          "exposures per session out of range");
  Require(warmup_clicks >= 0, "warmup clicks must be non-negative");
  Require(Probability(p_cross) && Probability(p_click_visible) && Probability(p_click_other) &&
              Probability(p_home_order) && Probability(p_second_cross) &&
              Probability(profile_noise),
          "probabilities must lie in [0, 1]");
  Require(zipf_exponent >= 0.0 && order_zipf_exponent >= 0.0,
          "zipf exponents must be non-negative");
  Require(homepage_pool >= 0, "homepage pool must be non-negative");
  Require(homepage_pool == 0 || homepage_pool * (n_clusters - n_hidden_clusters) >=
                                    exposures_per_session,
          "homepage pool too small for one session");
  Require(exposure_noise >= 0.0, "exposure noise must be non-negative");
  Require(horizon >= 5 * kHourMs, "horizon must be at least 5 hours");
}

SynthData Generate(const SynthConfig& config) {
  config.Validate();
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n_items = config.n_items;
  const int n_clusters = config.n_clusters;

  SynthData data;

  // Items: balanced random cluster assignment, Zipf rank inside the cluster.
  data.item_cluster.resize(n_items);
  for (int i = 0; i < n_items; ++i) data.item_cluster[i] = i % n_clusters;
  std::shuffle(data.item_cluster.begin(), data.item_cluster.end(), rng);
  std::vector<std::vector<int>> members(n_clusters);
  for (int i = 0; i < n_items; ++i) members[data.item_cluster[i]].push_back(i);

  std::vector<double> brand_quality(config.n_brands);
  for (double& q : brand_quality) q = normal(rng);
  data.item_category.resize(n_items);
  data.item_brand.resize(n_items);
  std::vector<double> log_pop(n_items);
  std::vector<double> log_order_pop(n_items);
  std::uniform_int_distribution<int> pick_brand(0, config.n_brands - 1);
  for (int c = 0; c < n_clusters; ++c) {
    for (size_t rank = 0; rank < members[c].size(); ++rank) {
      const int item = members[c][rank];
      const bool on_homepage =
          config.homepage_pool == 0 || static_cast<int>(rank) < config.homepage_pool;
      log_pop[item] = on_homepage
                          ? -config.zipf_exponent * std::log(static_cast<double>(rank + 1))
                          : -std::numeric_limits<double>::infinity();
      log_order_pop[item] =
          -config.order_zipf_exponent * std::log(static_cast<double>(rank + 1));
      data.item_category[item] = 2 * c + static_cast<int>(rank % 2);
      data.item_brand[item] = pick_brand(rng);
    }
  }
  std::vector<double> exposure_base(n_items);
  for (int i = 0; i < n_items; ++i) {
    exposure_base[i] = log_pop[i] + config.quality_weight * brand_quality[data.item_brand[i]];
  }
  // Order choice inside a cluster: popularity times brand quality.
  std::vector<std::discrete_distribution<int>> order_pick(n_clusters);
  std::vector<std::discrete_distribution<int>> click_pick(n_clusters);
  for (int c = 0; c < n_clusters; ++c) {
    std::vector<double> w_order, w_click;
    for (int item : members[c]) {
      w_order.push_back(std::exp(log_order_pop[item] + config.order_quality_weight *
                                                     brand_quality[data.item_brand[item]]));
      w_click.push_back(std::exp(log_pop[item]));
    }
    order_pick[c] = std::discrete_distribution<int>(w_order.begin(), w_order.end());
    click_pick[c] = std::discrete_distribution<int>(w_click.begin(), w_click.end());
  }

  const int n_home = config.n_hidden_clusters > 0 ? n_clusters - config.n_hidden_clusters
                                                 : n_clusters;
  std::uniform_int_distribution<int> pick_cluster(0, n_clusters - 1);
  std::uniform_int_distribution<int> pick_home(0, n_home - 1);
  std::uniform_int_distribution<int> pick_hidden(n_home, n_clusters - 1);
  std::uniform_int_distribution<int> pick_cross_scenario(1, config.n_scenarios - 1);
  std::vector<double> score(n_items);
  std::vector<int> order(n_items);

  for (int u = 0; u < config.n_users; ++u) {
    const int64_t raw_user = u + 1;
    std::array<int, 2> visible{};
    visible[0] = pick_home(rng);
    do {
      visible[1] = pick_home(rng);
    } while (visible[1] == visible[0]);
    int hidden = 0;
    if (config.n_hidden_clusters > 0) {
      hidden = pick_hidden(rng);
    } else {
      do {
        hidden = pick_cluster(rng);
      } while (hidden == visible[0] || hidden == visible[1]);
    }
    data.user_visible.push_back(visible);
    data.user_hidden.push_back(hidden);

    const int reported = unit(rng) < config.profile_noise ? pick_cluster(rng) : hidden;
    std::uniform_int_distribution<int> age(0, 4);
    std::uniform_int_distribution<int> gender(0, 1);
    data.user_attrs.push_back("c" + std::to_string(reported) + ",v" +
                              std::to_string(visible[0]) + ",a" + std::to_string(age(rng)) +
                              ",g" + std::to_string(gender(rng)));

    std::vector<SynthEvent> events;
    auto emit = [&](int item, int scenario, EventKind kind, Timestamp time) {
      events.push_back({raw_user, item < 0 ? 0 : item + 1, scenario, kind, time});
    };
    // Hidden-interest orders follow the order popularity; the rest follow
    // the homepage popularity of a visible cluster.
    auto cross_order_item = [&]() {
      if (unit(rng) < config.p_cross) return members[hidden][order_pick[hidden](rng)];
      const int c = visible[unit(rng) < 0.5 ? 0 : 1];
      return members[c][click_pick[c](rng)];
    };

    // Warmup history before the first request.
    const Timestamp day0 = config.start_time;
    for (int k = 0; k < config.warmup_clicks; ++k) {
      const int c = visible[k % 2];
      emit(members[c][click_pick[c](rng)], 0, EventKind::kClick,
           day0 + kHourMs + k * 2 * 60 * 1000);
    }
    emit(cross_order_item(), pick_cross_scenario(rng), EventKind::kOrder, day0 + 5 * kHourMs);

    for (int day = 0; day < config.n_days; ++day) {
      const Timestamp t1 = day0 + day * kDayMs + 8 * kHourMs +
                           static_cast<Timestamp>(unit(rng) * 12.0 * kHourMs);
      emit(-1, 0, EventKind::kRequest, t1);

      // Exposures: top items of a Gumbel-perturbed popularity + quality +
      // visible-cluster score.
      for (int i = 0; i < n_items; ++i) {
        const int c = data.item_cluster[i];
        double bonus = 0.0;
        if (c == visible[0] || c == visible[1]) bonus = config.visible_bonus;
        if (c == hidden) bonus = config.hidden_bonus;
        const double g = -std::log(-std::log(std::max(unit(rng), 1e-300)));
        score[i] = exposure_base[i] + bonus + config.exposure_noise * g;
      }
      std::iota(order.begin(), order.end(), 0);
      std::partial_sort(order.begin(), order.begin() + config.exposures_per_session,
                        order.end(), [&](int a, int b) {
                          if (score[a] != score[b]) return score[a] > score[b];
                          return a < b;
                        });
      for (int r = 0; r < config.exposures_per_session; ++r) {
        const int item = order[r];
        const Timestamp shown = t1 + (r + 1) * 30 * 1000;
        emit(item, 0, EventKind::kExposure, shown);
        const int c = data.item_cluster[item];
        const bool liked = c == visible[0] || c == visible[1];
        if (unit(rng) < (liked ? config.p_click_visible : config.p_click_other)) {
          emit(item, 0, EventKind::kClick, shown + 10 * 1000);
          if (unit(rng) < config.p_home_order) {
            emit(item, 0, EventKind::kOrder, shown + 70 * 1000);
          }
        }
      }

      // Cross-scenario orders, more than an hour away from the session and
      // from each other.
      const int n_cross = 1 + (unit(rng) < config.p_second_cross ? 1 : 0);
      for (int k = 0; k < n_cross; ++k) {
        const Timestamp at = t1 + (2 + 2 * k) * kHourMs +
                             static_cast<Timestamp>(unit(rng) * 0.5 * kHourMs);
        emit(cross_order_item(), pick_cross_scenario(rng), EventKind::kOrder, at);
      }
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const SynthEvent& a, const SynthEvent& b) { return a.time < b.time; });
    data.events.insert(data.events.end(), events.begin(), events.end());
  }
  return data;
}

void WriteSynthFiles(const SynthData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = OpenOut(dir / "events.tsv");
    for (const SynthEvent& e : data.events) {
      out << e.user << '\t' << e.item << '\t' << e.scenario << '\t' << EventKindName(e.kind)
          << '\t' << e.time << '\n';
    }
  }
  {
    auto out = OpenOut(dir / "user_attrs.tsv");
    for (size_t u = 0; u < data.user_attrs.size(); ++u) {
      out << u + 1 << '\t' << data.user_attrs[u] << '\n';
    }
  }
  {
    auto out = OpenOut(dir / "item_features.tsv");
    for (size_t i = 0; i < data.item_cluster.size(); ++i) {
      out << i + 1 << '\t' << data.item_category[i] << ',' << data.item_brand[i] << '\n';
    }
  }
  {
    auto out = OpenOut(dir / "item_clusters.tsv");
    for (size_t i = 0; i < data.item_cluster.size(); ++i) {
      out << i + 1 << '\t' << data.item_cluster[i] << '\n';
    }
  }
  {
    auto out = OpenOut(dir / "user_clusters.tsv");
    for (size_t u = 0; u < data.user_hidden.size(); ++u) {
      out << u + 1 << '\t' << data.user_visible[u][0] << ',' << data.user_visible[u][1] << '\t'
          << data.user_hidden[u] << '\n';
    }
  }
}

}  // namespace increc
