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

// Seeded synthetic cross-scenario logs with planted hidden interests.
//
// Items fall into interest clusters with Zipf popularity inside each
// cluster. Every user browses two homepage-visible clusters and owns one
// hidden cluster that only shows up through orders in the other scenarios.
// Cluster ids are assigned to items at random, so the cluster id carries no
// ordering information.

#ifndef INCREC_SYNTH_H_
#define INCREC_SYNTH_H_

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "increc/common.h"
#include "increc/event_log.h"

namespace increc {

struct SynthConfig {
  int n_users = 2000;
  int n_items = 5000;
  int n_scenarios = 3;   // scenario 0 is the homepage
  int n_clusters = 20;
  // The last `n_hidden_clusters` clusters are never a user's visible
  // (homepage) interest and only serve as hidden interests. With 0, any
  // cluster other than the user's visible ones may be hidden.
  int n_hidden_clusters = 5;
  int n_brands = 100;
  double p_cross = 0.8;  // cross-scenario order comes from the hidden cluster
  int n_days = 8;        // one homepage session per user and day
  int exposures_per_session = 20;
  double p_click_visible = 0.4;
  double p_click_other = 0.05;
  double p_home_order = 0.5;      // per click
  double p_second_cross = 0.5;    // chance of a second cross-scenario order
  int warmup_clicks = 5;
  double zipf_exponent = 0.3;        // item popularity inside a cluster
  double order_zipf_exponent = 0.3;  // popularity as seen by cross-scenario orders
  double quality_weight = 0.0;    // brand quality in the exposure scorer
  double order_quality_weight = 0.5;
  double visible_bonus = 2.5;
  double hidden_bonus = 0.0;
  double exposure_noise = 1.0;   // Gumbel scale in the exposure scorer
  // Only the `homepage_pool` most popular items of each cluster are shown
  // and clicked on the homepage; 0 means every item.
  int homepage_pool = 100;
  double profile_noise = 0.2;     // chance attribute 1 misreports the hidden cluster
  Timestamp horizon = 6 * kHourMs;  // cross-scenario orders land within this
  Timestamp start_time = 1700000000000LL;
  uint64_t seed = 1;

  // Throws InputError on out-of-range values.
  void Validate() const;
};

struct SynthEvent {
  int64_t user = 0;
  int64_t item = 0;  // 0 for requests
  int scenario = 0;
  EventKind kind = EventKind::kClick;
  Timestamp time = 0;
};

struct SynthData {
  std::vector<SynthEvent> events;  // grouped by user, time-sorted
  // Raw ids are index + 1.
  std::vector<int> item_cluster;
  std::vector<int> item_category;
  std::vector<int> item_brand;
  std::vector<std::array<int, 2>> user_visible;
  std::vector<int> user_hidden;
  std::vector<std::string> user_attrs;  // comma-joined
};

SynthData Generate(const SynthConfig& config);

// events.tsv, user_attrs.tsv, item_features.tsv, item_clusters.tsv and
// user_clusters.tsv inside `dir`.
void WriteSynthFiles(const SynthData& data, const std::filesystem::path& dir);

}  // namespace increc

#endif  // INCREC_SYNTH_H_
