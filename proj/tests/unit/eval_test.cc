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

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "increc/eval.h"
#include "oracles.h"

namespace increc {
namespace {

using testing::BruteDedup;
using testing::BruteRatio;

TEST_CASE("hand-computed hit rates") {
  std::vector<ItemList> lists{{1, 2, 3, 4}};
  std::vector<ItemList> itg{{4, 5}};
  CHECK(HitrateInc(lists, itg, 4).value == 0.5);
  CHECK(HitrateInc(lists, itg, 3).value == 0.0);

  std::vector<ItemList> two{{1, 2}, {3, 4}};
  std::vector<ItemList> itg2{{1}, {9, 8, 7, 3}};
  CHECK(HitrateInc(two, itg2, 2).value == doctest::Approx((1.0 + 0.25) / 2));
  CHECK(HitrateInc(two, itg2, 2, Aggregation::kSum).value == doctest::Approx(1.25));

  std::vector<ItemList> dup{{4, 4, 4}};
  CHECK(HitrateInc(dup, itg, 3).value == 0.5);

  std::vector<ItemList> skip_itg{{1}, {}};
  Rate r = HitrateInc(two, skip_itg, 2);
  CHECK(r.n_users == 1);
  CHECK(r.value == 1.0);
  CHECK_THROWS_AS(HitrateInc(two, itg2, 0), InputError);
  CHECK_THROWS_AS(HitrateInc(two, itg, 2), InputError);
}

TEST_CASE("dedup hand cases") {
  ItemList base{1, 2, 3, 4, 5, 6};
  ItemList enhanced{2, 7, 1, 8, 3, 9, 4};
  CHECK(DedupIncremental(base, enhanced, 3) == ItemList{7, 8, 9});
  CHECK(DedupIncremental(base, enhanced, 2) == ItemList{7, 8});
  CHECK_THROWS_AS(DedupIncremental(base, enhanced, 4), InputError);
  CHECK_THROWS_AS(DedupIncremental(ItemList{1}, enhanced, 2), InputError);
  // Identity: enhanced equal to base gives base[K, 2K).
  CHECK(DedupIncremental(base, base, 3) == ItemList{4, 5, 6});
}

TEST_CASE("metrics agree with brute force on small universes") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const int universe = 4 + static_cast<int>(rng() % 7);  // 4..10
    const int k = 1 + static_cast<int>(rng() % (universe / 2));
    const size_t n_users = 1 + rng() % 4;
    std::vector<ItemList> base(n_users), enhanced(n_users), itg(n_users), exposed(n_users);
    for (size_t u = 0; u < n_users; ++u) {
      base[u].resize(universe);
      std::iota(base[u].begin(), base[u].end(), 0);
      std::shuffle(base[u].begin(), base[u].end(), rng);
      enhanced[u] = base[u];
      std::shuffle(enhanced[u].begin(), enhanced[u].end(), rng);
      for (ItemId i = 0; i < universe; ++i) {
        if (rng() % 3 == 0) itg[u].push_back(i);
        if (rng() % 4 == 0) exposed[u].push_back(i);
      }
    }
    BaseSupInc got = ComputeBaseSupInc(base, enhanced, itg, k);
    double b = 0, s = 0, in = 0, ex = 0;
    size_t n = 0, n_ex = 0;
    for (size_t u = 0; u < n_users; ++u) {
      ItemList inc = BruteDedup(base[u], enhanced[u], k);
      CHECK(inc == DedupIncremental(base[u], enhanced[u], k));
      if (!exposed[u].empty()) {
        ex += BruteRatio(inc, 0, inc.size(), exposed[u]);
        ++n_ex;
      }
      if (itg[u].empty()) continue;
      b += BruteRatio(base[u], 0, k, itg[u]);
      s += BruteRatio(base[u], k, 2 * k, itg[u]);
      in += BruteRatio(inc, 0, k, itg[u]);
      ++n;
    }
    CHECK(got.base.n_users == n);
    if (n > 0) {
      CHECK(got.base.value == doctest::Approx(b / n).epsilon(1e-12));
      CHECK(got.sup.value == doctest::Approx(s / n).epsilon(1e-12));
      CHECK(got.inc.value == doctest::Approx(in / n).epsilon(1e-12));
    }
    std::vector<EvalUser> users;
    for (size_t u = 0; u < n_users; ++u) users.push_back({base[u], enhanced[u], itg[u], exposed[u]});
    std::vector<int> ks{k};
    EvalReport report = Evaluate(users, ks);
    const ReportRow* row = report.Find("exposure_inc_at_k", k);
    REQUIRE(row != nullptr);
    CHECK(row->n_users == n_ex);
    if (n_ex > 0) CHECK(row->value == doctest::Approx(ex / n_ex).epsilon(1e-12));
    CHECK(report.Find("inc_at_k", k)->value == got.inc.value);
  }
}

TEST_CASE("identical models give Inc equal to Sup") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    ItemList base(40);
    std::iota(base.begin(), base.end(), 0);
    std::shuffle(base.begin(), base.end(), rng);
    ItemList itg;
    for (ItemId i = 0; i < 40; ++i) {
      if (rng() % 5 == 0) itg.push_back(i);
    }
    if (itg.empty()) itg.push_back(0);
    std::vector<ItemList> b{base}, t{itg};
    for (int k : {1, 5, 20}) {
      BaseSupInc r = ComputeBaseSupInc(b, b, t, k);
      CHECK(r.inc.value == r.sup.value);
    }
  }
}

TEST_CASE("report output") {
  std::vector<EvalUser> users{{{1, 2, 3, 4}, {4, 3, 2, 1}, {3}, {4}}};
  std::vector<int> ks{1, 2};
  EvalReport report = Evaluate(users, ks);
  CHECK(report.rows.size() == 8);
  CHECK(report.Find("sup_at_k", 1)->value == 0.0);
  CHECK(report.Find("inc_at_k", 1)->value == 0.0);
  CHECK(report.Find("inc_at_k", 2)->value == 1.0);
  CHECK(report.Find("exposure_inc_at_k", 1)->value == 1.0);
  std::ostringstream rec, table;
  WriteReportRecords(rec, report);
  CHECK(rec.str().find("inc_at_k\t2\t1\t1\n") != std::string::npos);
  WriteReportTable(table, report);
  CHECK(table.str().find("Inc@K") != std::string::npos);
  CHECK(ParseAggregation("sum") == Aggregation::kSum);
  CHECK(!ParseAggregation("max").has_value());
}

}  // namespace
}  // namespace increc
