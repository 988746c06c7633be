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

#include "increc/eval.h"

#include <algorithm>
#include <cstdio>
#include <unordered_set>

namespace increc {
namespace {

double Overlap(std::span<const ItemId> list, std::span<const ItemId> truth) {
  std::unordered_set<ItemId> seen;
  size_t hit = 0;
  for (ItemId item : list) {
    if (!seen.insert(item).second) continue;
    if (std::find(truth.begin(), truth.end(), item) != truth.end()) ++hit;
  }
  return static_cast<double>(hit);
}

void CheckSizes(size_t a, size_t b) {
  if (a != b) throw InputError("per-user inputs have different lengths");
}

Rate Aggregate(double sum, size_t n, Aggregation aggregation) {
  Rate rate;
  rate.n_users = n;
  if (aggregation == Aggregation::kSum) {
    rate.value = sum;
  } else {
    rate.value = n > 0 ? sum / static_cast<double>(n) : 0.0;
  }
  return rate;
}

std::string FormatRate(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", value);
  return buf;
}

}  // namespace

std::string_view AggregationName(Aggregation aggregation) {
  return aggregation == Aggregation::kSum ? "sum" : "mean";
}

std::optional<Aggregation> ParseAggregation(std::string_view name) {
  if (name == "mean") return Aggregation::kMean;
  if (name == "sum") return Aggregation::kSum;
  return std::nullopt;
}

Rate HitrateInc(std::span<const ItemList> lists, std::span<const ItemList> itg, int k,
                Aggregation aggregation) {
  if (k <= 0) throw InputError("K must be positive");
  CheckSizes(lists.size(), itg.size());
  double sum = 0.0;
  size_t n = 0;
  for (size_t u = 0; u < lists.size(); ++u) {
    if (itg[u].empty()) continue;
    const size_t take = std::min(lists[u].size(), static_cast<size_t>(k));
    sum += Overlap(std::span<const ItemId>(lists[u]).first(take), itg[u]) /
           static_cast<double>(itg[u].size());
    ++n;
  }
  return Aggregate(sum, n, aggregation);
}

ItemList DedupIncremental(std::span<const ItemId> base, std::span<const ItemId> enhanced,
                          int k) {
  if (k <= 0) throw InputError("K must be positive");
  if (base.size() < static_cast<size_t>(k)) {
    throw InputError("base list shorter than K = " + std::to_string(k));
  }
  std::unordered_set<ItemId> removed(base.begin(), base.begin() + k);
  ItemList out;
  for (ItemId item : enhanced) {
    if (static_cast<int>(out.size()) == k) break;
    if (removed.count(item) || std::find(out.begin(), out.end(), item) != out.end()) continue;
    out.push_back(item);
  }
  if (static_cast<int>(out.size()) < k) {
    throw InputError("enhanced list has fewer than K = " + std::to_string(k) +
                     " items after deduplication");
  }
  return out;
}

BaseSupInc ComputeBaseSupInc(std::span<const ItemList> base, std::span<const ItemList> enhanced,
                             std::span<const ItemList> itg, int k, Aggregation aggregation) {
  if (k <= 0) throw InputError("K must be positive");
  CheckSizes(base.size(), enhanced.size());
  CheckSizes(base.size(), itg.size());
  std::vector<ItemList> top(base.size()), next(base.size()), inc(base.size());
  for (size_t u = 0; u < base.size(); ++u) {
    if (base[u].size() < 2 * static_cast<size_t>(k)) {
      throw InputError("base list shorter than 2K = " + std::to_string(2 * k));
    }
    top[u].assign(base[u].begin(), base[u].begin() + k);
    next[u].assign(base[u].begin() + k, base[u].begin() + 2 * k);
    inc[u] = DedupIncremental(base[u], enhanced[u], k);
  }
  BaseSupInc out;
  out.base = HitrateInc(top, itg, k, aggregation);
  out.sup = HitrateInc(next, itg, k, aggregation);
  out.inc = HitrateInc(inc, itg, k, aggregation);
  return out;
}

Rate ExposureHitrate(std::span<const ItemList> lists, std::span<const ItemList> exposed) {
  CheckSizes(lists.size(), exposed.size());
  double sum = 0.0;
  size_t n = 0;
  for (size_t u = 0; u < lists.size(); ++u) {
    if (exposed[u].empty()) continue;
    sum += Overlap(lists[u], exposed[u]) / static_cast<double>(exposed[u].size());
    ++n;
  }
  return Aggregate(sum, n, Aggregation::kMean);
}

const ReportRow* EvalReport::Find(std::string_view metric, int k) const {
  for (const ReportRow& row : rows) {
    if (row.metric == metric && row.k == k) return &row;
  }
  return nullptr;
}

EvalReport Evaluate(std::span<const EvalUser> users, std::span<const int> ks,
                    Aggregation aggregation) {
  EvalReport report;
  report.aggregation = aggregation;
  report.n_users = users.size();
  std::vector<ItemList> base, enhanced, itg, exposed;
  for (const EvalUser& u : users) {
    base.push_back(u.base);
    enhanced.push_back(u.enhanced);
    itg.push_back(u.itg);
    exposed.push_back(u.exposed);
  }
  for (int k : ks) {
    BaseSupInc bsi = ComputeBaseSupInc(base, enhanced, itg, k, aggregation);
    std::vector<ItemList> inc_lists(users.size());
    for (size_t u = 0; u < users.size(); ++u) {
      inc_lists[u] = DedupIncremental(base[u], enhanced[u], k);
    }
    Rate exposure = ExposureHitrate(inc_lists, exposed);
    report.rows.push_back({"base_at_k", k, bsi.base.value, bsi.base.n_users});
    report.rows.push_back({"sup_at_k", k, bsi.sup.value, bsi.sup.n_users});
    report.rows.push_back({"inc_at_k", k, bsi.inc.value, bsi.inc.n_users});
    report.rows.push_back({"exposure_inc_at_k", k, exposure.value, exposure.n_users});
  }
  return report;
}

void WriteReportRecords(std::ostream& out, const EvalReport& report) {
  char buf[64];
  for (const ReportRow& row : report.rows) {
    std::snprintf(buf, sizeof(buf), "%.10g", row.value);
    out << row.metric << '\t' << row.k << '\t' << buf << '\t' << row.n_users << '\n';
  }
}

void WriteReportTable(std::ostream& out, const EvalReport& report) {
  std::vector<int> ks;
  for (const ReportRow& row : report.rows) {
    if (std::find(ks.begin(), ks.end(), row.k) == ks.end()) ks.push_back(row.k);
  }
  char line[160];
  std::snprintf(line, sizeof(line), "%6s  %10s  %10s  %10s  %12s\n", "K", "Base@K", "Sup@K",
                "Inc@K", "ExposureHit");
  out << "aggregation: " << AggregationName(report.aggregation)
      << ", users: " << report.n_users << '\n'
      << line;
  for (int k : ks) {
    auto cell = [&](std::string_view metric) {
      const ReportRow* row = report.Find(metric, k);
      return row ? FormatRate(row->value) : std::string("-");
    };
    std::snprintf(line, sizeof(line), "%6d  %10s  %10s  %10s  %12s\n", k,
                  cell("base_at_k").c_str(), cell("sup_at_k").c_str(), cell("inc_at_k").c_str(),
                  cell("exposure_inc_at_k").c_str());
    out << line;
  }
}

}  // namespace increc
