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

#include "increc/event_log.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

namespace increc {
namespace {

std::vector<std::string_view> SplitFields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::optional<int64_t> ParseInt(std::string_view token) {
  int64_t value = 0;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || token.empty()) return std::nullopt;
  return value;
}

std::string_view StripCr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

[[noreturn]] void FailAt(size_t line_no, const std::string& what) {
  throw InputError("line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

std::string_view EventKindName(EventKind kind) {
  switch (kind) {
    case EventKind::kExposure:
      return "EXPOSE";
    case EventKind::kClick:
      return "CLICK";
    case EventKind::kOrder:
      return "ORDER";
    case EventKind::kRequest:
      return "REQUEST";
  }
  return "?";
}

std::optional<EventKind> ParseEventKind(std::string_view token) {
  if (token == "EXPOSE") return EventKind::kExposure;
  if (token == "CLICK") return EventKind::kClick;
  if (token == "ORDER") return EventKind::kOrder;
  if (token == "REQUEST") return EventKind::kRequest;
  return std::nullopt;
}

int32_t IdVocab::Add(int64_t raw) {
  auto [it, inserted] = index_.try_emplace(raw, static_cast<int32_t>(raw_.size()));
  if (inserted) raw_.push_back(raw);
  return it->second;
}

std::optional<int32_t> IdVocab::Find(int64_t raw) const {
  auto it = index_.find(raw);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EventLog ParseEventLog(std::istream& in) {
  EventLog log;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = StripCr(line);
    if (view.empty()) continue;
    auto fields = SplitFields(view, '\t');
    if (fields.size() != 5) {
      FailAt(line_no, "expected 5 tab-separated fields, got " +
                          std::to_string(fields.size()));
    }
    auto user = ParseInt(fields[0]);
    auto item = ParseInt(fields[1]);
    auto scenario = ParseInt(fields[2]);
    auto time = ParseInt(fields[4]);
    if (!user || !item || !scenario || !time) {
      FailAt(line_no, "non-integer id, scenario or timestamp");
    }
    auto kind = ParseEventKind(fields[3]);
    if (!kind) {
      FailAt(line_no, "unknown event kind '" + std::string(fields[3]) + "'");
    }
    if (*scenario < 0 || *scenario > std::numeric_limits<int>::max()) {
      FailAt(line_no, "scenario id out of range");
    }
    if (*kind == EventKind::kRequest && *scenario != 0) {
      FailAt(line_no, "REQUEST must be a homepage (scenario 0) event");
    }

    Event event;
    event.user = log.users.Add(*user);
    event.item =
        *kind == EventKind::kRequest ? kNoItem : log.items.Add(*item);
    event.scenario = static_cast<int>(*scenario);
    event.kind = *kind;
    event.time = *time;
    if (static_cast<size_t>(event.user) >= log.streams.size()) {
      log.streams.resize(event.user + 1);
    }
    log.streams[event.user].push_back(event);
    ++log.num_events;
  }
  if (log.num_events == 0) throw InputError("empty log");

  for (auto& stream : log.streams) {
    std::stable_sort(stream.begin(), stream.end(),
                     [](const Event& a, const Event& b) { return a.time < b.time; });
  }
  log.popularity.assign(log.num_items(), 0);
  for (const auto& stream : log.streams) {
    for (const Event& e : stream) {
      if (e.kind == EventKind::kClick || e.kind == EventKind::kOrder) {
        ++log.popularity[e.item];
      }
    }
  }
  return log;
}

EventLog ReadEventLog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open event log " + path.string());
  return ParseEventLog(in);
}

std::vector<int32_t> UserProfiles::ForUser(UserId user) const {
  if (static_cast<size_t>(user) < values.size()) return values[user];
  return std::vector<int32_t>(num_slots, 0);
}

UserProfiles EmptyUserProfiles(const EventLog& log, int num_slots) {
  UserProfiles profiles;
  profiles.num_slots = num_slots;
  profiles.values.assign(log.num_users(), std::vector<int32_t>(num_slots, 0));
  profiles.slot_vocab_sizes.assign(num_slots, 1);
  return profiles;
}

UserProfiles ParseUserProfiles(std::istream& in, const EventLog& log,
                               int num_slots) {
  if (num_slots <= 0) throw InputError("profile slot count must be positive");
  UserProfiles profiles = EmptyUserProfiles(log, num_slots);
  std::vector<std::unordered_map<std::string, int32_t>> slot_index(num_slots);

  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = StripCr(line);
    if (view.empty()) continue;
    auto fields = SplitFields(view, '\t');
    if (fields.size() != 2) FailAt(line_no, "expected user_id<TAB>attributes");
    auto raw_user = ParseInt(fields[0]);
    if (!raw_user) FailAt(line_no, "non-integer user id");
    auto attrs = SplitFields(fields[1], ',');
    auto user = log.users.Find(*raw_user);
    if (!user) continue;
    for (int slot = 0; slot < num_slots; ++slot) {
      if (slot >= static_cast<int>(attrs.size()) || attrs[slot].empty()) {
        continue;
      }
      auto& index = slot_index[slot];
      auto [it, inserted] = index.try_emplace(
          std::string(attrs[slot]), static_cast<int32_t>(index.size() + 1));
      profiles.values[*user][slot] = it->second;
    }
  }
  for (int slot = 0; slot < num_slots; ++slot) {
    profiles.slot_vocab_sizes[slot] =
        static_cast<int32_t>(slot_index[slot].size() + 1);
  }
  return profiles;
}

ItemCatalog EmptyItemCatalog(const EventLog& log) {
  ItemCatalog catalog;
  catalog.category.assign(log.num_items(), 0);
  catalog.brand.assign(log.num_items(), 0);
  return catalog;
}

ItemCatalog ParseItemCatalog(std::istream& in, const EventLog& log) {
  ItemCatalog catalog = EmptyItemCatalog(log);
  IdVocab categories;
  IdVocab brands;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = StripCr(line);
    if (view.empty()) continue;
    auto fields = SplitFields(view, '\t');
    if (fields.size() != 2) FailAt(line_no, "expected item_id<TAB>category,brand");
    auto raw_item = ParseInt(fields[0]);
    auto feats = SplitFields(fields[1], ',');
    if (!raw_item || feats.size() != 2) FailAt(line_no, "malformed item features");
    auto category = ParseInt(feats[0]);
    auto brand = ParseInt(feats[1]);
    if (!category || !brand) FailAt(line_no, "non-integer category or brand");
    auto item = log.items.Find(*raw_item);
    if (!item) continue;
    catalog.category[*item] = categories.Add(*category) + 1;
    catalog.brand[*item] = brands.Add(*brand) + 1;
  }
  catalog.num_categories = categories.size() + 1;
  catalog.num_brands = brands.size() + 1;
  return catalog;
}

std::vector<RequestContext> BuildRequests(const EventLog& log,
                                          const UserProfiles& profiles,
                                          const RequestOptions& options) {
  std::vector<RequestContext> requests;
  constexpr Timestamp kForever = std::numeric_limits<Timestamp>::max();

  for (UserId user = 0; user < static_cast<UserId>(log.streams.size()); ++user) {
    const auto& stream = log.streams[user];
    std::vector<Behavior> history;  // Click/Order, time-sorted
    std::vector<Timestamp> history_times;
    std::vector<Timestamp> request_times;
    for (const Event& e : stream) {
      if (e.kind == EventKind::kClick || e.kind == EventKind::kOrder) {
        history.push_back({e.item, e.scenario, e.time});
        history_times.push_back(e.time);
      } else if (e.kind == EventKind::kRequest) {
        request_times.push_back(e.time);
      }
    }

    for (size_t r = 0; r < request_times.size(); ++r) {
      RequestContext ctx;
      ctx.user = user;
      ctx.time = request_times[r];
      ctx.next_request = r + 1 < request_times.size() ? request_times[r + 1] : kForever;
      ctx.profile = profiles.ForUser(user);

      size_t end = std::lower_bound(history_times.begin(), history_times.end(), ctx.time) -
                   history_times.begin();
      size_t begin = end > static_cast<size_t>(options.max_seq) ? end - options.max_seq : 0;
      ctx.behaviors.assign(history.begin() + begin, history.begin() + end);

      Timestamp target_end = ctx.next_request;
      if (ctx.time <= kForever - options.horizon) {
        target_end = std::min(target_end, ctx.time + options.horizon);
      }
      for (const Event& e : stream) {
        if (e.time <= ctx.time) continue;
        if (e.time > ctx.next_request) break;
        if (e.kind == EventKind::kExposure && e.scenario == 0) {
          ctx.exposed.push_back(e.item);
        }
        if (e.kind == EventKind::kOrder && e.time <= target_end) {
          ctx.targets.push_back(e.item);
        }
      }
      for (auto* set : {&ctx.exposed, &ctx.targets}) {
        std::sort(set->begin(), set->end());
        set->erase(std::unique(set->begin(), set->end()), set->end());
      }
      requests.push_back(std::move(ctx));
    }
  }
  return requests;
}

}  // namespace increc
