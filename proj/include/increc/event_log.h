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

// Ingestion of cross-scenario interaction logs and per-request context
// materialization.
//
// Log lines are tab separated:
//   user_id  item_id  scenario_id  kind  timestamp
// with kind one of EXPOSE, CLICK, ORDER, REQUEST. Scenario 0 is the homepage;
// REQUEST lines must be homepage lines and their item_id is ignored.

#ifndef INCREC_EVENT_LOG_H_
#define INCREC_EVENT_LOG_H_

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "increc/common.h"

namespace increc {

enum class EventKind : uint8_t { kExposure, kClick, kOrder, kRequest };

std::string_view EventKindName(EventKind kind);
std::optional<EventKind> ParseEventKind(std::string_view token);

struct Event {
  UserId user = 0;
  ItemId item = kNoItem;
  int scenario = 0;
  EventKind kind = EventKind::kClick;
  Timestamp time = 0;
};

// Maps raw 64-bit ids onto dense indices 0..N-1 in first-seen order.
class IdVocab {
 public:
  int32_t Add(int64_t raw);
  std::optional<int32_t> Find(int64_t raw) const;
  int64_t Raw(int32_t dense) const { return raw_[dense]; }
  int32_t size() const { return static_cast<int32_t>(raw_.size()); }
  const std::vector<int64_t>& raw_ids() const { return raw_; }

 private:
  std::unordered_map<int64_t, int32_t> index_;
  std::vector<int64_t> raw_;
};

struct EventLog {
  IdVocab users;
  IdVocab items;
  // One time-sorted stream per dense user id.
  std::vector<std::vector<Event>> streams;
  // Click + Order count per dense item id.
  std::vector<int64_t> popularity;
  size_t num_events = 0;

  int32_t num_users() const { return users.size(); }
  int32_t num_items() const { return items.size(); }
};

EventLog ParseEventLog(std::istream& in);
EventLog ReadEventLog(const std::filesystem::path& path);

// Categorical user profile: a fixed number of slots, each with its own
// vocabulary. Id 0 in every slot is the reserved "unknown" value.
struct UserProfiles {
  int num_slots = 4;
  std::vector<std::vector<int32_t>> values;  // [dense user][slot]
  std::vector<int32_t> slot_vocab_sizes;     // includes the unknown id

  std::vector<int32_t> ForUser(UserId user) const;
};

// Parses `user_id \t a1,a2,...` lines. Users absent from the log are skipped,
// users absent from the file get all-unknown profiles.
UserProfiles ParseUserProfiles(std::istream& in, const EventLog& log,
                               int num_slots = 4);
UserProfiles EmptyUserProfiles(const EventLog& log, int num_slots = 4);

// Item side features (category, brand). Id 0 is "unknown" for both.
struct ItemCatalog {
  std::vector<int32_t> category;  // [dense item]
  std::vector<int32_t> brand;
  int32_t num_categories = 1;
  int32_t num_brands = 1;

  int32_t size() const { return static_cast<int32_t>(category.size()); }
};

// Parses `item_id \t category_id,brand_id` lines.
ItemCatalog ParseItemCatalog(std::istream& in, const EventLog& log);
ItemCatalog EmptyItemCatalog(const EventLog& log);

struct Behavior {
  ItemId item = kNoItem;
  int scenario = 0;
  Timestamp time = 0;
};

// One homepage request at time `time` and everything attributed to it.
struct RequestContext {
  UserId user = 0;
  Timestamp time = 0;
  // Exclusive end of attribution: the next request of the same user, or
  // unbounded for the last one.
  Timestamp next_request = 0;
  std::vector<int32_t> profile;
  // Most recent Click/Order events strictly before `time`, oldest first.
  std::vector<Behavior> behaviors;
  // Homepage exposures in (time, next_request], sorted and unique.
  std::vector<ItemId> exposed;
  // Orders in any scenario in (time, time + horizon], sorted and unique.
  std::vector<ItemId> targets;

  bool trainable() const { return !targets.empty(); }
};

struct RequestOptions {
  // Targets are also cut at the user's next homepage request.
  Timestamp horizon = kDayMs;
  int max_seq = 50;
};

std::vector<RequestContext> BuildRequests(const EventLog& log,
                                          const UserProfiles& profiles,
                                          const RequestOptions& options);

}  // namespace increc

#endif  // INCREC_EVENT_LOG_H_
