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

#include <sstream>

#include "doctest.h"
#include "increc/event_log.h"

namespace increc {
namespace {

EventLog Parse(const std::string& text) {
  std::istringstream in(text);
  return ParseEventLog(in);
}

std::string ErrorOf(const std::string& text) {
  try {
    Parse(text);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

TEST_CASE("empty input is rejected") {
  CHECK(ErrorOf("") == "empty log");
  CHECK(ErrorOf("\n\n") == "empty log");
}

TEST_CASE("three orders of one user") {
  EventLog log = Parse(
      "7\t100\t0\tORDER\t3\n"
      "7\t101\t1\tORDER\t1\n"
      "7\t100\t2\tORDER\t2\n");
  CHECK(log.num_users() == 1);
  CHECK(log.num_items() == 2);
  CHECK(log.num_events == 3);
  REQUIRE(log.streams[0].size() == 3);
  CHECK(log.streams[0][0].time == 1);
  CHECK(log.streams[0][1].time == 2);
  CHECK(log.streams[0][2].time == 3);
  CHECK(log.popularity[*log.items.Find(100)] == 2);
  CHECK(log.popularity[*log.items.Find(101)] == 1);
}

TEST_CASE("ids are dense in first-seen order") {
  EventLog log = Parse(
      "50\t9\t0\tCLICK\t5\n"
      "40\t8\t0\tEXPOSE\t6\n"
      "50\t7\t0\tCLICK\t7\n");
  CHECK(log.users.Raw(0) == 50);
  CHECK(log.users.Raw(1) == 40);
  CHECK(*log.items.Find(9) == 0);
  CHECK(*log.items.Find(8) == 1);
  CHECK(*log.items.Find(7) == 2);
  CHECK(log.popularity == std::vector<int64_t>{1, 0, 1});
}

TEST_CASE("ties keep input order") {
  EventLog log = Parse(
      "1\t3\t0\tCLICK\t10\n"
      "1\t2\t0\tCLICK\t10\n"
      "1\t1\t0\tCLICK\t5\n");
  const auto& s = log.streams[0];
  CHECK(log.items.Raw(s[0].item) == 1);
  CHECK(log.items.Raw(s[1].item) == 3);
  CHECK(log.items.Raw(s[2].item) == 2);
}

TEST_CASE("malformed line is reported with its number") {
  std::string text;
  for (int i = 1; i <= 100; ++i) {
    if (i == 57) {
      text += "1\t2\t0\tCLICK\n";
    } else {
      text += "1\t" + std::to_string(i) + "\t0\tCLICK\t" + std::to_string(i) + "\n";
    }
  }
  CHECK(ErrorOf(text).rfind("line 57:", 0) == 0);
}

TEST_CASE("bad fields are rejected") {
  CHECK(ErrorOf("1\t2\t0\tBUY\t3\n").find("unknown event kind") != std::string::npos);
  CHECK(ErrorOf("1\tx\t0\tCLICK\t3\n").find("line 1") != std::string::npos);
  CHECK(ErrorOf("1\t2\t-1\tCLICK\t3\n").find("scenario") != std::string::npos);
  CHECK(ErrorOf("1\t0\t2\tREQUEST\t3\n").find("homepage") != std::string::npos);
}

TEST_CASE("windows line endings are accepted") {
  EventLog log = Parse("1\t2\t0\tCLICK\t3\r\n");
  CHECK(log.num_events == 1);
}

TEST_CASE("profiles and catalog") {
  EventLog log = Parse(
      "1\t10\t0\tCLICK\t1\n"
      "2\t11\t0\tCLICK\t2\n"
      "3\t12\t0\tCLICK\t3\n");
  std::istringstream attrs("2\tf,x\n1\tm,,z\n99\tm\n");
  UserProfiles p = ParseUserProfiles(attrs, log, 3);
  CHECK(p.ForUser(0) == std::vector<int32_t>{2, 0, 1});
  CHECK(p.ForUser(1) == std::vector<int32_t>{1, 1, 0});
  CHECK(p.ForUser(2) == std::vector<int32_t>{0, 0, 0});
  CHECK(p.slot_vocab_sizes == std::vector<int32_t>{3, 2, 2});

  std::istringstream feats("11\t5,9\n10\t5,8\n77\t1,1\n");
  ItemCatalog c = ParseItemCatalog(feats, log);
  CHECK(c.category == std::vector<int32_t>{1, 1, 0});
  CHECK(c.brand == std::vector<int32_t>{2, 1, 0});
  CHECK(c.num_categories == 2);
  CHECK(c.num_brands == 3);

  std::istringstream bad("10\t5\n");
  CHECK_THROWS_AS(ParseItemCatalog(bad, log), InputError);
}

TEST_CASE("request targets span scenarios") {
  EventLog log = Parse(
      "1\t0\t0\tREQUEST\t1000\n"
      "1\t1\t0\tEXPOSE\t1001\n"
      "1\t1\t0\tORDER\t1001\n"
      "1\t4\t2\tORDER\t1002\n");
  auto reqs = BuildRequests(log, EmptyUserProfiles(log), {});
  REQUIRE(reqs.size() == 1);
  std::vector<ItemId> want{*log.items.Find(1), *log.items.Find(4)};
  std::sort(want.begin(), want.end());
  CHECK(reqs[0].targets == want);
  CHECK(reqs[0].exposed == std::vector<ItemId>{*log.items.Find(1)});
  CHECK(reqs[0].trainable());
}

TEST_CASE("request without later events is untrainable") {
  EventLog log = Parse(
      "1\t5\t0\tCLICK\t10\n"
      "1\t0\t0\tREQUEST\t1000\n");
  auto reqs = BuildRequests(log, EmptyUserProfiles(log), {});
  REQUIRE(reqs.size() == 1);
  CHECK(reqs[0].targets.empty());
  CHECK_FALSE(reqs[0].trainable());
  CHECK(reqs[0].behaviors.size() == 1);
}

TEST_CASE("behaviors keep the most recent max_seq") {
  std::string text;
  for (int i = 0; i < 60; ++i) {
    text += "1\t" + std::to_string(100 + i) + "\t" + std::to_string(i % 3) + "\tCLICK\t" +
            std::to_string(i) + "\n";
  }
  text += "1\t0\t0\tREQUEST\t1000\n";
  EventLog log = Parse(text);
  auto reqs = BuildRequests(log, EmptyUserProfiles(log), {kDayMs, 50});
  const auto& b = reqs[0].behaviors;
  REQUIRE(b.size() == 50);
  CHECK(b.front().time == 10);
  CHECK(b.back().time == 59);
  CHECK(log.items.Raw(b.front().item) == 110);
}

TEST_CASE("attribution windows") {
  // Request at 1000, next at 5000, horizon 3000.
  EventLog log = Parse(
      "1\t0\t0\tREQUEST\t1000\n"
      "1\t1\t0\tORDER\t1000\n"     // not after the request
      "1\t2\t1\tORDER\t3999\n"     // inside
      "1\t3\t1\tORDER\t4001\n"     // past the horizon
      "1\t4\t0\tEXPOSE\t5000\n"    // last exposure of the window
      "1\t5\t1\tEXPOSE\t2000\n"    // not the homepage
      "1\t0\t0\tREQUEST\t5000\n");
  auto reqs = BuildRequests(log, EmptyUserProfiles(log), {3000, 50});
  REQUIRE(reqs.size() == 2);
  CHECK(reqs[0].targets == std::vector<ItemId>{*log.items.Find(2)});
  CHECK(reqs[0].exposed == std::vector<ItemId>{*log.items.Find(4)});
  CHECK(reqs[0].next_request == 5000);
  CHECK(reqs[1].behaviors.size() == 3);
}

}  // namespace
}  // namespace increc
