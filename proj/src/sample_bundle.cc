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

#include "increc/sample_bundle.h"

#include <fstream>

#include "increc/binary_io.h"

namespace increc {
namespace {

constexpr char kMagic[8] = {'I', 'N', 'C', 'R', 'E', 'C', 'S', 'B'};
constexpr uint32_t kVersion = 1;

void PutRequest(BinaryWriter& w, const RequestContext& ctx) {
  w.Put<int32_t>(ctx.user);
  w.Put<int64_t>(ctx.time);
  w.Put<int64_t>(ctx.next_request);
  w.PutVector(ctx.profile);
  w.Put<uint64_t>(ctx.behaviors.size());
  for (const Behavior& b : ctx.behaviors) {
    w.Put<int32_t>(b.item);
    w.Put<int32_t>(b.scenario);
    w.Put<int64_t>(b.time);
  }
  w.PutVector(ctx.exposed);
  w.PutVector(ctx.targets);
}

RequestContext GetRequest(BinaryReader& r) {
  RequestContext ctx;
  ctx.user = r.Get<int32_t>();
  ctx.time = r.Get<int64_t>();
  ctx.next_request = r.Get<int64_t>();
  ctx.profile = r.GetVector<int32_t>();
  ctx.behaviors.resize(r.Get<uint64_t>());
  for (Behavior& b : ctx.behaviors) {
    b.item = r.Get<int32_t>();
    b.scenario = r.Get<int32_t>();
    b.time = r.Get<int64_t>();
  }
  ctx.exposed = r.GetVector<int32_t>();
  ctx.targets = r.GetVector<int32_t>();
  return ctx;
}

void CheckIds(std::span<const ItemId> ids, int32_t limit, const char* what) {
  for (ItemId id : ids) {
    if (id < 0 || id >= limit) throw InputError(std::string("sample bundle: bad ") + what);
  }
}

}  // namespace

std::vector<size_t> SampleBundle::TestRequests() const {
  std::vector<size_t> out;
  for (size_t r = 0; r < requests.size(); ++r) {
    if (is_test[r]) out.push_back(r);
  }
  return out;
}

std::vector<uint8_t> LastRequestSplit(std::span<const RequestContext> requests) {
  std::vector<uint8_t> is_test(requests.size(), 0);
  for (size_t r = 0; r < requests.size(); ++r) {
    const bool last = r + 1 == requests.size() || requests[r + 1].user != requests[r].user;
    is_test[r] = last ? 1 : 0;
  }
  return is_test;
}

void WriteSampleBundle(const SampleBundle& bundle, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  BinaryWriter w(out);
  w.PutBytes(std::string_view(kMagic, sizeof(kMagic)));
  w.Put<uint32_t>(kVersion);
  w.PutVector(bundle.raw_users);
  w.PutVector(bundle.raw_items);
  w.PutVector(bundle.catalog.category);
  w.PutVector(bundle.catalog.brand);
  w.Put<int32_t>(bundle.catalog.num_categories);
  w.Put<int32_t>(bundle.catalog.num_brands);
  w.PutVector(bundle.profile_vocab);
  w.Put<uint64_t>(bundle.requests.size());
  for (const RequestContext& ctx : bundle.requests) PutRequest(w, ctx);
  w.PutVector(bundle.is_test);
  w.Put<uint64_t>(bundle.partitions.size());
  for (const SamplePartition& p : bundle.partitions) {
    w.Put<uint64_t>(p.request);
    w.PutVector(p.retrieved);
    w.PutVector(p.rtg);
    w.PutVector(p.itg);
  }
  w.Put<uint64_t>(bundle.examples.size());
  for (const TrainingExample& ex : bundle.examples) {
    w.Put<uint32_t>(ex.request);
    w.Put<int32_t>(ex.positive);
    w.Put<uint8_t>(static_cast<uint8_t>(ex.group));
    w.PutVector(ex.negatives);
  }
  if (!w.ok()) throw InputError("failed writing " + path.string());
}

SampleBundle ReadSampleBundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("missing sample bundle " + path.string());
  BinaryReader r(in, "sample bundle " + path.string());
  if (r.GetBytes(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) {
    throw InputError(path.string() + " is not a sample bundle");
  }
  if (r.Get<uint32_t>() != kVersion) throw InputError("unsupported sample bundle version");
  SampleBundle b;
  b.raw_users = r.GetVector<int64_t>();
  b.raw_items = r.GetVector<int64_t>();
  b.catalog.category = r.GetVector<int32_t>();
  b.catalog.brand = r.GetVector<int32_t>();
  b.catalog.num_categories = r.Get<int32_t>();
  b.catalog.num_brands = r.Get<int32_t>();
  b.profile_vocab = r.GetVector<int32_t>();
  b.requests.resize(r.Get<uint64_t>());
  for (RequestContext& ctx : b.requests) ctx = GetRequest(r);
  b.is_test = r.GetVector<uint8_t>();
  b.partitions.resize(r.Get<uint64_t>());
  for (SamplePartition& p : b.partitions) {
    p.request = r.Get<uint64_t>();
    p.retrieved = r.GetVector<int32_t>();
    p.rtg = r.GetVector<int32_t>();
    p.itg = r.GetVector<int32_t>();
  }
  b.examples.resize(r.Get<uint64_t>());
  for (TrainingExample& ex : b.examples) {
    ex.request = r.Get<uint32_t>();
    ex.positive = r.Get<int32_t>();
    const uint8_t group = r.Get<uint8_t>();
    if (group > 2) throw InputError("sample bundle: bad example group");
    ex.group = static_cast<SampleGroup>(group);
    ex.negatives = r.GetVector<int32_t>();
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw InputError("sample bundle: trailing bytes");
  }

  const int32_t n_items = b.num_items();
  if (b.catalog.size() != n_items || b.is_test.size() != b.requests.size() ||
      b.partitions.size() != b.requests.size()) {
    throw InputError("sample bundle: inconsistent section sizes");
  }
  for (const RequestContext& ctx : b.requests) {
    if (ctx.user < 0 || ctx.user >= static_cast<int32_t>(b.raw_users.size()) ||
        ctx.profile.size() != b.profile_vocab.size()) {
      throw InputError("sample bundle: bad request");
    }
    CheckIds(ctx.exposed, n_items, "exposed item");
    CheckIds(ctx.targets, n_items, "target item");
    for (const Behavior& beh : ctx.behaviors) CheckIds({&beh.item, 1}, n_items, "behavior item");
  }
  for (const TrainingExample& ex : b.examples) {
    if (ex.request >= b.requests.size()) throw InputError("sample bundle: bad example request");
    CheckIds({&ex.positive, 1}, n_items, "example item");
    CheckIds(ex.negatives, n_items, "negative item");
  }
  return b;
}

}  // namespace increc
