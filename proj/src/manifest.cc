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

#include "increc/manifest.h"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

#include "json.hpp"

namespace increc {
namespace {

using Json = nlohmann::ordered_json;

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw InvariantError("sha256 init failed");
    }
  }
  void Update(const char* data, size_t n) {
    if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw InvariantError("sha256 update failed");
  }
  std::string HexDigest() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), digest.data(), &len) != 1) {
      throw InvariantError("sha256 final failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += kHex[digest[i] >> 4];
      out += kHex[digest[i] & 15];
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

std::string Relative(const std::filesystem::path& root, const std::filesystem::path& file) {
  return std::filesystem::relative(file, root).generic_string();
}

}  // namespace

std::string Sha256Hex(std::string_view bytes) {
  Sha256 h;
  h.Update(bytes.data(), bytes.size());
  return h.HexDigest();
}

std::string Sha256File(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("missing file " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    h.Update(buf.data(), static_cast<size_t>(in.gcount()));
  }
  return h.HexDigest();
}

void RecordFile(std::map<std::string, std::string>& into, const std::filesystem::path& root,
                const std::filesystem::path& file) {
  into[Relative(root, file)] = Sha256File(file);
}

void WriteManifest(const Manifest& m, const std::filesystem::path& path) {
  Json j;
  j["stage"] = m.stage;
  j["seed"] = m.seed;
  Json config = Json::object();
  for (const auto& [k, v] : m.config) config[k] = v;
  j["config"] = config;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["timings_ms"] = m.timings_ms;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Manifest ReadManifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("missing manifest " + path.string());
  Manifest m;
  try {
    Json j = Json::parse(in);
    m.stage = j.at("stage").get<std::string>();
    m.seed = j.at("seed").get<uint64_t>();
    for (const auto& [k, v] : j.at("config").items()) m.config.emplace_back(k, v.get<std::string>());
    m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    m.timings_ms = j.at("timings_ms").get<std::map<std::string, double>>();
  } catch (const Json::exception& e) {
    throw InputError("malformed manifest " + path.string() + ": " + e.what());
  }
  return m;
}

void VerifyOutputs(const Manifest& manifest, const std::filesystem::path& root) {
  for (const auto& [rel, hash] : manifest.outputs) {
    const auto file = root / rel;
    if (!std::filesystem::exists(file)) {
      throw ChainError("manifest chain broken: " + rel + " recorded by stage " +
                       manifest.stage + " is missing");
    }
    if (Sha256File(file) != hash) {
      throw ChainError("manifest chain mismatch: " + rel + " changed after stage " +
                       manifest.stage + " wrote it");
    }
  }
}

void VerifyInput(const Manifest& manifest, const std::filesystem::path& root,
                 const std::filesystem::path& file) {
  const std::string rel = Relative(root, file);
  auto it = manifest.inputs.find(rel);
  if (it == manifest.inputs.end()) {
    throw ChainError("manifest chain mismatch: stage " + manifest.stage + " did not read " + rel);
  }
  if (it->second != Sha256File(file)) {
    throw ChainError("manifest chain mismatch: stage " + manifest.stage +
                     " used a different version of " + rel);
  }
}

}  // namespace increc
