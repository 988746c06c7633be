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

// Per-stage run manifests: configuration snapshot, seed, SHA-256 of inputs
// and outputs (paths relative to the run root) and timings.

#ifndef INCREC_MANIFEST_H_
#define INCREC_MANIFEST_H_

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "increc/common.h"

namespace increc {

// Raised when recorded hashes do not match the files on disk.
class ChainError : public Error {
 public:
  using Error::Error;
};

std::string Sha256Hex(std::string_view bytes);
std::string Sha256File(const std::filesystem::path& path);

struct Manifest {
  std::string stage;
  uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config;
  std::map<std::string, std::string> inputs;   // relative path -> sha256
  std::map<std::string, std::string> outputs;  // relative path -> sha256
  std::map<std::string, double> timings_ms;
};

// Hashes `file` and records it under its path relative to `root`.
void RecordFile(std::map<std::string, std::string>& into, const std::filesystem::path& root,
                const std::filesystem::path& file);

void WriteManifest(const Manifest& manifest, const std::filesystem::path& path);
Manifest ReadManifest(const std::filesystem::path& path);

// Throws ChainError unless every output recorded by `manifest` exists under
// `root` with the recorded hash.
void VerifyOutputs(const Manifest& manifest, const std::filesystem::path& root);

// Throws ChainError unless `manifest` recorded `file` (relative to `root`) as
// an input with the file's current hash.
void VerifyInput(const Manifest& manifest, const std::filesystem::path& root,
                 const std::filesystem::path& file);

}  // namespace increc

#endif  // INCREC_MANIFEST_H_
