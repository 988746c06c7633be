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

// Little-endian binary streams used by checkpoints and sample bundles.

#ifndef INCREC_BINARY_IO_H_
#define INCREC_BINARY_IO_H_

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "increc/common.h"

namespace increc {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  template <typename T>
    requires std::is_arithmetic_v<T>
  void Put(T value) {
    out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }

  template <typename T>
    requires std::is_arithmetic_v<T>
  void PutArray(std::span<const T> values) {
    out_.write(reinterpret_cast<const char*>(values.data()),
               static_cast<std::streamsize>(values.size_bytes()));
  }

  template <typename T>
  void PutVector(const std::vector<T>& values) {
    Put<uint64_t>(values.size());
    PutArray<T>(values);
  }

  void PutBytes(std::string_view bytes) { out_.write(bytes.data(), bytes.size()); }

  bool ok() const { return static_cast<bool>(out_); }

 private:
  std::ostream& out_;
};

class BinaryReader {
 public:
  BinaryReader(std::istream& in, std::string what) : in_(in), what_(std::move(what)) {}

  template <typename T>
    requires std::is_arithmetic_v<T>
  T Get() {
    T value{};
    Read(reinterpret_cast<char*>(&value), sizeof(T));
    return value;
  }

  template <typename T>
    requires std::is_arithmetic_v<T>
  void GetArray(std::span<T> out) {
    Read(reinterpret_cast<char*>(out.data()), out.size_bytes());
  }

  template <typename T>
  std::vector<T> GetVector(uint64_t max_size = uint64_t{1} << 34) {
    uint64_t n = Get<uint64_t>();
    if (n > max_size) throw InputError(what_ + ": implausible array length");
    std::vector<T> values(n);
    GetArray<T>(values);
    return values;
  }

  std::string GetBytes(size_t n) {
    std::string s(n, '\0');
    Read(s.data(), n);
    return s;
  }

 private:
  void Read(char* dst, size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<size_t>(in_.gcount()) != n) {
      throw InputError(what_ + ": truncated file");
    }
  }

  std::istream& in_;
  std::string what_;
};

}  // namespace increc

#endif  // INCREC_BINARY_IO_H_
