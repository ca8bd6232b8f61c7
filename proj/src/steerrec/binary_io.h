// Copyright 2026 The steerrec Authors.
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

// Versioned little-endian binary artifacts. Every artifact starts with an
// 8-byte magic and a uint32 format version.

#ifndef STEERREC_BINARY_IO_H_
#define STEERREC_BINARY_IO_H_

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "steerrec/error.h"

namespace steerrec {

class BinaryWriter {
 public:
  BinaryWriter(std::string_view magic, uint32_t version);

  void U32(uint32_t v) { Raw(&v, sizeof(v)); }
  void U64(uint64_t v) { Raw(&v, sizeof(v)); }
  void I64(int64_t v) { Raw(&v, sizeof(v)); }
  void F64(double v) { Raw(&v, sizeof(v)); }
  void Str(std::string_view s);
  void F64s(const double* data, size_t n);

  const std::string& bytes() const { return buf_; }
  void Save(const std::string& path) const;

 private:
  void Raw(const void* p, size_t n) {
    buf_.append(static_cast<const char*>(p), n);
  }
  std::string buf_;
};

class BinaryReader {
 public:
  // Throws kParse when the magic differs and kConfig when the version is not
  // `expected_version`.
  BinaryReader(std::string bytes, std::string_view magic,
               uint32_t expected_version);
  static BinaryReader Open(const std::string& path, std::string_view magic,
                           uint32_t expected_version);

  uint32_t U32() { return Pod<uint32_t>(); }
  uint64_t U64() { return Pod<uint64_t>(); }
  int64_t I64() { return Pod<int64_t>(); }
  double F64() { return Pod<double>(); }
  std::string Str();
  void F64s(double* out, size_t n);

  bool AtEnd() const { return pos_ == buf_.size(); }

 private:
  template <typename T>
  T Pod() {
    Need(sizeof(T));
    T v;
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void Need(size_t n) const;

  std::string buf_;
  size_t pos_ = 0;
};

}  // namespace steerrec

#endif  // STEERREC_BINARY_IO_H_
