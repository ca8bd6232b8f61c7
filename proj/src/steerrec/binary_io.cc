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

#include "steerrec/binary_io.h"

#include <bit>

#include "steerrec/text.h"

namespace steerrec {

static_assert(std::endian::native == std::endian::little,
              "artifact format assumes a little-endian host");

BinaryWriter::BinaryWriter(std::string_view magic, uint32_t version) {
  buf_.append(magic.substr(0, 8));
  buf_.resize(8, '\0');
  U32(version);
}

void BinaryWriter::Str(std::string_view s) {
  U64(s.size());
  buf_.append(s);
}

void BinaryWriter::F64s(const double* data, size_t n) {
  Raw(data, n * sizeof(double));
}

void BinaryWriter::Save(const std::string& path) const { WriteFile(path, buf_); }

BinaryReader::BinaryReader(std::string bytes, std::string_view magic,
                           uint32_t expected_version)
    : buf_(std::move(bytes)) {
  std::string want(magic.substr(0, 8));
  want.resize(8, '\0');
  if (buf_.size() < 12 || buf_.compare(0, 8, want) != 0) {
    throw Error(ErrorCode::kParse, "not a " + std::string(magic) + " artifact");
  }
  pos_ = 8;
  const uint32_t version = U32();
  if (version != expected_version) {
    throw Error(ErrorCode::kConfig,
                std::string(magic) + " artifact version " +
                    std::to_string(version) + ", expected " +
                    std::to_string(expected_version));
  }
}

BinaryReader BinaryReader::Open(const std::string& path, std::string_view magic,
                                uint32_t expected_version) {
  return BinaryReader(ReadFile(path), magic, expected_version);
}

std::string BinaryReader::Str() {
  const uint64_t n = U64();
  Need(n);
  std::string s = buf_.substr(pos_, n);
  pos_ += n;
  return s;
}

void BinaryReader::F64s(double* out, size_t n) {
  Need(n * sizeof(double));
  std::memcpy(out, buf_.data() + pos_, n * sizeof(double));
  pos_ += n * sizeof(double);
}

void BinaryReader::Need(size_t n) const {
  if (n > buf_.size() - pos_) {
    throw Error(ErrorCode::kParse, "truncated artifact");
  }
}

}  // namespace steerrec
