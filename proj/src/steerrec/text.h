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

// Small text helpers shared by ingestion, the featurizer and the synthetic
// judge. Everything here is locale-independent and ASCII-only so results are
// identical across platforms.

#ifndef STEERREC_TEXT_H_
#define STEERREC_TEXT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace steerrec {

// 64-bit FNV-1a. Used wherever a hash must be stable across runs and
// standard library implementations (split assignment, feature hashing).
uint64_t Fnv1a64(std::string_view data, uint64_t seed = 0xcbf29ce484222325ULL);

std::string ToLower(std::string_view s);
std::string_view Trim(std::string_view s);
std::string Join(const std::vector<std::string>& parts, std::string_view sep);
std::vector<std::string> SplitString(std::string_view s, char sep);

// Lowercased word tokens. Letters, digits and word-internal hyphens are kept
// ("sci-fi" stays one token); apostrophes are dropped ("don't" -> "dont").
std::vector<std::string> Tokenize(std::string_view text);

// Light plural stripping: "comedies" -> "comedy", "zombies" and "zombie" ->
// "zomby",
// "1990s" -> "1990". Idempotent.
std::string Stem(std::string_view token);

bool IsStopword(std::string_view token);

// Splits one RFC 4180 style CSV record. Returns nullopt on an unterminated
// quoted field.
std::optional<std::vector<std::string>> SplitCsvRow(std::string_view line);

// Reads a whole file; throws Error(kIo) when it cannot be opened.
std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view contents);

}  // namespace steerrec

#endif  // STEERREC_TEXT_H_
