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

#include "steerrec/text.h"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include "steerrec/error.h"

namespace steerrec {

namespace {

bool IsAlnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9');
}

char Lower(char c) { return (c >= 'A' && c <= 'Z') ? c - 'A' + 'a' : c; }

bool AllDigits(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

constexpr std::array<std::string_view, 48> kStopwords = {
    "a",     "about", "an",    "and",   "any",   "are",  "as",    "at",
    "be",    "but",   "by",    "can",   "for",   "from", "get",   "i",
    "im",    "in",    "into",  "is",    "it",    "its",  "just",  "like",
    "me",    "maybe", "more",  "movie", "my",    "of",   "on",    "or",
    "right", "show",  "some",  "something", "than", "that", "the", "this",
    "to",    "want",  "watch", "with",  "film",  "now",  "please", "so"};

}  // namespace

uint64_t Fnv1a64(std::string_view data, uint64_t seed) {
  uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ToLower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = Lower(c);
  return out;
}

std::string_view Trim(std::string_view s) {
  const auto ws = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::string Join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

std::vector<std::string> SplitString(std::string_view s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    while (!cur.empty() && cur.back() == '-') cur.pop_back();
    if (!cur.empty()) tokens.push_back(cur);
    cur.clear();
  };
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (IsAlnum(c)) {
      cur.push_back(Lower(c));
    } else if (c == '\'') {
      continue;
    } else if (c == '-' && !cur.empty() && i + 1 < text.size() &&
               IsAlnum(text[i + 1])) {
      cur.push_back('-');
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::string Stem(std::string_view token) {
  std::string t(token);
  if (t == "series" || t == "species") return t;
  if (t.size() >= 2 && t.back() == 's' && AllDigits(t.substr(0, t.size() - 1))) {
    t.pop_back();
    return t;
  }
  if (t.size() > 4 && t.ends_with("ies")) {
    t.resize(t.size() - 3);
    t.push_back('y');
    return t;
  }
  if (t.size() > 3 && t.back() == 's' && !t.ends_with("ss") &&
      !t.ends_with("us") && !t.ends_with("is")) {
    t.pop_back();
  }
  // "zombie" and "zombies" must meet: singular -ie goes the way of -ies.
  if (t.size() > 3 && t.ends_with("ie")) {
    t.resize(t.size() - 2);
    t.push_back('y');
  }
  return t;
}

bool IsStopword(std::string_view token) {
  return std::find(kStopwords.begin(), kStopwords.end(), token) !=
         kStopwords.end();
}

std::optional<std::vector<std::string>> SplitCsvRow(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  if (quoted) return std::nullopt;
  fields.push_back(std::move(cur));
  return fields;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path);
}

}  // namespace steerrec
