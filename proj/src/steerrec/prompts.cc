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

#include "steerrec/prompts.h"

#include <cstdlib>

#include "steerrec/error.h"
#include "steerrec/text.h"

#ifndef STEERREC_PROMPT_DIR
#define STEERREC_PROMPT_DIR "prompts"
#endif

namespace steerrec {

namespace {

constexpr std::string_view kSystemMarker = "### system";
constexpr std::string_view kUserMarker = "### user";

bool IsPlaceholderChar(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

// Visits every {name} slot in `text`.
template <typename Fn>
void ForEachSlot(std::string_view text, Fn&& fn) {
  size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string_view::npos) {
    size_t end = pos + 1;
    while (end < text.size() && IsPlaceholderChar(text[end])) ++end;
    if (end < text.size() && text[end] == '}' && end > pos + 1) {
      fn(pos, end + 1, text.substr(pos + 1, end - pos - 1));
      pos = end + 1;
    } else {
      ++pos;
    }
  }
}

std::string Substitute(std::string_view text,
                       const std::map<std::string, std::string>& values) {
  std::string out;
  size_t last = 0;
  ForEachSlot(text, [&](size_t begin, size_t end, std::string_view name) {
    auto it = values.find(std::string(name));
    if (it == values.end()) {
      throw Error(ErrorCode::kConfig,
                  "no value for prompt placeholder {" + std::string(name) + "}");
    }
    out.append(text.substr(last, begin - last));
    out.append(it->second);
    last = end;
  });
  out.append(text.substr(last));
  return out;
}

}  // namespace

PromptTemplate PromptTemplate::Parse(std::string_view text) {
  PromptTemplate t;
  std::string* target = &t.user_;
  bool saw_marker = false;
  for (const std::string& line : SplitString(text, '\n')) {
    std::string_view trimmed = Trim(line);
    // A "//" preamble (license text) may precede the first marker.
    if (!saw_marker && trimmed.starts_with("//")) continue;
    if (trimmed == kSystemMarker) {
      target = &t.system_;
      saw_marker = true;
      continue;
    }
    if (trimmed == kUserMarker) {
      target = &t.user_;
      saw_marker = true;
      continue;
    }
    if (!saw_marker && target == &t.user_ && t.user_.empty() && trimmed.empty()) {
      continue;
    }
    target->append(line);
    target->push_back('\n');
  }
  t.system_ = std::string(Trim(t.system_));
  t.user_ = std::string(Trim(t.user_));
  return t;
}

PromptTemplate PromptTemplate::Load(const std::string& path) {
  return Parse(ReadFile(path));
}

LlmRequest PromptTemplate::Render(
    const std::map<std::string, std::string>& values) const {
  LlmRequest r;
  r.system = Substitute(system_, values);
  r.user = Substitute(user_, values);
  return r;
}

std::set<std::string> PromptTemplate::Placeholders() const {
  std::set<std::string> names;
  for (const std::string* s : {&system_, &user_}) {
    ForEachSlot(*s, [&](size_t, size_t, std::string_view name) {
      names.emplace(name);
    });
  }
  return names;
}

std::string DefaultPromptDir() {
  if (const char* env = std::getenv("STEERREC_PROMPT_DIR"); env && *env) {
    return env;
  }
  return STEERREC_PROMPT_DIR;
}

PromptTemplate LoadPrompt(std::string_view name, const std::string& dir) {
  const std::string base = dir.empty() ? DefaultPromptDir() : dir;
  return PromptTemplate::Load(base + "/" + std::string(name) + ".txt");
}

}  // namespace steerrec
