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

#ifndef STEERREC_PROMPTS_H_
#define STEERREC_PROMPTS_H_

#include <map>
#include <set>
#include <string>
#include <string_view>

#include "steerrec/llm_client.h"

namespace steerrec {

// A chat prompt with {placeholder} slots. Files hold an optional
// "### system" section followed by a "### user" section; a file without
// section markers is all user text. Lines starting with "//" before the
// first marker are skipped.
class PromptTemplate {
 public:
  PromptTemplate() = default;
  static PromptTemplate Parse(std::string_view text);
  static PromptTemplate Load(const std::string& path);

  // Throws kConfig naming the first placeholder without a value.
  LlmRequest Render(const std::map<std::string, std::string>& values) const;
  std::set<std::string> Placeholders() const;

  const std::string& system() const { return system_; }
  const std::string& user() const { return user_; }

 private:
  std::string system_;
  std::string user_;
};

// Directory holding the shipped *.txt templates. Overridable with the
// STEERREC_PROMPT_DIR environment variable.
std::string DefaultPromptDir();

// Loads `<dir>/<name>.txt`.
PromptTemplate LoadPrompt(std::string_view name, const std::string& dir = "");

}  // namespace steerrec

#endif  // STEERREC_PROMPTS_H_
