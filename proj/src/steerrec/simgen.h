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

// Simulated training data: requests across ten categories, then judged
// (user, request, item) tuples.

#ifndef STEERREC_SIMGEN_H_
#define STEERREC_SIMGEN_H_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "steerrec/catalog.h"
#include "steerrec/judge.h"
#include "steerrec/llm_client.h"

namespace steerrec {

struct RequestCategory {
  std::string name;
  std::string description;
  // Slots: {genre}, {Genre}, {genre2}, {decade}, {keyword}, {title}.
  std::vector<std::string> templates;
  // Requests of this category are standing rules rather than one-offs.
  bool persistent = false;
};

// The ten registered categories, in a fixed order.
const std::vector<RequestCategory>& RequestCategories();
const RequestCategory& FindCategory(std::string_view name);

// Values a template is instantiated with.
struct TemplateSlots {
  std::string genre;   // primary genre label, e.g. "Horror"
  std::string genre2;  // a different genre label
  int decade = 0;
  std::string keyword;
  std::string title;
};

// "{Genre} from the {decade}s but not {keyword}" with (Horror, 1990,
// zombies) -> "Horror from the 1990s but not zombies". {genre} renders the
// label in lower case.
std::string InstantiateTemplate(std::string_view tmpl, const TemplateSlots& slots);

enum class RequestSource { kTemplate, kLlm };

struct RequestGenOptions {
  size_t n_per_category = 6;
  RequestSource source = RequestSource::kTemplate;
  uint64_t seed = 0;
  // Content keywords to draw {keyword} from; kept to those present in some
  // item's title or summary so every request is satisfiable.
  std::vector<std::string> keywords = RuleLexicon::DefaultTerms();
  // kLlm only.
  std::shared_ptr<LlmClient> client;
  std::string prompt_dir;
  // Texts that must not be produced (e.g. held-out evaluation requests
  // drawn against a training set). Template generation redraws on collision.
  std::vector<std::string> exclude_texts;
};

// Returns 10 * n_per_category requests tagged with their category. Request
// ids are "r<index>". Throws kConfig for kLlm without a client.
std::vector<Request> GenerateRequests(const Catalog& catalog,
                                      const std::vector<InteractionLog>& logs,
                                      const RequestGenOptions& options);

// Text between <statement> and </statement> in a model reply, trimmed.
// Throws kProvider when the tags are missing or enclose nothing.
std::string ExtractStatement(const std::string& text);

enum class Split { kTrain, kValidation, kTest };

const char* SplitName(Split split);
Split SplitFromName(std::string_view name);

// 80/10/10 by a stable hash of (request text, item id): the assignment never
// depends on the seed, and identical (text, item) pairs always share a split.
Split AssignSplit(std::string_view request_text, ItemId item_id);

struct TrainingTuple {
  UserId user_id = 0;
  Request request;
  ItemId item_id = 0;
  double target = 0.0;
  Split split = Split::kTrain;
};

struct CorpusOptions {
  size_t items_per_request = 100;
  uint64_t seed = 0;
  // Concurrent judge calls; 1 runs inline.
  int max_concurrency = 1;
};

struct SkippedPair {
  std::string request_id;
  ItemId item_id = 0;
  std::string reason;
};

struct Corpus {
  // Sorted by (request id, item id).
  std::vector<TrainingTuple> tuples;
  std::vector<SkippedPair> skipped;
};

// Samples items per request without replacement, judges each pair and
// assigns splits. Comprehension errors skip the pair; other judge errors
// propagate. Throws kInvalidArgument when items_per_request exceeds the
// catalog.
Corpus BuildCorpus(const std::vector<Request>& requests, const Catalog& catalog,
                   const Judge& judge, const CorpusOptions& options);

// JSONL, one tuple per line with keys in a fixed order.
std::string CorpusToJsonl(const std::vector<TrainingTuple>& tuples);
std::vector<TrainingTuple> CorpusFromJsonl(std::string_view jsonl);

}  // namespace steerrec

#endif  // STEERREC_SIMGEN_H_
