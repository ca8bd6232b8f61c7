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

#include "steerrec/simgen.h"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <set>
#include <thread>

#include "json.hpp"
#include "steerrec/error.h"
#include "steerrec/prompts.h"
#include "steerrec/rng.h"
#include "steerrec/text.h"

namespace steerrec {

const std::vector<RequestCategory>& RequestCategories() {
  static const std::vector<RequestCategory> kCategories = {
      {"one-time",
       "an immediate, situational request for right now",
       {"I need something {genre} tonight",
        "in the mood for a {genre} movie right now",
        "want a quick {genre} film with {keyword} for this evening"},
       false},
      {"long-term",
       "a standing preference or boundary the recommender should always respect",
       {"never recommend me {genre2} movies", "always show me {genre} films",
        "I generally prefer {genre} stories about {keyword}"},
       true},
      {"aspirational",
       "a wish to grow as a viewer or broaden cultural horizons",
       {"help me develop an appreciation for {genre} from the {decade}s",
        "I want to explore classic {genre} cinema from the {decade}s",
        "help me get into {genre} films about {keyword}"},
       false},
      {"changing",
       "tastes moving from an old preference toward a new one",
       {"I used to like {genre2} but now I want {genre}",
        "lately I am moving away from {genre2}, these days I want {genre} with {keyword}",
        "I used to watch {genre2} but these days I want {genre} from the {decade}s"},
       false},
      {"ambiguous",
       "an impressionistic, mood-driven request",
       {"something gentle and {genre}, maybe with {keyword}",
        "a {genre} mood, like {keyword} at dusk",
        "something that feels like {keyword} and {genre} at once"},
       false},
      {"similarity-based",
       "a request defined relative to a specific film",
       {"something like {title} but more {genre}",
        "movies similar to {title} with {keyword}",
        "like {title}, but {genre} from the {decade}s"},
       false},
      {"smart-filtering",
       "a very specific request that needs detailed content knowledge",
       {"{genre} films featuring {keyword} from the {decade}s",
        "{genre} with strong {keyword} themes and no {genre2}",
        "{genre} from the {decade}s that involves {keyword}"},
       false},
      {"smart-filtering-easy",
       "a clear, specific request in simple words",
       {"a {genre} movie about {keyword}", "{genre} movies with {keyword}",
        "show me {genre} movies"},
       false},
      {"logical-filtering",
       "a precise request combining conditions with and, or and not",
       {"{Genre} from the {decade}s but not {other_keyword}",
        "{genre} from the {decade}s without {genre2}",
        "{genre} with {keyword} but not {genre2}"},
       false},
      {"refinement",
       "an adjustment relative to what was recommended lately",
       {"more {genre} than lately",
        "less {genre2} and more {keyword} than lately",
        "more {genre} from the {decade}s and fewer {genre2} than lately"},
       false},
  };
  return kCategories;
}

const RequestCategory& FindCategory(std::string_view name) {
  for (const RequestCategory& c : RequestCategories()) {
    if (c.name == name) return c;
  }
  throw Error(ErrorCode::kNotFound, "unknown request category '" +
                                        std::string(name) + "'");
}

namespace {

struct Slots : TemplateSlots {
  std::string other_keyword;
};

std::string Render(std::string_view tmpl, const Slots& s) {
  const std::map<std::string, std::string> values = {
      {"genre", ToLower(s.genre)},
      {"Genre", s.genre},
      {"genre2", ToLower(s.genre2)},
      {"decade", std::to_string(s.decade)},
      {"keyword", s.keyword},
      {"other_keyword", s.other_keyword.empty() ? s.keyword : s.other_keyword},
      {"title", s.title}};
  std::string out;
  size_t pos = 0;
  while (pos < tmpl.size()) {
    size_t open = tmpl.find('{', pos);
    if (open == std::string_view::npos) break;
    size_t close = tmpl.find('}', open);
    if (close == std::string_view::npos) break;
    out.append(tmpl.substr(pos, open - pos));
    auto it = values.find(std::string(tmpl.substr(open + 1, close - open - 1)));
    if (it == values.end()) {
      throw Error(ErrorCode::kConfig, "unknown template slot " +
                                          std::string(tmpl.substr(open, close - open + 1)));
    }
    out.append(it->second);
    pos = close + 1;
  }
  out.append(tmpl.substr(pos));
  return out;
}

// Catalog-derived slot vocabulary.
struct SlotPools {
  std::vector<std::string> genres;
  std::vector<int> decades;
  std::vector<std::string> keywords;  // present in at least one item
  // Per item (canonical order): keywords it mentions.
  std::vector<std::vector<std::string>> item_keywords;
};

SlotPools BuildPools(const Catalog& catalog, const std::vector<std::string>& keywords) {
  SlotPools p;
  std::set<std::string> genres;
  std::set<int> decades;
  std::set<std::string> present;
  for (const Item& item : catalog.items()) {
    genres.insert(item.genres.begin(), item.genres.end());
    if (item.decade) decades.insert(*item.decade);
    const std::vector<std::string> terms = ItemTerms(item);
    std::vector<std::string> mine;
    for (const std::string& kw : keywords) {
      const std::vector<std::string> toks = Tokenize(kw);
      if (toks.size() != 1) continue;
      if (std::binary_search(terms.begin(), terms.end(), Stem(toks[0]))) {
        mine.push_back(kw);
        present.insert(kw);
      }
    }
    p.item_keywords.push_back(std::move(mine));
  }
  p.genres.assign(genres.begin(), genres.end());
  p.decades.assign(decades.begin(), decades.end());
  p.keywords.assign(present.begin(), present.end());
  return p;
}

template <typename T>
const T& Pick(Rng& rng, const std::vector<T>& v) {
  return v[rng.Below(v.size())];
}

Slots DrawSlots(Rng& rng, const Catalog& catalog, const SlotPools& pools) {
  Slots s;
  // Anchor on a real item so the positive slots are jointly satisfiable.
  const size_t anchor = rng.Below(catalog.size());
  const Item& item = catalog.items()[anchor];
  if (!item.genres.empty()) {
    std::vector<std::string> g(item.genres.begin(), item.genres.end());
    s.genre = Pick(rng, g);
  } else if (!pools.genres.empty()) {
    s.genre = Pick(rng, pools.genres);
  } else {
    s.genre = "Drama";
  }
  std::vector<std::string> others;
  for (const std::string& g : pools.genres) {
    if (g != s.genre && !item.genres.count(g)) others.push_back(g);
  }
  s.genre2 = others.empty() ? s.genre : Pick(rng, others);
  if (item.decade) {
    s.decade = *item.decade;
  } else {
    s.decade = pools.decades.empty() ? 1990 : Pick(rng, pools.decades);
  }
  const auto& mine = pools.item_keywords[anchor];
  if (!mine.empty()) {
    s.keyword = Pick(rng, mine);
  } else {
    s.keyword = pools.keywords.empty() ? "friendship" : Pick(rng, pools.keywords);
  }
  std::vector<std::string> other_kw;
  for (const std::string& kw : pools.keywords) {
    if (std::find(mine.begin(), mine.end(), kw) == mine.end()) other_kw.push_back(kw);
  }
  s.other_keyword = other_kw.empty() ? s.keyword : Pick(rng, other_kw);
  s.title = catalog.items()[rng.Below(catalog.size())].title;
  return s;
}

std::string RatingsSummary(const InteractionLog* log, const Catalog& catalog) {
  if (!log || log->events.empty()) return "(no ratings)";
  std::vector<std::string> lines;
  const size_t n = log->events.size();
  const size_t from = n > 20 ? n - 20 : 0;
  for (size_t i = from; i < n; ++i) {
    const RatingEvent& e = log->events[i];
    if (!catalog.Contains(e.item_id)) continue;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", e.rating);
    lines.push_back(catalog.Get(e.item_id).title + ": " + buf);
  }
  return Join(lines, "\n");
}

}  // namespace

std::string ExtractStatement(const std::string& text) {
  const std::string open = "<statement>", close = "</statement>";
  size_t a = text.find(open);
  if (a == std::string::npos) {
    throw Error(ErrorCode::kProvider, "response lacks <statement> tags: " +
                                          text.substr(0, 200));
  }
  a += open.size();
  size_t b = text.find(close, a);
  if (b == std::string::npos) {
    throw Error(ErrorCode::kProvider, "unterminated <statement>: " + text.substr(0, 200));
  }
  std::string s(Trim(std::string_view(text).substr(a, b - a)));
  if (s.empty()) throw Error(ErrorCode::kProvider, "empty <statement>");
  return s;
}

std::string InstantiateTemplate(std::string_view tmpl, const TemplateSlots& slots) {
  Slots s;
  static_cast<TemplateSlots&>(s) = slots;
  return Render(tmpl, s);
}

std::vector<Request> GenerateRequests(const Catalog& catalog,
                                      const std::vector<InteractionLog>& logs,
                                      const RequestGenOptions& options) {
  if (options.n_per_category < 1) {
    throw Error(ErrorCode::kInvalidArgument, "n_per_category must be >= 1");
  }
  if (catalog.size() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "cannot generate requests for an empty catalog");
  }
  if (options.source == RequestSource::kLlm && !options.client) {
    throw Error(ErrorCode::kConfig, "LLM request generation needs a configured client");
  }
  Rng rng(options.seed);
  const SlotPools pools = BuildPools(catalog, options.keywords);
  const std::set<std::string> excluded(options.exclude_texts.begin(),
                                       options.exclude_texts.end());
  PromptTemplate prompt;
  if (options.source == RequestSource::kLlm) {
    prompt = LoadPrompt("request_generation", options.prompt_dir);
  }

  std::vector<Request> out;
  std::map<std::pair<UserId, std::string>, std::vector<std::string>> previous;
  for (const RequestCategory& cat : RequestCategories()) {
    for (size_t n = 0; n < options.n_per_category; ++n) {
      Request r;
      r.id = "r" + std::to_string(out.size());
      r.category = cat.name;
      r.persistent = cat.persistent;
      const InteractionLog* user =
          logs.empty() ? nullptr : &logs[rng.Below(logs.size())];
      r.user_id = user ? user->user_id : 0;
      if (options.source == RequestSource::kTemplate) {
        constexpr int kMaxDraws = 1000;
        int draws = 0;
        do {
          if (++draws > kMaxDraws) {
            throw Error(ErrorCode::kInvalidArgument,
                        "cannot draw a non-excluded '" + cat.name + "' request");
          }
          const std::string& tmpl = Pick(rng, cat.templates);
          r.text = Render(tmpl, DrawSlots(rng, catalog, pools));
        } while (excluded.count(r.text));
      } else {
        auto& prev = previous[{r.user_id, cat.name}];
        LlmRequest req = prompt.Render(
            {{"category", cat.name},
             {"category_description", cat.description},
             {"movie_ratings_str", RatingsSummary(user, catalog)},
             {"previous_requests", prev.empty() ? "(none)" : Join(prev, "\n")}});
        req.max_tokens = 200;
        req.top_logprobs = 0;
        r.text = ExtractStatement(options.client->Complete(req).text);
        prev.push_back(r.text);
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

const char* SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "train";
}

Split SplitFromName(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "validation") return Split::kValidation;
  if (name == "test") return Split::kTest;
  throw Error(ErrorCode::kParse, "unknown split '" + std::string(name) + "'");
}

Split AssignSplit(std::string_view request_text, ItemId item_id) {
  std::string key(request_text);
  key.push_back('\x1f');
  key += std::to_string(item_id);
  const uint64_t bucket = Fnv1a64(key) % 10;
  if (bucket < 8) return Split::kTrain;
  return bucket == 8 ? Split::kValidation : Split::kTest;
}

Corpus BuildCorpus(const std::vector<Request>& requests, const Catalog& catalog,
                   const Judge& judge, const CorpusOptions& options) {
  if (options.items_per_request > catalog.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "items_per_request " + std::to_string(options.items_per_request) +
                    " exceeds catalog size " + std::to_string(catalog.size()));
  }
  struct Job {
    size_t request;
    ItemId item;
  };
  Rng rng(options.seed);
  const std::vector<ItemId> ids = catalog.Ids();
  std::vector<Job> jobs;
  for (size_t r = 0; r < requests.size(); ++r) {
    std::vector<ItemId> sample = rng.Sample(ids, options.items_per_request);
    std::sort(sample.begin(), sample.end());
    for (ItemId id : sample) jobs.push_back({r, id});
  }

  struct Outcome {
    std::optional<JudgeScore> score;
    std::string error;
  };
  std::vector<Outcome> outcomes(jobs.size());
  auto run = [&](size_t j) {
    try {
      outcomes[j].score =
          judge.Score(catalog.Get(jobs[j].item), requests[jobs[j].request]);
    } catch (const ComprehensionError& e) {
      outcomes[j].error = e.what();
    }
  };
  if (options.max_concurrency <= 1) {
    for (size_t j = 0; j < jobs.size(); ++j) run(j);
  } else {
    std::atomic<size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::jthread> workers;
    for (int w = 0; w < options.max_concurrency; ++w) {
      workers.emplace_back([&] {
        for (size_t j; (j = next.fetch_add(1)) < jobs.size();) {
          try {
            run(j);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mu);
            if (!failure) failure = std::current_exception();
            next.store(jobs.size());
          }
        }
      });
    }
    workers.clear();
    if (failure) std::rethrow_exception(failure);
  }

  Corpus corpus;
  for (size_t j = 0; j < jobs.size(); ++j) {
    const Request& req = requests[jobs[j].request];
    if (!outcomes[j].score) {
      corpus.skipped.push_back({req.id, jobs[j].item, outcomes[j].error});
      continue;
    }
    TrainingTuple t;
    t.user_id = req.user_id;
    t.request = req;
    t.item_id = jobs[j].item;
    t.target = outcomes[j].score->normalized;
    t.split = AssignSplit(req.text, jobs[j].item);
    corpus.tuples.push_back(std::move(t));
  }
  return corpus;
}

std::string CorpusToJsonl(const std::vector<TrainingTuple>& tuples) {
  std::string out;
  for (const TrainingTuple& t : tuples) {
    nlohmann::ordered_json j;
    j["user_id"] = t.user_id;
    j["request_id"] = t.request.id;
    j["request"] = t.request.text;
    j["category"] = t.request.category;
    j["persistent"] = t.request.persistent;
    j["item_id"] = t.item_id;
    j["target"] = t.target;
    j["split"] = SplitName(t.split);
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<TrainingTuple> CorpusFromJsonl(std::string_view jsonl) {
  std::vector<TrainingTuple> out;
  size_t line_no = 0;
  for (const std::string& line : SplitString(jsonl, '\n')) {
    ++line_no;
    if (Trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    try {
      if (j.is_discarded()) throw Error(ErrorCode::kParse, "not JSON");
      TrainingTuple t;
      t.user_id = j.at("user_id").get<UserId>();
      t.request.id = j.at("request_id").get<std::string>();
      t.request.text = j.at("request").get<std::string>();
      t.request.category = j.value("category", std::string("user"));
      t.request.persistent = j.value("persistent", false);
      t.request.user_id = t.user_id;
      t.item_id = j.at("item_id").get<ItemId>();
      t.target = j.at("target").get<double>();
      t.split = SplitFromName(j.at("split").get<std::string>());
      if (!(t.target >= 0.0 && t.target <= 1.0)) {
        throw Error(ErrorCode::kParse, "target outside [0, 1]");
      }
      out.push_back(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse,
                  "corpus line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kParse) throw;
      throw Error(ErrorCode::kParse,
                  "corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace steerrec
