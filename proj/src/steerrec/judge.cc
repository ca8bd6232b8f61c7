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

#include "steerrec/judge.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "json.hpp"
#include "steerrec/error.h"
#include "steerrec/instrumentation.h"
#include "steerrec/text.h"

namespace steerrec {

namespace {

constexpr double kMassThreshold = 0.9;
// Float slack for masses that sum to one only up to rounding.
constexpr double kMassSlack = 1e-9;

}  // namespace

double GradedDistribution::mass() const {
  double m = 0.0;
  for (double p : probs) m += p;
  return m;
}

const char* JudgeSourceName(JudgeSource source) {
  return source == JudgeSource::kLlm ? "llm" : "synthetic";
}

JudgeScore JudgeScore::FromRaw(double raw, JudgeSource source) {
  raw = std::clamp(raw, 1.0, 5.0);
  return {raw, (raw - 1.0) / 4.0, source};
}

JudgeScore JudgeScore::FromNormalized(double normalized, JudgeSource source) {
  normalized = std::clamp(normalized, 0.0, 1.0);
  return {1.0 + 4.0 * normalized, normalized, source};
}

JudgeScore ExpectedRating(const GradedDistribution& dist, JudgeSource source) {
  double mass = 0.0;
  double weighted = 0.0;
  for (int g = 1; g <= 5; ++g) {
    const double p = dist.probs[g - 1];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "grade " + std::to_string(g) + " probability out of [0, 1]");
    }
    mass += p;
    weighted += g * p;
  }
  if (mass > 1.0 + kMassSlack) {
    throw Error(ErrorCode::kInvalidArgument, "grade probabilities sum past 1");
  }
  if (!(mass > kMassThreshold)) throw ComprehensionError(mass);
  return JudgeScore::FromRaw(weighted / mass, source);
}

GradedDistribution DistributionFromLogprobs(std::span<const TokenLogprob> tokens) {
  GradedDistribution d;
  for (const TokenLogprob& t : tokens) {
    std::string_view text = Trim(t.token);
    if (text.size() != 1 || text[0] < '1' || text[0] > '5') continue;
    d.probs[text[0] - '1'] += std::exp(t.logprob);
  }
  // exp() of several rounded logprobs can overshoot 1 by a few ulps.
  const double mass = d.mass();
  if (mass > 1.0 && mass < 1.0 + 1e-6) {
    for (double& p : d.probs) p /= mass;
  }
  return d;
}

JudgeScore Judge::Score(const Item& item, const Request& request) const {
  Instrumentation::Get().CountJudgeCall();
  return DoScore(item, request);
}

LlmJudge::LlmJudge(std::shared_ptr<LlmClient> client, PromptTemplate prompt)
    : client_(std::move(client)), prompt_(std::move(prompt)) {
  if (!client_) throw Error(ErrorCode::kConfig, "LLM judge needs a client");
}

JudgeScore LlmJudge::DoScore(const Item& item, const Request& request) const {
  if (Trim(item.title).empty() && Trim(item.summary).empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "item " + std::to_string(item.id) + " has neither title nor summary");
  }
  if (Trim(request.text).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty request text");
  }
  LlmRequest req = prompt_.Render(
      {{"movie_title", item.title},
       {"summary", item.summary.empty() ? "(no summary available)" : item.summary},
       {"request", request.text}});
  req.max_tokens = 1;
  req.top_logprobs = 20;
  LlmResponse resp = client_->Complete(req);
  return ExpectedRating(DistributionFromLogprobs(resp.first_token_logprobs),
                        JudgeSource::kLlm);
}

// --- Synthetic rules --------------------------------------------------------

std::vector<std::string> RuleLexicon::DefaultTerms() {
  return {"zombies",  "vampires", "ogre",     "dragons",   "robots",
          "aliens",   "space",    "heist",    "detective", "wedding",
          "spies",    "pirates",  "ghosts",   "witches",   "superheroes",
          "monsters", "dinosaurs", "sharks",  "cowboys",   "samurai",
          "princess", "knights",  "wizards",  "boxing",    "football",
          "dancing",  "chefs",    "lawyers",  "hospital",  "prison",
          "islands",  "desert",   "ocean",    "trains",    "racing",
          "revenge",  "friendship", "courtroom", "submarine", "jungle"};
}

RuleLexicon RuleLexicon::ForCatalog(const Catalog& catalog,
                                    std::vector<std::string> terms) {
  RuleLexicon lex;
  lex.genres.assign(catalog.vocabulary().begin(), catalog.vocabulary().end());
  lex.terms = std::move(terms);
  return lex;
}

namespace {

bool IsNegator(std::string_view t) {
  static const std::set<std::string_view> kNegators = {
      "not", "no", "never", "without", "avoid", "except", "less", "dont",
      "nothing", "none", "skip", "hate", "away", "instead", "neither", "nor",
      "tired", "excluding", "exclude", "fewer"};
  return kNegators.count(t) > 0;
}

bool IsConnective(std::string_view t) {
  return t == "and" || t == "but" || t == "or" || t == "now" || t == "yet" ||
         t == "then" || t == "while" || t == "though" || t == "although";
}

// Informal words that name a genre.
const std::map<std::string_view, std::string_view>& GenreSynonyms() {
  static const std::map<std::string_view, std::string_view> kSynonyms = {
      {"funny", "Comedy"},         {"comedic", "Comedy"},
      {"hilarious", "Comedy"},     {"scary", "Horror"},
      {"spooky", "Horror"},        {"kid", "Children"},
      {"kids", "Children"},        {"romantic", "Romance"},
      {"animated", "Animation"},   {"cartoon", "Animation"},
      {"suspenseful", "Thriller"}, {"thrilling", "Thriller"},
      {"scifi", "Sci-Fi"},         {"mysterious", "Mystery"},
      {"magical", "Fantasy"},      {"criminal", "Crime"},
      {"wartime", "War"},          {"noir", "Film-Noir"},
      {"documentary", "Documentary"}};
  return kSynonyms;
}

std::optional<int> ParseDecadeToken(std::string_view t) {
  if (t.size() < 3 || t.back() != 's') return std::nullopt;
  std::string_view digits = t.substr(0, t.size() - 1);
  if (!std::all_of(digits.begin(), digits.end(),
                   [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  int v = std::stoi(std::string(digits));
  if (digits.size() == 4) return v % 10 == 0 ? std::optional<int>(v) : std::nullopt;
  if (digits.size() == 2 && v % 10 == 0) return v >= 20 ? 1900 + v : 2000 + v;
  return std::nullopt;
}

std::vector<std::string_view> SplitClauses(std::string_view text) {
  std::vector<std::string_view> out;
  size_t start = 0;
  for (size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ',' || text[i] == ';' || text[i] == '.' ||
        text[i] == '!' || text[i] == '?' || text[i] == ':') {
      if (i > start) out.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

SyntheticRules CompileRules(std::string_view text, const RuleLexicon& lexicon) {
  std::map<std::string, std::string> genre_by_stem;
  for (const std::string& g : lexicon.genres) {
    for (const std::string& tok : Tokenize(g)) genre_by_stem.emplace(Stem(tok), g);
  }
  std::set<std::string> genre_labels(lexicon.genres.begin(), lexicon.genres.end());
  std::set<std::string> term_stems;
  for (const std::string& term : lexicon.terms) {
    for (const std::string& tok : Tokenize(term)) term_stems.insert(Stem(tok));
  }

  std::vector<Predicate> found;
  auto add = [&](Predicate p) {
    if (std::find(found.begin(), found.end(), p) == found.end()) found.push_back(p);
  };

  for (std::string_view clause : SplitClauses(text)) {
    const std::vector<std::string> tokens = Tokenize(clause);
    bool negate = false;
    bool ignore = false;
    for (size_t i = 0; i < tokens.size(); ++i) {
      const std::string& tok = tokens[i];
      if (IsConnective(tok)) {
        negate = false;
        ignore = false;
        continue;
      }
      if (tok == "used" && i + 1 < tokens.size() && tokens[i + 1] == "to") {
        ignore = true;
        continue;
      }
      if (IsNegator(tok)) {
        negate = true;
        continue;
      }
      if (ignore) continue;

      Predicate p;
      p.negated = negate;
      if (auto decade = ParseDecadeToken(tok)) {
        p.kind = Predicate::Kind::kDecade;
        p.decade = *decade;
        add(p);
        continue;
      }
      const std::string stem = Stem(tok);
      if (auto it = genre_by_stem.find(stem); it != genre_by_stem.end()) {
        p.kind = Predicate::Kind::kGenre;
        p.value = it->second;
        add(p);
        continue;
      }
      if (auto it = GenreSynonyms().find(tok); it != GenreSynonyms().end() &&
                                               genre_labels.count(std::string(it->second))) {
        p.kind = Predicate::Kind::kGenre;
        p.value = std::string(it->second);
        add(p);
        continue;
      }
      if (term_stems.count(stem)) {
        p.kind = Predicate::Kind::kTerm;
        p.value = stem;
        add(p);
      }
    }
  }

  const auto positives = std::count_if(found.begin(), found.end(),
                                       [](const Predicate& p) { return !p.negated; });
  for (Predicate& p : found) {
    p.weight = p.negated ? 0.5 : 0.5 / static_cast<double>(positives);
  }
  return {std::move(found)};
}

std::vector<std::string> ItemTerms(const Item& item) {
  std::vector<std::string> terms;
  for (const std::string* field : {&item.title, &item.summary}) {
    for (const std::string& tok : Tokenize(*field)) terms.push_back(Stem(tok));
  }
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  return terms;
}

JudgeScore JudgeSynthetic(const Item& item, const SyntheticRules& rules) {
  std::vector<std::string> terms;
  bool have_terms = false;
  double score = 0.5;
  for (const Predicate& p : rules.predicates) {
    bool holds = false;
    switch (p.kind) {
      case Predicate::Kind::kGenre:
        holds = item.genres.count(p.value) > 0;
        break;
      case Predicate::Kind::kDecade:
        holds = item.decade == p.decade;
        break;
      case Predicate::Kind::kTerm:
        if (!have_terms) {
          terms = ItemTerms(item);
          have_terms = true;
        }
        holds = std::binary_search(terms.begin(), terms.end(), p.value);
        break;
    }
    if (p.negated) {
      if (holds) score -= p.weight;
    } else {
      score += holds ? p.weight : -p.weight;
    }
  }
  return JudgeScore::FromNormalized(std::clamp(score, 0.0, 1.0),
                                    JudgeSource::kSynthetic);
}

JudgeScore SyntheticJudge::DoScore(const Item& item, const Request& request) const {
  return JudgeSynthetic(item, CompileRules(request.text, lexicon_));
}

std::string JudgedPairToJson(const JudgedPair& pair) {
  nlohmann::ordered_json j;
  j["item_id"] = pair.item_id;
  j["request_id"] = pair.request_id;
  j["raw_expected"] = pair.score.raw_expected;
  j["normalized"] = pair.score.normalized;
  j["source"] = JudgeSourceName(pair.score.source);
  return j.dump();
}

JudgedPair JudgedPairFromJson(std::string_view line) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  try {
    if (j.is_discarded()) throw Error(ErrorCode::kParse, "judged pair is not JSON");
    JudgedPair p;
    p.item_id = j.at("item_id").get<ItemId>();
    p.request_id = j.at("request_id").get<std::string>();
    p.score.raw_expected = j.at("raw_expected").get<double>();
    p.score.normalized = j.at("normalized").get<double>();
    const std::string source = j.at("source").get<std::string>();
    if (source != "llm" && source != "synthetic") {
      throw Error(ErrorCode::kParse, "unknown judge source '" + source + "'");
    }
    p.score.source = source == "llm" ? JudgeSource::kLlm : JudgeSource::kSynthetic;
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("judged pair: ") + e.what());
  }
}

}  // namespace steerrec
