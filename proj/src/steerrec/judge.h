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

// Alignment judgments v_true(item, request).
//
// Two judges share one score scale. The LLM judge reads the provider's
// token probabilities for the grades "1".."5", renormalizes them and takes
// the expected grade. The synthetic judge compiles the request text into
// genre/decade/term predicates and scores items deterministically; it is
// the ground truth for desk-scale distillation experiments.

#ifndef STEERREC_JUDGE_H_
#define STEERREC_JUDGE_H_

#include <array>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "steerrec/catalog.h"
#include "steerrec/llm_client.h"
#include "steerrec/prompts.h"

namespace steerrec {

// probs[g - 1] is the probability of grade g. The five masses may sum to
// less than one; the remainder belongs to other tokens.
struct GradedDistribution {
  std::array<double, 5> probs{};

  double mass() const;
};

enum class JudgeSource { kLlm, kSynthetic };

const char* JudgeSourceName(JudgeSource source);

struct JudgeScore {
  double raw_expected = 1.0;  // in [1, 5]
  double normalized = 0.0;    // (raw_expected - 1) / 4
  JudgeSource source = JudgeSource::kSynthetic;

  static JudgeScore FromRaw(double raw, JudgeSource source);
  static JudgeScore FromNormalized(double normalized, JudgeSource source);
};

// Renormalizes the grade masses and returns sum_r r * P(r). Throws
// ComprehensionError when the mass is not strictly above 0.9 and
// Error(kInvalidArgument) for probabilities outside [0, 1] or summing past 1.
JudgeScore ExpectedRating(const GradedDistribution& dist,
                          JudgeSource source = JudgeSource::kLlm);

// Grade masses from first-token alternatives. A token counts for grade g when
// its text, ignoring surrounding whitespace, is exactly the digit g;
// duplicates (" 4" and "4") are summed.
GradedDistribution DistributionFromLogprobs(std::span<const TokenLogprob> tokens);

class Judge {
 public:
  virtual ~Judge() = default;

  // Counts the call in Instrumentation, then scores.
  JudgeScore Score(const Item& item, const Request& request) const;
  virtual std::string name() const = 0;

 protected:
  virtual JudgeScore DoScore(const Item& item, const Request& request) const = 0;
};

class LlmJudge : public Judge {
 public:
  // `prompt` must use {movie_title}, {summary} and {request}.
  LlmJudge(std::shared_ptr<LlmClient> client, PromptTemplate prompt);

  std::string name() const override { return "llm"; }

 protected:
  JudgeScore DoScore(const Item& item, const Request& request) const override;

 private:
  std::shared_ptr<LlmClient> client_;
  PromptTemplate prompt_;
};

// --- Synthetic judge -------------------------------------------------------

struct Predicate {
  enum class Kind { kGenre, kDecade, kTerm };

  Kind kind = Kind::kGenre;
  std::string value;  // genre label or stemmed term
  int decade = 0;
  bool negated = false;
  double weight = 0.0;

  bool operator==(const Predicate&) const = default;
};

struct SyntheticRules {
  std::vector<Predicate> predicates;
};

// Words the rule compiler understands.
struct RuleLexicon {
  std::vector<std::string> genres;  // catalog labels, e.g. "Sci-Fi"
  std::vector<std::string> terms;   // content keywords, e.g. "zombies"

  static RuleLexicon ForCatalog(const Catalog& catalog,
                                std::vector<std::string> terms = DefaultTerms());
  static std::vector<std::string> DefaultTerms();
};

// Compiles request text into weighted predicates. Clauses are separated by
// punctuation and the connectives "and", "but", "or", "now"; a negator
// ("not", "no", "never", "without", "avoid", "less", ...) flips the
// polarity of the predicates after it within its clause, and a "used to"
// clause is ignored. Each positive predicate weighs 0.5 / #positives and
// each negated predicate weighs 0.5.
SyntheticRules CompileRules(std::string_view text, const RuleLexicon& lexicon);

// 0.5, plus w for each satisfied positive predicate, minus w for each
// unsatisfied positive or violated negated predicate, clamped to [0, 1].
JudgeScore JudgeSynthetic(const Item& item, const SyntheticRules& rules);

// Stemmed title+summary tokens, as matched by term predicates.
std::vector<std::string> ItemTerms(const Item& item);

class SyntheticJudge : public Judge {
 public:
  explicit SyntheticJudge(RuleLexicon lexicon) : lexicon_(std::move(lexicon)) {}

  std::string name() const override { return "synthetic"; }
  const RuleLexicon& lexicon() const { return lexicon_; }

 protected:
  JudgeScore DoScore(const Item& item, const Request& request) const override;

 private:
  RuleLexicon lexicon_;
};

// One persisted judgment, written as JSONL
// {item_id, request_id, raw_expected, normalized, source}.
struct JudgedPair {
  ItemId item_id = 0;
  std::string request_id;
  JudgeScore score;
};

std::string JudgedPairToJson(const JudgedPair& pair);
JudgedPair JudgedPairFromJson(std::string_view line);

}  // namespace steerrec

#endif  // STEERREC_JUDGE_H_
