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

#include <gtest/gtest.h>

#include <cmath>

#include "json.hpp"
#include "oracles/oracles.h"
#include "steerrec/error.h"
#include "steerrec/instrumentation.h"
#include "steerrec/rng.h"
#include "steerrec/synthetic_world.h"
#include "steerrec/text.h"
#include "support/fixtures.h"

namespace steerrec {
namespace {

GradedDistribution Dist(std::array<double, 5> p) { return GradedDistribution{p}; }

TEST(ExpectedRatingTest, PointMassAndUniform) {
  JudgeScore s = ExpectedRating(Dist({0, 0, 0, 0, 1.0}));
  EXPECT_EQ(s.raw_expected, 5.0);
  EXPECT_EQ(s.normalized, 1.0);
  s = ExpectedRating(Dist({0.2, 0.2, 0.2, 0.2, 0.2}));
  EXPECT_NEAR(s.raw_expected, 3.0, 1e-15);
  EXPECT_NEAR(s.normalized, 0.5, 1e-15);
}

TEST(ExpectedRatingTest, RenormalizesPartialMass) {
  const JudgeScore s = ExpectedRating(Dist({0, 0, 0, 0.5, 0.45}));
  // Oracle: (4 * 50 + 5 * 45) / 95 in exact integers.
  const auto [num, den] = oracle::ExactExpectation({0, 0, 0, 50, 45});
  EXPECT_NEAR(s.raw_expected, static_cast<double>(num) / static_cast<double>(den), 1e-14);
  EXPECT_NEAR(s.raw_expected, 4.4737, 1e-4);
}

TEST(ExpectedRatingTest, RejectsMassAtOrBelowThreshold) {
  try {
    ExpectedRating(Dist({0.4, 0, 0, 0, 0.4}));
    FAIL();
  } catch (const ComprehensionError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kComprehension);
    EXPECT_NEAR(e.observed_mass(), 0.8, 1e-15);
  }
  EXPECT_THROW(ExpectedRating(Dist({0, 0, 0, 0.9, 0})), ComprehensionError);
  // Dyadic masses on either side of the threshold.
  EXPECT_THROW(ExpectedRating(Dist({0, 0, 0.5, 0.375, 0})), ComprehensionError);
  EXPECT_THROW(ExpectedRating(Dist({0, 0, 0, 0, 0})), ComprehensionError);
  EXPECT_NO_THROW(ExpectedRating(Dist({0, 0, 0.5, 0.40625, 0})));
}

TEST(ExpectedRatingTest, RejectsInvalidProbabilities) {
  EXPECT_THROW(ExpectedRating(Dist({-0.1, 0, 0, 0, 1.0})), Error);
  EXPECT_THROW(ExpectedRating(Dist({0.5, 0, 0, 0, 0.75})), Error);
  EXPECT_THROW(ExpectedRating(Dist({NAN, 0, 0, 0, 1.0})), Error);
}

TEST(ExpectedRatingTest, InvariantToUniformScaling) {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::array<double, 5> p{};
    double sum = 0;
    for (double& x : p) sum += (x = rng.Uniform());
    for (double& x : p) x /= sum;
    const double base = ExpectedRating(Dist(p)).raw_expected;
    const double scale = rng.Uniform(0.91, 1.0);
    std::array<double, 5> q = p;
    for (double& x : q) x *= scale;
    EXPECT_NEAR(ExpectedRating(Dist(q)).raw_expected, base, 1e-12);
  }
}

TEST(ExpectedRatingTest, MovingMassUpNeverLowersTheScore) {
  Rng rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    std::array<double, 5> p{};
    double sum = 0;
    for (double& x : p) sum += (x = rng.Uniform());
    for (double& x : p) x = x / sum * 0.95;
    const size_t a = rng.Below(4);
    const size_t b = a + 1 + rng.Below(4 - a);
    std::array<double, 5> q = p;
    const double moved = p[a] * rng.Uniform();
    q[a] -= moved;
    q[b] += moved;
    EXPECT_GE(ExpectedRating(Dist(q)).raw_expected + 1e-12, ExpectedRating(Dist(p)).raw_expected);
  }
}

TEST(DistributionFromLogprobsTest, SumsGradeTokensOnly) {
  const std::vector<TokenLogprob> tokens = {
      {"4", std::log(0.5)}, {" 4", std::log(0.25)}, {"5", std::log(0.125)},
      {"45", std::log(0.05)}, {"The", std::log(0.05)}};
  const GradedDistribution d = DistributionFromLogprobs(tokens);
  EXPECT_NEAR(d.probs[3], 0.75, 1e-12);
  EXPECT_NEAR(d.probs[4], 0.125, 1e-12);
  EXPECT_NEAR(d.mass(), 0.875, 1e-12);
}

// Serves a fixed first-token distribution.
class FixedClient : public LlmClient {
 public:
  explicit FixedClient(std::vector<TokenLogprob> tokens) : tokens_(std::move(tokens)) {}
  LlmResponse Complete(const LlmRequest& request) override {
    last = request;
    return {"", tokens_};
  }
  LlmRequest last;

 private:
  std::vector<TokenLogprob> tokens_;
};

const char kPrompt[] =
    "### system\nRate fit.\n### user\n{request}\n{movie_title}\n{summary}\n";

TEST(LlmJudgeTest, PassesThroughSingleGrade) {
  auto client = std::make_shared<FixedClient>(std::vector<TokenLogprob>{{"3", std::log(0.95)}});
  LlmJudge judge(client, PromptTemplate::Parse(kPrompt));
  const Item item{1, "Heat (1995)", "A heist.", {"Crime"}, 1990};
  Request r;
  r.text = "crime films";
  const uint64_t before = Instrumentation::Get().Snapshot().judge_calls;
  const JudgeScore s = judge.Score(item, r);
  EXPECT_NEAR(s.raw_expected, 3.0, 1e-12);
  EXPECT_EQ(s.source, JudgeSource::kLlm);
  EXPECT_EQ(Instrumentation::Get().Snapshot().judge_calls, before + 1);
  EXPECT_EQ(client->last.max_tokens, 1);
  EXPECT_NE(client->last.user.find("crime films"), std::string::npos);
  EXPECT_NE(client->last.user.find("Heat (1995)"), std::string::npos);
}

TEST(LlmJudgeTest, NoGradeTokensIsAComprehensionError) {
  auto client = std::make_shared<FixedClient>(
      std::vector<TokenLogprob>{{"Sure", std::log(0.9)}, {"I", std::log(0.1)}});
  LlmJudge judge(client, PromptTemplate::Parse(kPrompt));
  Request r;
  r.text = "anything";
  EXPECT_THROW(judge.Score({1, "A", "B", {}, std::nullopt}, r), ComprehensionError);
}

TEST(LlmJudgeTest, ReplayFixtureReproducesPrecomputedExpectations) {
  Catalog catalog = Catalog::Load(testing::DataPath("judge_replay_items.csv"));
  catalog.AttachSummariesFile(testing::DataPath("judge_replay_summaries.jsonl"));
  std::shared_ptr<LlmClient> client =
      ReplayLlmClient::FromFile(testing::DataPath("judge_replay.jsonl"));
  LlmJudge judge(client, LoadPrompt("item_judge"));
  const auto expected =
      nlohmann::json::parse(ReadFile(testing::DataPath("judge_replay_expected.json")));
  ASSERT_EQ(expected.size(), catalog.size());
  for (const auto& e : expected) {
    Request r;
    r.text = e["request"].get<std::string>();
    const JudgeScore s = judge.Score(catalog.Get(e["item_id"].get<ItemId>()), r);
    EXPECT_NEAR(s.raw_expected, e["raw_expected"].get<double>(), 1e-12);
    EXPECT_NEAR(s.normalized, e["normalized"].get<double>(), 1e-12);
  }
}

class SyntheticJudgeTest : public ::testing::Test {
 protected:
  Catalog catalog_ = MakeSyntheticWorld({.n_items = 100, .n_users = 2}).catalog;
  RuleLexicon lexicon_ = RuleLexicon::ForCatalog(catalog_);

  double Score(const Item& item, const std::string& text) {
    return JudgeSynthetic(item, CompileRules(text, lexicon_)).normalized;
  }
};

TEST_F(SyntheticJudgeTest, SingleGenreRequest) {
  const SyntheticRules rules = CompileRules("I want comedies", lexicon_);
  ASSERT_EQ(rules.predicates.size(), 1u);
  EXPECT_EQ(rules.predicates[0].kind, Predicate::Kind::kGenre);
  EXPECT_EQ(rules.predicates[0].value, "Comedy");
  EXPECT_DOUBLE_EQ(rules.predicates[0].weight, 0.5);
  EXPECT_EQ(Score({1, "X", "", {"Comedy"}, 1990}, "I want comedies"), 1.0);
  EXPECT_EQ(Score({1, "X", "", {"Drama"}, 1990}, "I want comedies"), 0.0);
}

TEST_F(SyntheticJudgeTest, NoPredicatesIsNeutral) {
  EXPECT_TRUE(CompileRules("surprise me please", lexicon_).predicates.empty());
  for (const Item& item : catalog_.items()) EXPECT_EQ(Score(item, "surprise me please"), 0.5);
}

TEST_F(SyntheticJudgeTest, ConjunctionWithNegation) {
  const SyntheticRules rules = CompileRules("Horror from the 1990s but not zombies", lexicon_);
  ASSERT_EQ(rules.predicates.size(), 3u);
  int negated = 0;
  for (const Predicate& p : rules.predicates) {
    if (p.negated) {
      ++negated;
      EXPECT_EQ(p.kind, Predicate::Kind::kTerm);
      EXPECT_EQ(p.value, "zomby");
      EXPECT_DOUBLE_EQ(p.weight, 0.5);
    } else {
      EXPECT_DOUBLE_EQ(p.weight, 0.25);
    }
  }
  EXPECT_EQ(negated, 1);
  const Item fit{1, "Night Shift", "a quiet town", {"Horror"}, 1990};
  const Item zombies{2, "Night Shift", "a town of zombies", {"Horror"}, 1990};
  EXPECT_EQ(Score(fit, "Horror from the 1990s but not zombies"), 1.0);
  EXPECT_EQ(Score(zombies, "Horror from the 1990s but not zombies"), 0.5);
}

TEST_F(SyntheticJudgeTest, UsedToClauseIsIgnored) {
  const SyntheticRules rules = CompileRules("I used to like horror but now I want comedy", lexicon_);
  ASSERT_EQ(rules.predicates.size(), 1u);
  EXPECT_EQ(rules.predicates[0].value, "Comedy");
}

TEST_F(SyntheticJudgeTest, ScoresAreInRangeAndRepeatable) {
  const std::vector<std::string> texts = {"comedies from the 1980s", "never horror",
                                          "a drama about love without war",
                                          "sci-fi or fantasy with robots"};
  for (const std::string& t : texts) {
    for (const Item& item : catalog_.items()) {
      const double a = Score(item, t);
      EXPECT_GE(a, 0.0);
      EXPECT_LE(a, 1.0);
      EXPECT_EQ(a, Score(item, t));
    }
  }
}

TEST(JudgedPairTest, JsonRoundTrip) {
  JudgedPair p{42, "r7", JudgeScore::FromRaw(4.25, JudgeSource::kLlm)};
  const JudgedPair q = JudgedPairFromJson(JudgedPairToJson(p));
  EXPECT_EQ(q.item_id, 42);
  EXPECT_EQ(q.request_id, "r7");
  EXPECT_EQ(q.score.raw_expected, 4.25);
  EXPECT_EQ(q.score.normalized, 0.8125);
  EXPECT_EQ(q.score.source, JudgeSource::kLlm);
}

}  // namespace
}  // namespace steerrec
