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

#include <gtest/gtest.h>

#include <map>
#include <set>

#include "steerrec/error.h"
#include "steerrec/instrumentation.h"
#include "steerrec/synthetic_world.h"

namespace steerrec {
namespace {

class SimgenTest : public ::testing::Test {
 protected:
  SyntheticWorld world_ = MakeSyntheticWorld({.n_items = 200, .n_users = 12});
};

TEST(InstantiateTemplateTest, LogicalFilteringExample) {
  TemplateSlots slots;
  slots.genre = "Horror";
  slots.decade = 1990;
  slots.keyword = "zombies";
  EXPECT_EQ(InstantiateTemplate("{Genre} from the {decade}s but not {keyword}", slots),
            "Horror from the 1990s but not zombies");
  EXPECT_EQ(InstantiateTemplate("more {genre} please", slots), "more horror please");
}

TEST(RequestCategoriesTest, TenNamedCategories) {
  const auto& cats = RequestCategories();
  ASSERT_EQ(cats.size(), 10u);
  std::set<std::string> names;
  for (const auto& c : cats) {
    names.insert(c.name);
    EXPECT_FALSE(c.templates.empty()) << c.name;
  }
  EXPECT_EQ(names.size(), 10u);
  EXPECT_EQ(FindCategory("logical-filtering").name, "logical-filtering");
  EXPECT_THROW(FindCategory("nope"), Error);
  // The logical-filtering category pairs a conjunction with a negation.
  bool found = false;
  for (const auto& t : FindCategory("logical-filtering").templates) {
    found |= t.find(" but not ") != std::string::npos;
  }
  EXPECT_TRUE(found);
}

TEST_F(SimgenTest, TemplateRequestsAreDeterministic) {
  RequestGenOptions options;
  options.n_per_category = 2;
  options.seed = 7;
  const auto a = GenerateRequests(world_.catalog, world_.logs, options);
  const auto b = GenerateRequests(world_.catalog, world_.logs, options);
  ASSERT_EQ(a.size(), 20u);
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, b[i].id);
    EXPECT_EQ(a[i].text, b[i].text);
    EXPECT_EQ(a[i].category, b[i].category);
    EXPECT_EQ(a[i].id, "r" + std::to_string(i));
    EXPECT_FALSE(a[i].text.empty());
    EXPECT_EQ(a[i].text.find('{'), std::string::npos) << a[i].text;
  }
}

TEST_F(SimgenTest, OneRequestPerCategory) {
  RequestGenOptions options;
  options.n_per_category = 1;
  const auto requests = GenerateRequests(world_.catalog, world_.logs, options);
  ASSERT_EQ(requests.size(), 10u);
  std::set<std::string> seen;
  for (const auto& r : requests) seen.insert(r.category);
  EXPECT_EQ(seen.size(), 10u);
  for (const auto& c : RequestCategories()) EXPECT_TRUE(seen.count(c.name)) << c.name;
}

TEST_F(SimgenTest, ExcludedTextsAreNeverProduced) {
  RequestGenOptions options;
  options.n_per_category = 3;
  options.seed = 1;
  const auto first = GenerateRequests(world_.catalog, world_.logs, options);
  for (const auto& r : first) options.exclude_texts.push_back(r.text);
  options.seed = 2;
  for (const auto& r : GenerateRequests(world_.catalog, world_.logs, options)) {
    EXPECT_EQ(std::count(options.exclude_texts.begin(), options.exclude_texts.end(), r.text), 0)
        << r.text;
  }
}

TEST_F(SimgenTest, RejectsBadOptions) {
  RequestGenOptions options;
  options.n_per_category = 0;
  EXPECT_THROW(GenerateRequests(world_.catalog, world_.logs, options), Error);
  options.n_per_category = 1;
  options.source = RequestSource::kLlm;
  try {
    GenerateRequests(world_.catalog, world_.logs, options);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
  }
}

class ScriptedClient : public LlmClient {
 public:
  LlmResponse Complete(const LlmRequest& request) override {
    prompts.push_back(request.user);
    return {"Sure! <statement> request number " + std::to_string(prompts.size()) +
                " </statement>",
            {}};
  }
  std::vector<std::string> prompts;
};

TEST_F(SimgenTest, LlmSourceExtractsStatements) {
  auto client = std::make_shared<ScriptedClient>();
  RequestGenOptions options;
  options.n_per_category = 1;
  options.source = RequestSource::kLlm;
  options.client = client;
  const auto requests = GenerateRequests(world_.catalog, world_.logs, options);
  ASSERT_EQ(requests.size(), 10u);
  EXPECT_EQ(requests[0].text, "request number 1");
  EXPECT_EQ(client->prompts.size(), 10u);
  EXPECT_NE(client->prompts[0].find(RequestCategories()[0].description), std::string::npos);
}

TEST(ExtractStatementTest, RequiresNonEmptyTags) {
  EXPECT_EQ(ExtractStatement("x <statement>\n hi there \n</statement> y"), "hi there");
  for (const char* bad : {"no tags", "<statement>  </statement>", "<statement>open"}) {
    try {
      ExtractStatement(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kProvider);
    }
  }
}

TEST(SplitTest, StableSeedFreeAndRoughlyEightyTenTen) {
  std::map<Split, int> counts;
  for (int i = 0; i < 5000; ++i) {
    const std::string text = "request " + std::to_string(i % 97);
    const Split s = AssignSplit(text, i);
    EXPECT_EQ(s, AssignSplit(text, i));
    ++counts[s];
  }
  EXPECT_NEAR(counts[Split::kTrain] / 5000.0, 0.8, 0.03);
  EXPECT_NEAR(counts[Split::kValidation] / 5000.0, 0.1, 0.03);
  EXPECT_NEAR(counts[Split::kTest] / 5000.0, 0.1, 0.03);
  for (Split s : {Split::kTrain, Split::kValidation, Split::kTest}) {
    EXPECT_EQ(SplitFromName(SplitName(s)), s);
  }
  EXPECT_THROW(SplitFromName("holdout"), Error);
}

TEST_F(SimgenTest, CorpusCardinalityRangeAndDeterminism) {
  RequestGenOptions gen;
  gen.n_per_category = 5;
  gen.seed = 4;
  const auto requests = GenerateRequests(world_.catalog, world_.logs, gen);
  ASSERT_EQ(requests.size(), 50u);
  const SyntheticJudge judge(RuleLexicon::ForCatalog(world_.catalog));
  CorpusOptions options;
  options.items_per_request = 100;
  options.seed = 9;
  const uint64_t before = Instrumentation::Get().Snapshot().judge_calls;
  const Corpus a = BuildCorpus(requests, world_.catalog, judge, options);
  EXPECT_EQ(Instrumentation::Get().Snapshot().judge_calls, before + 5000);
  ASSERT_EQ(a.tuples.size(), 5000u);
  std::set<std::string> categories;
  std::map<std::pair<std::string, ItemId>, Split> split_of;
  for (const auto& t : a.tuples) {
    EXPECT_GE(t.target, 0.0);
    EXPECT_LE(t.target, 1.0);
    categories.insert(t.request.category);
    auto [it, fresh] = split_of.emplace(std::make_pair(t.request.text, t.item_id), t.split);
    EXPECT_EQ(it->second, t.split);
    EXPECT_EQ(t.split, AssignSplit(t.request.text, t.item_id));
  }
  EXPECT_EQ(categories.size(), 10u);

  options.max_concurrency = 3;
  const Corpus b = BuildCorpus(requests, world_.catalog, judge, options);
  EXPECT_EQ(CorpusToJsonl(a.tuples), CorpusToJsonl(b.tuples));
}

TEST_F(SimgenTest, CorpusJsonlRoundTrip) {
  RequestGenOptions gen;
  gen.n_per_category = 1;
  const auto requests = GenerateRequests(world_.catalog, world_.logs, gen);
  const SyntheticJudge judge(RuleLexicon::ForCatalog(world_.catalog));
  CorpusOptions options;
  options.items_per_request = 7;
  const Corpus c = BuildCorpus(requests, world_.catalog, judge, options);
  const std::string jsonl = CorpusToJsonl(c.tuples);
  const auto back = CorpusFromJsonl(jsonl);
  ASSERT_EQ(back.size(), c.tuples.size());
  EXPECT_EQ(CorpusToJsonl(back), jsonl);
  EXPECT_THROW(CorpusFromJsonl("{\"broken\": \n"), Error);
}

// Fails to comprehend a chosen set of (request, item) pairs.
class PickyJudge : public Judge {
 public:
  explicit PickyJudge(std::set<ItemId> confused) : confused_(std::move(confused)) {}
  std::string name() const override { return "picky"; }

 protected:
  JudgeScore DoScore(const Item& item, const Request&) const override {
    if (confused_.count(item.id)) throw ComprehensionError(0.5);
    return JudgeScore::FromRaw(3.0, JudgeSource::kLlm);
  }

 private:
  std::set<ItemId> confused_;
};

TEST_F(SimgenTest, ComprehensionFailuresAreSkippedAndCounted) {
  Request r;
  r.id = "r0";
  r.text = "anything";
  CorpusOptions options;
  options.items_per_request = world_.catalog.size();
  const Corpus c = BuildCorpus({r}, world_.catalog, PickyJudge({3, 17, 42}), options);
  EXPECT_EQ(c.tuples.size(), world_.catalog.size() - 3);
  ASSERT_EQ(c.skipped.size(), 3u);
  EXPECT_EQ(c.skipped[0].request_id, "r0");
  options.items_per_request = world_.catalog.size() + 1;
  EXPECT_THROW(BuildCorpus({r}, world_.catalog, PickyJudge({}), options), Error);
}

}  // namespace
}  // namespace steerrec
