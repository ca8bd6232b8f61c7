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

// Reachability harness: how close can a source user steer their feed to a
// target user's engagement feed, using filters alone or filters plus
// requests?
//
// Feeds are compared by the cosine between their mean item vectors and by
// top-k overlap. Distance is 1 - cosine.

#ifndef STEERREC_REACHABILITY_H_
#define STEERREC_REACHABILITY_H_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "steerrec/catalog.h"
#include "steerrec/engine.h"
#include "steerrec/featurizer.h"
#include "steerrec/llm_client.h"
#include "steerrec/prompts.h"
#include "steerrec/synthetic_world.h"

namespace steerrec {

struct FeedSimilarity {
  double cosine = 0.0;
  double overlap = 0.0;
  double distance() const { return 1.0 - cosine; }
};

// Cosine of the mean item vectors (0 when either mean is zero) and
// |a & b| / max(|a|, |b|). Throws kInvalidArgument for an empty feed.
FeedSimilarity CompareFeeds(const std::vector<ItemId>& a, const std::vector<ItemId>& b,
                            const ItemFeatures& embeddings);

struct FilterSearchResult {
  FilterSpec filter;
  FeedSimilarity similarity;
  std::vector<ItemId> feed;
  // Specs evaluated, in evaluation order; empty pools are left out.
  std::vector<FilterSpec> evaluated;
};

// Tallies genres and decades over the target feed, then evaluates the empty
// spec, nested genre sets of the most frequent genres (at most four; ties by
// label) and each of those paired with one of the three most frequent
// decades (ties by decade), plus each decade alone. Returns the spec whose
// filtered engagement feed for the source is closest to the target.
FilterSearchResult GreedyFilterSearch(const InteractionLog* source,
                                      const std::vector<ItemId>& target_feed,
                                      const Recommender& recommender, size_t k);

// What a request proposer sees on each iteration.
struct Observation {
  UserId source_id = 0;
  UserId target_id = 0;
  int iteration = 0;  // 0-based
  std::string target_feed;
  std::string filters;
  std::string current_feed;
  // One line per earlier try: request and the cosine it reached.
  std::string history;
  std::vector<ItemId> target_items;
  std::vector<ItemId> current_items;
};

// Observation rendering format, recorded in reports.
inline constexpr char kObservationFormat[] = "feed-lines:v1";

// "- Title [Genre, Genre]" per line.
std::string RenderFeed(const std::vector<ItemId>& feed, const Catalog& catalog);

class RequestProposer {
 public:
  virtual ~RequestProposer() = default;
  virtual std::string name() const = 0;
  // May throw; the harness skips that iteration.
  virtual std::string Propose(const Observation& obs) const = 0;
};

// Replays a fixed request list per target user, cycling through it.
class ScriptedProposer : public RequestProposer {
 public:
  explicit ScriptedProposer(std::map<UserId, std::vector<std::string>> scripts)
      : scripts_(std::move(scripts)) {}
  std::string name() const override { return "scripted"; }
  std::string Propose(const Observation& obs) const override;

 private:
  std::map<UserId, std::vector<std::string>> scripts_;
};

// Scripts for synthetic personas: the defining request, then the genre
// alone, then the keyword (or decade) alone.
std::map<UserId, std::vector<std::string>> PersonaScripts(const std::vector<Persona>& personas);

// Describes the target feed from its most common genre, decade and content
// keyword, dropping detail on later iterations.
class DescriptiveProposer : public RequestProposer {
 public:
  DescriptiveProposer(std::shared_ptr<const Catalog> catalog,
                      std::vector<std::string> keywords);
  std::string name() const override { return "descriptive"; }
  std::string Propose(const Observation& obs) const override;

 private:
  std::shared_ptr<const Catalog> catalog_;
  std::vector<std::string> keywords_;
};

// Asks a chat model, using the reachability_agent prompt.
class LlmProposer : public RequestProposer {
 public:
  LlmProposer(std::shared_ptr<LlmClient> client, PromptTemplate prompt);
  std::string name() const override { return "llm"; }
  std::string Propose(const Observation& obs) const override;

 private:
  std::shared_ptr<LlmClient> client_;
  PromptTemplate prompt_;
};

struct TryRecord {
  FilterSpec filter;
  int iteration = -1;  // -1 for the filter-only starting point
  std::string request;
  double cosine = 0.0;
  std::string error;
};

struct TrialResult {
  size_t trial = 0;
  UserId source_id = 0;
  UserId target_id = 0;
  FeedSimilarity baseline;
  FilterSpec filters_only_filter;
  FeedSimilarity filters_only;
  FilterSpec ctrl_filter;
  std::string ctrl_request;  // empty when a filter-only start was best
  FeedSimilarity ctrl;
  std::vector<TryRecord> tries;
  // Non-empty when the trial failed as a whole.
  std::string error;
};

struct AgentConfig {
  int budget = 3;
  BlendConfig blend;
  size_t k = 10;
};

// Starts from every subset of the filter's atoms (genres and decade). Each
// start's filter-only feed counts as a candidate; then up to `budget`
// propose -> recommend -> compare rounds run from it. Keeps the closest feed.
TrialResult AgentSearch(const InteractionLog* source, UserId target_id,
                        const std::vector<ItemId>& target_feed, const FilterSpec& best_filter,
                        const RequestProposer& proposer, const Recommender& recommender,
                        const AgentConfig& config);

struct ExperimentConfig {
  size_t n_trials = 50;
  uint64_t seed = 0;
  AgentConfig agent;
  // Concurrent trials; 1 runs inline.
  int max_concurrency = 1;
};

struct BinSummary {
  size_t n = 0;
  double min_baseline = 0.0;
  double max_baseline = 0.0;
  double mean_filters_only_distance = 0.0;
  double mean_ctrl_distance = 0.0;
  double filters_closed_mean = 0.0;  // percent of baseline distance closed
  double filters_closed_se = 0.0;
  double ctrl_closed_mean = 0.0;
  double ctrl_closed_se = 0.0;
  // Percent of the filters-only remaining distance removed by requests plus filters.
  double remaining_cut = 0.0;
};

struct ExperimentReport {
  std::string proposer;
  uint64_t seed = 0;
  std::vector<TrialResult> trials;
  size_t failed = 0;
  size_t zero_distance = 0;
  std::vector<BinSummary> bins;  // quintiles of baseline distance
  BinSummary overall;

  std::string ToJson() const;
  std::string ToCsv() const;
};

// Samples distinct (source, target) user pairs, runs both searches per
// pair and bins trials by baseline distance. Failed and zero-distance
// trials are reported but left out of the bins.
ExperimentReport RunExperiment(const std::vector<InteractionLog>& logs,
                               const Recommender& recommender,
                               const RequestProposer& proposer,
                               const ExperimentConfig& config);

}  // namespace steerrec

#endif  // STEERREC_REACHABILITY_H_
