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


#include "support/fixtures.h"

#include <atomic>
#include <filesystem>

#include <unistd.h>

#include "steerrec/engagement.h"
#include "steerrec/featurizer.h"
#include "steerrec/judge.h"
#include "steerrec/rng.h"

namespace steerrec::testing {

namespace fs = std::filesystem;

std::string MakeTempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const fs::path dir = fs::temp_directory_path() /
                       ("steerrec_" + tag + "_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::string DataPath(const std::string& name) {
  return std::string(STEERREC_TEST_DATA_DIR) + "/" + name;
}

std::shared_ptr<const Recommender> MakeRecommender(std::shared_ptr<const Catalog> catalog,
                                                   const std::vector<InteractionLog>& logs,
                                                   const TowerParams& params) {
  std::shared_ptr<const Featurizer> featurizer = Featurizer::Create({});
  auto items = std::make_shared<const ItemFeatures>(ItemFeatures::Build(*catalog, *featurizer));
  auto engagement =
      std::make_shared<const CooccurrenceModel>(CooccurrenceModel::Fit(*catalog, logs));
  auto shared_params = std::make_shared<const TowerParams>(params);
  auto index = std::make_shared<const ItemIndex>(BuildIndex(*items, params, 0));
  return std::make_shared<const Recommender>(catalog, engagement, featurizer, items,
                                             shared_params, index);
}

TrainedWorld BuildTrainedWorld(const TrainedWorldOptions& options) {
  TrainedWorld out;
  out.world = MakeSyntheticWorld(options.world);
  out.catalog = std::make_shared<const Catalog>(out.world.catalog);

  RequestGenOptions gen;
  gen.n_per_category = options.n_per_category;
  gen.seed = options.seed;
  out.requests = GenerateRequests(*out.catalog, out.world.logs, gen);

  const SyntheticJudge judge(RuleLexicon::ForCatalog(*out.catalog));
  CorpusOptions corpus_options;
  corpus_options.items_per_request = options.items_per_request;
  corpus_options.seed = options.seed;
  out.corpus = BuildCorpus(out.requests, *out.catalog, judge, corpus_options);

  const auto featurizer = Featurizer::Create({});
  const ItemFeatures items = ItemFeatures::Build(*out.catalog, *featurizer);
  const UserProfiles users = UserProfiles::Build(out.world.logs, items);
  TrainConfig config;
  config.seed = options.seed;
  config.max_epochs = options.max_epochs;
  TrainResult trained = Train(out.corpus.tuples, *featurizer, items, users, config);
  out.report = trained.report;
  out.recommender = MakeRecommender(out.catalog, out.world.logs, trained.params);
  return out;
}

namespace {

const std::vector<std::string>& ComedyRequests() {
  static const std::vector<std::string> kTexts = {
      "comedy movies", "show me a comedy", "I want comedies tonight",
      "something funny, a comedy", "comedy films please", "a good comedy"};
  return kTexts;
}

const std::vector<std::string>& OtherRequests() {
  static const std::vector<std::string> kTexts = {
      "horror films",         "a drama please",     "show me action movies",
      "romance tonight",      "thriller films",     "I want crime movies",
      "fantasy adventures",   "sci-fi please",      "animation for tonight",
      "a good western"};
  return kTexts;
}

}  // namespace

std::vector<TrainingTuple> SeparableComedyCorpus(const Catalog& catalog, size_t n_tuples,
                                                 uint64_t seed) {
  Rng rng(seed);
  const std::vector<ItemId> ids = catalog.Ids();
  std::vector<TrainingTuple> out;
  out.reserve(n_tuples);
  for (size_t n = 0; n < n_tuples; ++n) {
    const bool comedy_request = rng.Uniform() < 0.5;
    const auto& pool = comedy_request ? ComedyRequests() : OtherRequests();
    TrainingTuple t;
    t.request.text = pool[rng.Below(pool.size())];
    t.request.id = "s" + std::to_string(n);
    t.request.category = "smart-filtering-easy";
    t.item_id = ids[rng.Below(ids.size())];
    const bool comedy_item = catalog.Get(t.item_id).genres.count("Comedy") > 0;
    t.target = comedy_request && comedy_item ? 1.0 : 0.0;
    t.split = AssignSplit(t.request.text, t.item_id);
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::string> HeldOutComedyRequests() {
  return {"comedies", "any comedy at all", "comedy", "a comedy film"};
}

}  // namespace steerrec::testing
