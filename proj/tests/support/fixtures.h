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


// Shared test fixtures: temporary directories, small synthetic worlds and
// trained model bundles.

#ifndef STEERREC_TESTS_SUPPORT_FIXTURES_H_
#define STEERREC_TESTS_SUPPORT_FIXTURES_H_

#include <memory>
#include <string>
#include <vector>

#include "steerrec/catalog.h"
#include "steerrec/engine.h"
#include "steerrec/simgen.h"
#include "steerrec/synthetic_world.h"
#include "steerrec/value_model.h"

namespace steerrec::testing {

// Fresh empty directory under the system temp dir.
std::string MakeTempDir(const std::string& tag);

// Path inside tests/data.
std::string DataPath(const std::string& name);

struct TrainedWorldOptions {
  SyntheticWorldConfig world{.n_items = 150, .n_users = 16};
  size_t n_per_category = 2;
  size_t items_per_request = 40;
  uint64_t seed = 3;
  int max_epochs = 8;
};

struct TrainedWorld {
  SyntheticWorld world;
  std::shared_ptr<const Catalog> catalog;
  std::vector<Request> requests;
  Corpus corpus;
  TrainReport report;
  std::shared_ptr<const Recommender> recommender;
};

// Synthetic world, template requests judged by the synthetic judge, towers
// trained over the hashed featurizer and an index, bundled as a Recommender.
TrainedWorld BuildTrainedWorld(const TrainedWorldOptions& options = {});

// Bundles models for an existing catalog and logs.
std::shared_ptr<const Recommender> MakeRecommender(std::shared_ptr<const Catalog> catalog,
                                                   const std::vector<InteractionLog>& logs,
                                                   const TowerParams& params);

// Separable corpus: requests naming Comedy or another genre; the target is
// 1 exactly when the request names Comedy and the item is a Comedy.
std::vector<TrainingTuple> SeparableComedyCorpus(const Catalog& catalog, size_t n_tuples,
                                                 uint64_t seed);

// Requests that name Comedy in varied wording, none used in training.
std::vector<std::string> HeldOutComedyRequests();

}  // namespace steerrec::testing

#endif  // STEERREC_TESTS_SUPPORT_FIXTURES_H_
