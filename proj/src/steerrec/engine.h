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

// The steerable recommender: engagement model, featurizer, towers and index
// bundled behind one Recommend call.

#ifndef STEERREC_ENGINE_H_
#define STEERREC_ENGINE_H_

#include <memory>
#include <optional>
#include <set>
#include <string>

#include "steerrec/blend.h"
#include "steerrec/catalog.h"
#include "steerrec/engagement.h"
#include "steerrec/featurizer.h"
#include "steerrec/value_model.h"

namespace steerrec {

struct RecommendQuery {
  // Null for a cold-start user (all-zero base scores).
  const InteractionLog* log = nullptr;
  // Absent or blank: pure engagement ranking.
  std::optional<std::string> request;
  FilterSpec filter;
  BlendConfig blend;
  size_t k = 10;
  // Removed from the candidates, e.g. items marked watched.
  std::set<ItemId> exclude;
  // Removes the user's engaged items from the candidates.
  bool mask_engaged = true;
};

class Recommender {
 public:
  // Throws kFingerprintMismatch when the index, parameters, item features
  // and featurizer disagree.
  Recommender(std::shared_ptr<const Catalog> catalog,
              std::shared_ptr<const CooccurrenceModel> engagement,
              std::shared_ptr<const Featurizer> featurizer,
              std::shared_ptr<const ItemFeatures> item_features,
              std::shared_ptr<const TowerParams> params,
              std::shared_ptr<const ItemIndex> index);

  const Catalog& catalog() const { return *catalog_; }
  const CooccurrenceModel& engagement() const { return *engagement_; }
  const Featurizer& featurizer() const { return *featurizer_; }
  const ItemFeatures& item_features() const { return *item_features_; }

  // Candidates after filter, exclusions and engaged-item masking, in
  // canonical order. Throws kInvalidArgument for an unknown genre.
  std::vector<ItemId> Candidates(const RecommendQuery& query) const;

  // Encodes the request at most once; an empty candidate set returns a feed
  // flagged no_matches without encoding.
  Feed Recommend(const RecommendQuery& query) const;

 private:
  std::shared_ptr<const Catalog> catalog_;
  std::shared_ptr<const CooccurrenceModel> engagement_;
  std::shared_ptr<const Featurizer> featurizer_;
  std::shared_ptr<const ItemFeatures> item_features_;
  std::shared_ptr<const TowerParams> params_;
  std::shared_ptr<const ItemIndex> index_;
};

}  // namespace steerrec

#endif  // STEERREC_ENGINE_H_
