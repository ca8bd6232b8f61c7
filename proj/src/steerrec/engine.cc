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

#include "steerrec/engine.h"

#include "steerrec/error.h"
#include "steerrec/text.h"

namespace steerrec {

Recommender::Recommender(std::shared_ptr<const Catalog> catalog,
                         std::shared_ptr<const CooccurrenceModel> engagement,
                         std::shared_ptr<const Featurizer> featurizer,
                         std::shared_ptr<const ItemFeatures> item_features,
                         std::shared_ptr<const TowerParams> params,
                         std::shared_ptr<const ItemIndex> index)
    : catalog_(std::move(catalog)),
      engagement_(std::move(engagement)),
      featurizer_(std::move(featurizer)),
      item_features_(std::move(item_features)),
      params_(std::move(params)),
      index_(std::move(index)) {
  if (!catalog_ || !engagement_ || !featurizer_ || !item_features_ || !params_ || !index_) {
    throw Error(ErrorCode::kInvalidArgument, "recommender needs every model component");
  }
  const std::string fp = featurizer_->fingerprint();
  if (item_features_->fingerprint() != fp || params_->fingerprint != fp ||
      index_->fingerprint() != fp) {
    throw Error(ErrorCode::kFingerprintMismatch,
                "featurizer '" + fp + "', item features '" + item_features_->fingerprint() +
                    "', parameters '" + params_->fingerprint + "', index '" +
                    index_->fingerprint() + "'");
  }
  if (index_->params_digest() != params_->Digest()) {
    throw Error(ErrorCode::kFingerprintMismatch,
                "index was built from different tower parameters; rebuild it");
  }
}

std::vector<ItemId> Recommender::Candidates(const RecommendQuery& query) const {
  std::set<ItemId> drop = query.exclude;
  if (query.mask_engaged && query.log != nullptr) {
    for (const RatingEvent& e : query.log->events) {
      if (engagement_->IsEngaged(e)) drop.insert(e.item_id);
    }
  }
  std::vector<ItemId> out;
  for (ItemId id : ApplyFilter(*catalog_, query.filter)) {
    if (!drop.count(id)) out.push_back(id);
  }
  return out;
}

Feed Recommender::Recommend(const RecommendQuery& query) const {
  query.blend.Validate();
  const std::vector<ItemId> candidates = Candidates(query);
  const bool has_request = query.request && !Trim(*query.request).empty();
  if (candidates.empty()) {
    Feed feed;
    feed.k = query.k;
    feed.has_request = has_request;
    feed.no_matches = true;
    return feed;
  }

  ScoreMap sar;
  if (query.log != nullptr) {
    sar = ScoreBase(*query.log, *engagement_, candidates).scores;
  } else {
    for (ItemId id : candidates) sar[id] = 0.0;
  }
  const ScoreMap base = CombineSignals({{"sar", std::move(sar)}}, query.blend.signal_weights);
  if (!has_request) return BaseFeed(base, candidates, query.k);

  Request request;
  request.text = *query.request;
  request.user_id = query.log ? query.log->user_id : 0;
  const ValueScores value =
      Predict(UserBlock(query.log, *item_features_), request, *params_, *featurizer_,
              *index_, candidates);
  return Blend(base, value, query.blend, candidates, query.k);
}

}  // namespace steerrec
