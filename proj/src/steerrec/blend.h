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

// Rank interpolation between engagement scores and value scores.
//
// Each score map is turned into ranks within the candidate set (rank 1 is
// the highest score, ties go to the smaller item id) and ranks into
// s = 1 - (rank - 1) / (n - 1). The blended score is
//
//   (1 - w_control) * s_base + w_control * s_value

#ifndef STEERREC_BLEND_H_
#define STEERREC_BLEND_H_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "steerrec/catalog.h"
#include "steerrec/engagement.h"

namespace steerrec {

struct BlendConfig {
  double w_control = 0.995;
  // Weights of the engagement signals summed into the base score.
  std::map<std::string, double> signal_weights = {{"sar", 1.0}};

  // Throws kInvalidArgument when w_control is outside [0, 1] or a weight is
  // not finite.
  void Validate() const;
};

struct RankedScore {
  size_t rank = 0;  // 1-based
  double normalized = 0.0;
};

// Throws kInvalidArgument for NaN scores. An empty map yields an empty map.
std::map<ItemId, RankedScore> RankScores(const ScoreMap& scores);

// Weighted sum of named signals over the union of their items. Throws
// kInvalidArgument for a signal without a weight, or an item one signal
// scores and another does not.
ScoreMap CombineSignals(const std::map<std::string, ScoreMap>& signals,
                        const std::map<std::string, double>& weights);

struct FeedEntry {
  ItemId item_id = 0;
  double base_score = 0.0;
  double value_score = 0.0;  // 0 when the feed has no request
  size_t base_rank = 0;
  size_t value_rank = 0;  // 0 when the feed has no request
  double blended_score = 0.0;
};

struct Feed {
  // Blended score descending, then item id ascending.
  std::vector<FeedEntry> entries;
  size_t k = 0;
  bool has_request = false;
  // Set when the candidate set was empty.
  bool no_matches = false;

  std::vector<ItemId> ItemIds() const;
};

// Top-k of the candidates by blended rank score. Throws kInvalidArgument when
// a candidate lacks a base or value score. k = 0 gives an empty feed.
Feed Blend(const ScoreMap& base, const ScoreMap& value, const BlendConfig& config,
           std::span<const ItemId> candidates, size_t k);

// Top-k of the candidates by base rank alone (no request).
Feed BaseFeed(const ScoreMap& base, std::span<const ItemId> candidates, size_t k);

}  // namespace steerrec

#endif  // STEERREC_BLEND_H_
