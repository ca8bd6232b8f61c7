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

// Item-item co-occurrence recommender (SAR style).
//
// An event is "engaged" when its rating reaches the affinity threshold. Two
// items co-occur once for every user who engaged both. The user's affinity
// for an item is the time-decayed sum of engaged ratings, and the base score
// of a candidate is affinity propagated through item-item similarity:
//
//   score(u, i) = sum_j affinity(u, j) * similarity(j, i)

#ifndef STEERREC_ENGAGEMENT_H_
#define STEERREC_ENGAGEMENT_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "steerrec/catalog.h"

namespace steerrec {

using ScoreMap = std::map<ItemId, double>;

enum class SimilarityKind { kJaccard = 0, kLift = 1, kCount = 2 };

struct SarConfig {
  double decay_half_life_seconds = 30.0 * 24 * 3600;
  double affinity_threshold = 3.5;
  SimilarityKind similarity = SimilarityKind::kJaccard;
};

class CooccurrenceModel {
 public:
  // Sparse row: (dense column, value) sorted by column.
  using Row = std::vector<std::pair<uint32_t, double>>;

  CooccurrenceModel() = default;

  // Fits over every catalog item; items nobody engaged keep empty rows.
  // Throws kInvalidArgument for a non-positive half-life.
  static CooccurrenceModel Fit(const Catalog& catalog,
                               const std::vector<InteractionLog>& logs,
                               const SarConfig& config = {});

  const SarConfig& config() const { return config_; }
  size_t num_items() const { return item_ids_.size(); }
  const std::vector<ItemId>& item_ids() const { return item_ids_; }
  // Largest timestamp seen during fit; the default "now" for scoring.
  int64_t reference_time() const { return reference_time_; }
  bool empty() const { return nnz_ == 0; }

  // Throws kNotFound for ids outside the fitted catalog.
  uint32_t Column(ItemId id) const;
  double Cooccurrence(ItemId a, ItemId b) const;
  double Similarity(ItemId a, ItemId b) const;
  const Row& SimilarityRow(uint32_t column) const { return similarity_[column]; }

  bool IsEngaged(const RatingEvent& e) const {
    return e.rating >= config_.affinity_threshold;
  }

  void Save(const std::string& path) const;
  static CooccurrenceModel Load(const std::string& path);
  std::string Serialize() const;
  static CooccurrenceModel Deserialize(std::string bytes);

 private:
  static double Lookup(const Row& row, uint32_t col);

  SarConfig config_;
  std::vector<ItemId> item_ids_;
  std::map<ItemId, uint32_t> column_;
  std::vector<Row> cooccur_;
  std::vector<Row> similarity_;
  int64_t reference_time_ = 0;
  size_t nnz_ = 0;
};

// Time-decayed affinity over the user's engaged events:
//   a(u, j) = sum rating * 2^(-(now - t) / half_life)
// Throws kInvalidArgument when `now` precedes an engaged event.
ScoreMap Affinity(const InteractionLog& log, const CooccurrenceModel& model,
                  int64_t now);

struct BaseScores {
  UserId user_id = 0;
  ScoreMap scores;
};

struct ScoreOptions {
  // Defaults to max(model reference time, latest event in the log).
  std::optional<int64_t> now;
  // Engaged items get -infinity instead of a score.
  bool mask_engaged = false;
};

// Throws kNotFound naming the first unknown candidate.
BaseScores ScoreBase(const InteractionLog& log, const CooccurrenceModel& model,
                     std::span<const ItemId> candidates,
                     const ScoreOptions& options = {});

// Items the user has engaged with under the model's threshold.
std::vector<ItemId> EngagedItems(const InteractionLog& log,
                                 const CooccurrenceModel& model);

}  // namespace steerrec

#endif  // STEERREC_ENGAGEMENT_H_
