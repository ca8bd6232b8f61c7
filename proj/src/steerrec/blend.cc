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

#include "steerrec/blend.h"

#include <algorithm>
#include <cmath>

#include "steerrec/error.h"

namespace steerrec {

namespace {

ScoreMap Restrict(const ScoreMap& scores, std::span<const ItemId> candidates,
                  const char* what) {
  ScoreMap out;
  for (ItemId id : candidates) {
    auto it = scores.find(id);
    if (it == scores.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "candidate " + std::to_string(id) + " has no " + what + " score");
    }
    out.emplace(id, it->second);
  }
  return out;
}

void SortAndTruncate(Feed& feed, size_t k) {
  std::sort(feed.entries.begin(), feed.entries.end(),
            [](const FeedEntry& a, const FeedEntry& b) {
              if (a.blended_score != b.blended_score) {
                return a.blended_score > b.blended_score;
              }
              return a.item_id < b.item_id;
            });
  if (feed.entries.size() > k) feed.entries.resize(k);
}

}  // namespace

void BlendConfig::Validate() const {
  if (!(w_control >= 0.0 && w_control <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "w_control must lie in [0, 1], got " + std::to_string(w_control));
  }
  for (const auto& [name, w] : signal_weights) {
    if (!std::isfinite(w)) {
      throw Error(ErrorCode::kInvalidArgument, "weight of signal '" + name + "' is not finite");
    }
  }
}

std::map<ItemId, RankedScore> RankScores(const ScoreMap& scores) {
  std::vector<std::pair<double, ItemId>> order;
  order.reserve(scores.size());
  for (const auto& [id, s] : scores) {
    if (std::isnan(s)) {
      throw Error(ErrorCode::kInvalidArgument, "score of item " + std::to_string(id) + " is NaN");
    }
    order.emplace_back(s, id);
  }
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::map<ItemId, RankedScore> out;
  const size_t n = order.size();
  for (size_t i = 0; i < n; ++i) {
    const double s = n == 1 ? 1.0 : 1.0 - static_cast<double>(i) / static_cast<double>(n - 1);
    out[order[i].second] = {i + 1, s};
  }
  return out;
}

ScoreMap CombineSignals(const std::map<std::string, ScoreMap>& signals,
                        const std::map<std::string, double>& weights) {
  ScoreMap out;
  bool first = true;
  for (const auto& [name, scores] : signals) {
    auto w = weights.find(name);
    if (w == weights.end()) {
      throw Error(ErrorCode::kInvalidArgument, "no weight for signal '" + name + "'");
    }
    if (!first && scores.size() != out.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "signal '" + name + "' covers a different item set");
    }
    for (const auto& [id, s] : scores) {
      if (first) {
        out[id] = w->second * s;
        continue;
      }
      auto it = out.find(id);
      if (it == out.end()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "signal '" + name + "' scores item " + std::to_string(id) +
                        " that other signals do not");
      }
      it->second += w->second * s;
    }
    first = false;
  }
  return out;
}

std::vector<ItemId> Feed::ItemIds() const {
  std::vector<ItemId> ids;
  ids.reserve(entries.size());
  for (const FeedEntry& e : entries) ids.push_back(e.item_id);
  return ids;
}

Feed Blend(const ScoreMap& base, const ScoreMap& value, const BlendConfig& config,
           std::span<const ItemId> candidates, size_t k) {
  config.Validate();
  const ScoreMap b = Restrict(base, candidates, "base");
  const ScoreMap v = Restrict(value, candidates, "value");
  const auto base_ranks = RankScores(b);
  const auto value_ranks = RankScores(v);
  Feed feed;
  feed.k = k;
  feed.has_request = true;
  feed.no_matches = candidates.empty();
  const double w = config.w_control;
  for (const auto& [id, s] : b) {
    const RankedScore& rb = base_ranks.at(id);
    const RankedScore& rv = value_ranks.at(id);
    feed.entries.push_back({id, s, v.at(id), rb.rank, rv.rank,
                            (1.0 - w) * rb.normalized + w * rv.normalized});
  }
  SortAndTruncate(feed, k);
  return feed;
}

Feed BaseFeed(const ScoreMap& base, std::span<const ItemId> candidates, size_t k) {
  const ScoreMap b = Restrict(base, candidates, "base");
  const auto ranks = RankScores(b);
  Feed feed;
  feed.k = k;
  feed.no_matches = candidates.empty();
  for (const auto& [id, s] : b) {
    const RankedScore& r = ranks.at(id);
    feed.entries.push_back({id, s, 0.0, r.rank, 0, r.normalized});
  }
  SortAndTruncate(feed, k);
  return feed;
}

}  // namespace steerrec
