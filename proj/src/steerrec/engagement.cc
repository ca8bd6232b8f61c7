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

#include "steerrec/engagement.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "steerrec/binary_io.h"
#include "steerrec/error.h"
#include "steerrec/text.h"

namespace steerrec {

namespace {

constexpr std::string_view kMagic = "SRSAR";
constexpr uint32_t kVersion = 1;

}  // namespace

CooccurrenceModel CooccurrenceModel::Fit(const Catalog& catalog,
                                         const std::vector<InteractionLog>& logs,
                                         const SarConfig& config) {
  if (!(config.decay_half_life_seconds > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "decay half-life must be > 0");
  }
  CooccurrenceModel m;
  m.config_ = config;
  m.item_ids_ = catalog.Ids();
  for (uint32_t c = 0; c < m.item_ids_.size(); ++c) {
    m.column_.emplace(m.item_ids_[c], c);
  }
  const size_t n = m.item_ids_.size();

  // Per-row accumulators keyed by column keep the result order-independent.
  std::vector<std::map<uint32_t, uint32_t>> counts(n);
  std::vector<uint32_t> engaged;
  for (const InteractionLog& log : logs) {
    engaged.clear();
    for (const RatingEvent& e : log.events) {
      m.reference_time_ = std::max(m.reference_time_, e.timestamp);
      if (!m.IsEngaged(e)) continue;
      auto it = m.column_.find(e.item_id);
      if (it == m.column_.end()) continue;
      engaged.push_back(it->second);
    }
    std::sort(engaged.begin(), engaged.end());
    engaged.erase(std::unique(engaged.begin(), engaged.end()), engaged.end());
    for (uint32_t a : engaged) {
      for (uint32_t b : engaged) ++counts[a][b];
    }
  }

  m.cooccur_.assign(n, {});
  m.similarity_.assign(n, {});
  std::vector<double> diag(n, 0.0);
  for (size_t a = 0; a < n; ++a) {
    auto it = counts[a].find(static_cast<uint32_t>(a));
    if (it != counts[a].end()) diag[a] = it->second;
  }
  for (size_t a = 0; a < n; ++a) {
    for (const auto& [b, c] : counts[a]) {
      const double cij = c;
      m.cooccur_[a].emplace_back(b, cij);
      double s = 0.0;
      switch (config.similarity) {
        case SimilarityKind::kJaccard: {
          const double denom = diag[a] + diag[b] - cij;
          s = denom > 0 ? cij / denom : 0.0;
          break;
        }
        case SimilarityKind::kLift: {
          const double denom = diag[a] * diag[b];
          s = denom > 0 ? cij / denom : 0.0;
          break;
        }
        case SimilarityKind::kCount:
          s = cij;
          break;
      }
      m.similarity_[a].emplace_back(b, s);
      ++m.nnz_;
    }
  }
  return m;
}

uint32_t CooccurrenceModel::Column(ItemId id) const {
  auto it = column_.find(id);
  if (it == column_.end()) {
    throw Error(ErrorCode::kNotFound, "unknown item " + std::to_string(id));
  }
  return it->second;
}

double CooccurrenceModel::Lookup(const Row& row, uint32_t col) {
  auto it = std::lower_bound(
      row.begin(), row.end(), col,
      [](const std::pair<uint32_t, double>& e, uint32_t c) { return e.first < c; });
  return (it != row.end() && it->first == col) ? it->second : 0.0;
}

double CooccurrenceModel::Cooccurrence(ItemId a, ItemId b) const {
  return Lookup(cooccur_[Column(a)], Column(b));
}

double CooccurrenceModel::Similarity(ItemId a, ItemId b) const {
  return Lookup(similarity_[Column(a)], Column(b));
}

std::string CooccurrenceModel::Serialize() const {
  BinaryWriter w(kMagic, kVersion);
  w.F64(config_.decay_half_life_seconds);
  w.F64(config_.affinity_threshold);
  w.U32(static_cast<uint32_t>(config_.similarity));
  w.I64(reference_time_);
  w.U64(item_ids_.size());
  for (ItemId id : item_ids_) w.I64(id);
  for (const auto* rows : {&cooccur_, &similarity_}) {
    for (const Row& row : *rows) {
      w.U64(row.size());
      for (const auto& [c, v] : row) {
        w.U32(c);
        w.F64(v);
      }
    }
  }
  return w.bytes();
}

CooccurrenceModel CooccurrenceModel::Deserialize(std::string bytes) {
  BinaryReader r(std::move(bytes), kMagic, kVersion);
  CooccurrenceModel m;
  m.config_.decay_half_life_seconds = r.F64();
  m.config_.affinity_threshold = r.F64();
  const uint32_t kind = r.U32();
  if (kind > 2) throw Error(ErrorCode::kParse, "bad similarity kind");
  m.config_.similarity = static_cast<SimilarityKind>(kind);
  m.reference_time_ = r.I64();
  const uint64_t n = r.U64();
  m.item_ids_.resize(n);
  for (uint64_t i = 0; i < n; ++i) {
    m.item_ids_[i] = r.I64();
    m.column_.emplace(m.item_ids_[i], static_cast<uint32_t>(i));
  }
  for (auto* rows : {&m.cooccur_, &m.similarity_}) {
    rows->assign(n, {});
    for (Row& row : *rows) {
      const uint64_t len = r.U64();
      for (uint64_t k = 0; k < len; ++k) {
        const uint32_t c = r.U32();
        if (c >= n) throw Error(ErrorCode::kParse, "column out of range");
        row.emplace_back(c, r.F64());
      }
    }
  }
  for (const Row& row : m.similarity_) m.nnz_ += row.size();
  if (!r.AtEnd()) throw Error(ErrorCode::kParse, "trailing bytes in model");
  return m;
}

void CooccurrenceModel::Save(const std::string& path) const {
  WriteFile(path, Serialize());
}

CooccurrenceModel CooccurrenceModel::Load(const std::string& path) {
  return Deserialize(ReadFile(path));
}

ScoreMap Affinity(const InteractionLog& log, const CooccurrenceModel& model,
                  int64_t now) {
  ScoreMap out;
  const double half_life = model.config().decay_half_life_seconds;
  for (const RatingEvent& e : log.events) {
    if (!model.IsEngaged(e)) continue;
    if (now < e.timestamp) {
      throw Error(ErrorCode::kInvalidArgument,
                  "scoring time " + std::to_string(now) +
                      " precedes event at " + std::to_string(e.timestamp));
    }
    const double age = static_cast<double>(now - e.timestamp);
    out[e.item_id] += e.rating * std::exp2(-age / half_life);
  }
  return out;
}

BaseScores ScoreBase(const InteractionLog& log, const CooccurrenceModel& model,
                     std::span<const ItemId> candidates,
                     const ScoreOptions& options) {
  std::vector<uint32_t> cols;
  cols.reserve(candidates.size());
  for (ItemId id : candidates) cols.push_back(model.Column(id));

  const int64_t now =
      options.now.value_or(std::max(model.reference_time(), log.LatestTimestamp()));
  const ScoreMap affinity = Affinity(log, model, now);

  std::vector<double> acc(model.num_items(), 0.0);
  for (const auto& [item, a] : affinity) {
    auto it = std::lower_bound(model.item_ids().begin(), model.item_ids().end(), item);
    if (it == model.item_ids().end() || *it != item) continue;
    const auto col = static_cast<uint32_t>(it - model.item_ids().begin());
    for (const auto& [other, s] : model.SimilarityRow(col)) acc[other] += a * s;
  }

  BaseScores out;
  out.user_id = log.user_id;
  for (size_t k = 0; k < candidates.size(); ++k) {
    double score = acc[cols[k]];
    if (options.mask_engaged && affinity.count(candidates[k])) {
      score = -std::numeric_limits<double>::infinity();
    }
    out.scores[candidates[k]] = score;
  }
  return out;
}

std::vector<ItemId> EngagedItems(const InteractionLog& log,
                                 const CooccurrenceModel& model) {
  std::vector<ItemId> out;
  for (const RatingEvent& e : log.events) {
    if (model.IsEngaged(e)) out.push_back(e.item_id);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace steerrec
