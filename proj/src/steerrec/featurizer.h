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

// Frozen text featurizers feeding the two towers.
//
// kHashedText is a signed feature-hashed bag of stemmed words, with words in
// a negated scope marked ("never horror" -> "not_horror"), L2-normalized. kExternal asks an OpenAI-compatible /v1/embeddings
// endpoint. Both are deterministic for a fixed configuration, and the
// fingerprint identifies that configuration in every trained artifact.

#ifndef STEERREC_FEATURIZER_H_
#define STEERREC_FEATURIZER_H_

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "steerrec/catalog.h"

namespace steerrec {

struct FeaturizerConfig {
  enum class Mode { kHashedText, kExternal };

  Mode mode = Mode::kHashedText;
  int dim = 256;

  // kExternal only.
  std::string base_url;
  std::string path = "/v1/embeddings";
  std::string model;
  std::string api_key;
};

class Featurizer {
 public:
  virtual ~Featurizer() = default;

  // Throws kConfig for an unusable configuration.
  static std::unique_ptr<Featurizer> Create(const FeaturizerConfig& config);

  virtual int dim() const = 0;
  virtual std::string fingerprint() const = 0;
  // Unit-norm (or zero) vector of length dim(). External providers throw
  // Error(kTransient) on transport failure.
  virtual Eigen::VectorXd EncodeText(std::string_view text) const = 0;
};

// Text an item is encoded from: title without its "(YYYY)" suffix, summary,
// genres and decade.
std::string ItemText(const Item& item);

// Token stream used by the hashed featurizer; exposed for tests.
std::vector<std::string> HashedFeatureTokens(std::string_view text);

// Featurizer output for every catalog item, rows in canonical catalog order.
// Doubles as the item embedding source for feed similarity.
class ItemFeatures {
 public:
  ItemFeatures() = default;
  // Counts one item encoding per catalog item.
  static ItemFeatures Build(const Catalog& catalog, const Featurizer& featurizer);

  const std::string& fingerprint() const { return fingerprint_; }
  int dim() const { return static_cast<int>(rows_.cols()); }
  size_t size() const { return ids_.size(); }
  const std::vector<ItemId>& ids() const { return ids_; }
  const Eigen::MatrixXd& matrix() const { return rows_; }

  // Throws kNotFound.
  Eigen::VectorXd Row(ItemId id) const;
  size_t IndexOf(ItemId id) const;

 private:
  std::string fingerprint_;
  std::vector<ItemId> ids_;
  Eigen::MatrixXd rows_;
};

}  // namespace steerrec

#endif  // STEERREC_FEATURIZER_H_
