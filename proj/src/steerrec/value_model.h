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

// Two-tower value model distilled from judge scores.
//
//   v(u, i, r) = sigmoid(t * f(u, r) . g(i))
//
// f and g are affine -> tanh -> affine towers over frozen featurizer
// vectors. f sees the request text block followed by a user block (mean
// feature vector of the user's engaged items). Item rows g(i) are computed
// offline into an ItemIndex, so serving a request costs one text encoding
// and one matrix-vector product.

#ifndef STEERREC_VALUE_MODEL_H_
#define STEERREC_VALUE_MODEL_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "steerrec/catalog.h"
#include "steerrec/engagement.h"
#include "steerrec/featurizer.h"
#include "steerrec/simgen.h"

namespace steerrec {

using ValueScores = ScoreMap;

struct Tower {
  Eigen::MatrixXd w1;  // hidden x input
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // output x hidden
  Eigen::VectorXd b2;

  int input_dim() const { return static_cast<int>(w1.cols()); }
  int output_dim() const { return static_cast<int>(w2.rows()); }
  Eigen::VectorXd Forward(const Eigen::VectorXd& x) const;
};

struct TowerParams {
  Tower request;
  Tower item;
  double temperature = 1.0;
  // Featurizer the towers were trained over.
  std::string fingerprint;
  // Width of the text block; the request input is twice this when
  // user_features is set.
  int text_dim = 0;
  bool user_features = true;

  // Number of scalar parameters.
  size_t size() const;
  bool AllFinite() const;
  // Every parameter block, in a fixed order, as flat views. The last block
  // is the temperature.
  std::vector<Eigen::Map<Eigen::VectorXd>> Blocks();
  static std::vector<std::string> BlockNames();

  std::string Serialize() const;
  static TowerParams Deserialize(std::string bytes);
  void Save(const std::string& path) const;
  static TowerParams Load(const std::string& path);
  // Stable digest of the serialized parameters.
  uint64_t Digest() const;
};

// Fresh parameters: Xavier-uniform item tower with zero biases, and a
// request tower that copies it on the text block and is zero on the user
// block.
TowerParams InitParams(int text_dim, bool user_features, int hidden, int output,
                       uint64_t seed, const std::string& fingerprint);

// Score of one (request input, item input) pair.
double ScorePair(const TowerParams& params, const Eigen::VectorXd& request_input,
                 const Eigen::VectorXd& item_input);

// Mean squared error of sigmoid(t * f . g) against targets over a batch whose
// columns are examples. Fills `grad` (same shapes as `params`) when non-null.
double LossAndGradient(const TowerParams& params, const Eigen::MatrixXd& request_inputs,
                       const Eigen::MatrixXd& item_inputs, const Eigen::VectorXd& targets,
                       TowerParams* grad);

// Mean engaged-item feature vector per user.
class UserProfiles {
 public:
  UserProfiles() = default;
  explicit UserProfiles(int dim) : dim_(dim) {}
  static UserProfiles Build(const std::vector<InteractionLog>& logs,
                            const ItemFeatures& items,
                            double engaged_threshold = SarConfig{}.affinity_threshold);

  int dim() const { return dim_; }
  // Zeros for users without engaged history.
  Eigen::VectorXd Block(UserId user) const;

 private:
  int dim_ = 0;
  std::map<UserId, Eigen::VectorXd> means_;
};

// Mean feature vector of the log's engaged items, zeros for an empty or
// absent log.
Eigen::VectorXd UserBlock(const InteractionLog* log, const ItemFeatures& items,
                          double engaged_threshold = SarConfig{}.affinity_threshold);

// [text block ; user block]. Counts one request encoding. Throws
// kInvalidArgument for empty text.
Eigen::VectorXd FeaturizeRequest(const Eigen::VectorXd& user_block, std::string_view text,
                                 const Featurizer& featurizer, bool user_features = true);

struct TrainConfig {
  uint64_t seed = 0;
  int hidden = 128;
  int output = 64;
  size_t batch_size = 32;
  double learning_rate = 0.05;
  double momentum = 0.9;
  // L2 penalty on weights and biases (not the temperature).
  double weight_decay = 0.0;
  int max_epochs = 60;
  // Epochs without validation improvement before stopping.
  int patience = 5;
  bool user_features = true;
};

struct EpochStats {
  int epoch = 0;
  double train_mse = 0.0;
  double validation_mse = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  int best_epoch = 0;
  double best_validation_mse = 0.0;
  // At the returned parameters; NaN when the split is empty.
  double test_mse = 0.0;
  size_t train_tuples = 0;
  size_t validation_tuples = 0;
  size_t test_tuples = 0;

  std::string ToJson() const;
};

struct TrainResult {
  TowerParams params;
  TrainReport report;
};

// Minimizes MSE over the train split and returns the parameters of the epoch
// with the lowest validation MSE (train MSE when there is no validation
// split). Throws kInvalidArgument without train tuples, kNotFound for tuples
// naming unknown items and kNumerical on a non-finite loss.
TrainResult Train(const std::vector<TrainingTuple>& corpus, const Featurizer& featurizer,
                  const ItemFeatures& items, const UserProfiles& users,
                  const TrainConfig& config);

// Item tower outputs for every catalog item, rows in canonical order.
class ItemIndex {
 public:
  ItemIndex() = default;

  const std::vector<ItemId>& ids() const { return ids_; }
  const Eigen::MatrixXd& rows() const { return rows_; }
  const std::string& fingerprint() const { return fingerprint_; }
  uint64_t params_digest() const { return params_digest_; }
  int64_t built_at() const { return built_at_; }
  size_t size() const { return ids_.size(); }
  // Throws kNotFound naming the id.
  size_t IndexOf(ItemId id) const;

  std::string Serialize() const;
  static ItemIndex Deserialize(std::string bytes);
  void Save(const std::string& path) const;
  static ItemIndex Load(const std::string& path);

 private:
  friend ItemIndex BuildIndex(const ItemFeatures&, const TowerParams&, int64_t);
  std::vector<ItemId> ids_;
  Eigen::MatrixXd rows_;
  std::string fingerprint_;
  uint64_t params_digest_ = 0;
  int64_t built_at_ = 0;
};

// Applies the item tower to each item separately, so a row depends only on
// that item's features. Throws kFingerprintMismatch when the features were
// produced by a different featurizer than the parameters were trained on.
ItemIndex BuildIndex(const ItemFeatures& items, const TowerParams& params,
                     int64_t built_at);

// Scores the candidates against an encoded request input. Throws
// kFingerprintMismatch for an index over another featurizer or width and
// kNotFound for an unknown candidate. The parameter digest is checked once,
// when models are loaded.
ValueScores PredictEncoded(const Eigen::VectorXd& request_input, const TowerParams& params,
                           const ItemIndex& index, std::span<const ItemId> candidates);

// Encodes the request once and scores the candidates. Returns an empty map
// without encoding when there are no candidates.
ValueScores Predict(const Eigen::VectorXd& user_block, const Request& request,
                    const TowerParams& params, const Featurizer& featurizer,
                    const ItemIndex& index, std::span<const ItemId> candidates);

}  // namespace steerrec

#endif  // STEERREC_VALUE_MODEL_H_
