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

#include "steerrec/value_model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "json.hpp"
#include "steerrec/binary_io.h"
#include "steerrec/error.h"
#include "steerrec/instrumentation.h"
#include "steerrec/rng.h"
#include "steerrec/text.h"

namespace steerrec {

namespace {

constexpr char kParamsMagic[] = "SRTOWERS";
constexpr uint32_t kParamsVersion = 1;
constexpr char kIndexMagic[] = "SRINDEX";
constexpr uint32_t kIndexVersion = 1;

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void WriteMatrix(BinaryWriter& w, const Eigen::MatrixXd& m) {
  w.U64(static_cast<uint64_t>(m.rows()));
  w.U64(static_cast<uint64_t>(m.cols()));
  w.F64s(m.data(), static_cast<size_t>(m.size()));
}

Eigen::MatrixXd ReadMatrix(BinaryReader& r) {
  const uint64_t rows = r.U64();
  const uint64_t cols = r.U64();
  if (rows > (1u << 24) || cols > (1u << 24)) {
    throw Error(ErrorCode::kParse, "implausible matrix shape in artifact");
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  r.F64s(m.data(), static_cast<size_t>(m.size()));
  return m;
}

void WriteTower(BinaryWriter& w, const Tower& t) {
  WriteMatrix(w, t.w1);
  WriteMatrix(w, t.b1);
  WriteMatrix(w, t.w2);
  WriteMatrix(w, t.b2);
}

Tower ReadTower(BinaryReader& r) {
  Tower t;
  t.w1 = ReadMatrix(r);
  t.b1 = ReadMatrix(r);
  t.w2 = ReadMatrix(r);
  t.b2 = ReadMatrix(r);
  if (t.b1.size() != t.w1.rows() || t.w2.cols() != t.w1.rows() ||
      t.b2.size() != t.w2.rows()) {
    throw Error(ErrorCode::kParse, "inconsistent tower shapes in artifact");
  }
  return t;
}

Tower InitTower(Rng& rng, int in, int hidden, int out) {
  auto xavier = [&rng](int rows, int cols) {
    const double a = std::sqrt(6.0 / (rows + cols));
    Eigen::MatrixXd m(rows, cols);
    // Column-major fill keeps the draw order tied to the storage order.
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.Uniform(-a, a);
    return m;
  };
  Tower t;
  t.w1 = xavier(hidden, in);
  t.b1 = Eigen::VectorXd::Zero(hidden);
  t.w2 = xavier(out, hidden);
  t.b2 = Eigen::VectorXd::Zero(out);
  return t;
}

// Forward pass over a batch whose columns are examples.
struct TowerActivations {
  Eigen::MatrixXd hidden;  // tanh outputs
  Eigen::MatrixXd out;
};

TowerActivations ForwardBatch(const Tower& t, const Eigen::MatrixXd& x) {
  TowerActivations a;
  a.hidden = ((t.w1 * x).colwise() + t.b1).array().tanh().matrix();
  a.out = (t.w2 * a.hidden).colwise() + t.b2;
  return a;
}

void BackwardBatch(const Tower& t, const Eigen::MatrixXd& x, const TowerActivations& a,
                   const Eigen::MatrixXd& d_out, Tower* grad) {
  grad->w2 = d_out * a.hidden.transpose();
  grad->b2 = d_out.rowwise().sum();
  const Eigen::MatrixXd d_pre =
      ((t.w2.transpose() * d_out).array() * (1.0 - a.hidden.array().square())).matrix();
  grad->w1 = d_pre * x.transpose();
  grad->b1 = d_pre.rowwise().sum();
}

struct SplitData {
  Eigen::MatrixXd request_inputs;
  Eigen::MatrixXd item_inputs;
  Eigen::VectorXd targets;
  size_t size() const { return static_cast<size_t>(targets.size()); }
};

double Mse(const TowerParams& params, const SplitData& data) {
  if (data.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  return LossAndGradient(params, data.request_inputs, data.item_inputs, data.targets,
                         nullptr);
}

}  // namespace

Eigen::VectorXd Tower::Forward(const Eigen::VectorXd& x) const {
  if (x.size() != w1.cols()) {
    throw Error(ErrorCode::kInvalidArgument,
                "tower input width " + std::to_string(x.size()) + ", expected " +
                    std::to_string(w1.cols()));
  }
  Eigen::VectorXd h = w1 * x + b1;
  h = h.array().tanh().matrix();
  return w2 * h + b2;
}

size_t TowerParams::size() const {
  auto tower = [](const Tower& t) {
    return static_cast<size_t>(t.w1.size() + t.b1.size() + t.w2.size() + t.b2.size());
  };
  return tower(request) + tower(item) + 1;
}

bool TowerParams::AllFinite() const {
  auto tower = [](const Tower& t) {
    return t.w1.allFinite() && t.b1.allFinite() && t.w2.allFinite() && t.b2.allFinite();
  };
  return tower(request) && tower(item) && std::isfinite(temperature);
}

std::vector<Eigen::Map<Eigen::VectorXd>> TowerParams::Blocks() {
  std::vector<Eigen::Map<Eigen::VectorXd>> blocks;
  for (Tower* t : {&request, &item}) {
    blocks.emplace_back(t->w1.data(), t->w1.size());
    blocks.emplace_back(t->b1.data(), t->b1.size());
    blocks.emplace_back(t->w2.data(), t->w2.size());
    blocks.emplace_back(t->b2.data(), t->b2.size());
  }
  blocks.emplace_back(&temperature, 1);
  return blocks;
}

std::vector<std::string> TowerParams::BlockNames() {
  return {"request.w1", "request.b1", "request.w2", "request.b2", "item.w1",
          "item.b1",    "item.w2",    "item.b2",    "temperature"};
}

std::string TowerParams::Serialize() const {
  BinaryWriter w(kParamsMagic, kParamsVersion);
  w.Str(fingerprint);
  w.U32(static_cast<uint32_t>(text_dim));
  w.U32(user_features ? 1 : 0);
  w.F64(temperature);
  WriteTower(w, request);
  WriteTower(w, item);
  return w.bytes();
}

TowerParams TowerParams::Deserialize(std::string bytes) {
  BinaryReader r(std::move(bytes), kParamsMagic, kParamsVersion);
  TowerParams p;
  p.fingerprint = r.Str();
  p.text_dim = static_cast<int>(r.U32());
  p.user_features = r.U32() != 0;
  p.temperature = r.F64();
  p.request = ReadTower(r);
  p.item = ReadTower(r);
  if (!r.AtEnd()) throw Error(ErrorCode::kParse, "trailing bytes in tower artifact");
  const int want_in = p.user_features ? 2 * p.text_dim : p.text_dim;
  if (p.request.input_dim() != want_in || p.item.input_dim() != p.text_dim ||
      p.request.output_dim() != p.item.output_dim()) {
    throw Error(ErrorCode::kParse, "tower widths disagree with the header");
  }
  if (!p.AllFinite()) throw Error(ErrorCode::kParse, "non-finite tower parameters");
  return p;
}

void TowerParams::Save(const std::string& path) const { WriteFile(path, Serialize()); }

TowerParams TowerParams::Load(const std::string& path) {
  return Deserialize(ReadFile(path));
}

uint64_t TowerParams::Digest() const { return Fnv1a64(Serialize()); }

TowerParams InitParams(int text_dim, bool user_features, int hidden, int output,
                       uint64_t seed, const std::string& fingerprint) {
  if (text_dim < 1 || hidden < 1 || output < 1) {
    throw Error(ErrorCode::kConfig, "tower widths must be positive");
  }
  Rng rng(seed);
  TowerParams p;
  p.fingerprint = fingerprint;
  p.text_dim = text_dim;
  p.user_features = user_features;
  p.item = InitTower(rng, text_dim, hidden, output);
  // The request tower starts as a copy of the item tower on the text block,
  // so f . g begins as a similarity between request and item text.
  p.request = p.item;
  if (user_features) {
    p.request.w1.conservativeResize(Eigen::NoChange, 2 * text_dim);
    p.request.w1.rightCols(text_dim).setZero();
  }
  p.temperature = 1.0;
  return p;
}

double ScorePair(const TowerParams& params, const Eigen::VectorXd& request_input,
                 const Eigen::VectorXd& item_input) {
  return Sigmoid(params.temperature *
                 params.request.Forward(request_input).dot(params.item.Forward(item_input)));
}

double LossAndGradient(const TowerParams& params, const Eigen::MatrixXd& request_inputs,
                       const Eigen::MatrixXd& item_inputs, const Eigen::VectorXd& targets,
                       TowerParams* grad) {
  const Eigen::Index n = targets.size();
  if (n == 0 || request_inputs.cols() != n || item_inputs.cols() != n) {
    throw Error(ErrorCode::kInvalidArgument, "batch shapes disagree");
  }
  const TowerActivations fr = ForwardBatch(params.request, request_inputs);
  const TowerActivations fi = ForwardBatch(params.item, item_inputs);
  const Eigen::VectorXd dots =
      (fr.out.array() * fi.out.array()).colwise().sum().matrix().transpose();
  Eigen::VectorXd pred(n);
  for (Eigen::Index b = 0; b < n; ++b) pred[b] = Sigmoid(params.temperature * dots[b]);
  const Eigen::VectorXd err = pred - targets;
  const double loss = err.squaredNorm() / static_cast<double>(n);
  if (grad == nullptr) return loss;

  // d loss / d (t * dot), per example.
  const Eigen::VectorXd d_logit =
      (2.0 / static_cast<double>(n)) *
      (err.array() * pred.array() * (1.0 - pred.array())).matrix();
  grad->temperature = d_logit.dot(dots);
  const Eigen::RowVectorXd scale = params.temperature * d_logit.transpose();
  const Eigen::MatrixXd d_fr = fi.out.array().rowwise() * scale.array();
  const Eigen::MatrixXd d_fi = fr.out.array().rowwise() * scale.array();
  BackwardBatch(params.request, request_inputs, fr, d_fr, &grad->request);
  BackwardBatch(params.item, item_inputs, fi, d_fi, &grad->item);
  grad->fingerprint = params.fingerprint;
  grad->text_dim = params.text_dim;
  grad->user_features = params.user_features;
  return loss;
}

UserProfiles UserProfiles::Build(const std::vector<InteractionLog>& logs,
                                 const ItemFeatures& items, double engaged_threshold) {
  UserProfiles p(items.dim());
  for (const InteractionLog& log : logs) {
    p.means_[log.user_id] = UserBlock(&log, items, engaged_threshold);
  }
  return p;
}

Eigen::VectorXd UserProfiles::Block(UserId user) const {
  auto it = means_.find(user);
  if (it == means_.end()) return Eigen::VectorXd::Zero(dim_);
  return it->second;
}

Eigen::VectorXd UserBlock(const InteractionLog* log, const ItemFeatures& items,
                          double engaged_threshold) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(items.dim());
  if (log == nullptr) return sum;
  size_t n = 0;
  for (const RatingEvent& e : log->events) {
    if (e.rating < engaged_threshold) continue;
    sum += items.Row(e.item_id);
    ++n;
  }
  if (n > 0) sum /= static_cast<double>(n);
  return sum;
}

Eigen::VectorXd FeaturizeRequest(const Eigen::VectorXd& user_block, std::string_view text,
                                 const Featurizer& featurizer, bool user_features) {
  if (Trim(text).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "request text is empty");
  }
  const Eigen::VectorXd text_block = featurizer.EncodeText(text);
  Instrumentation::Get().CountRequestEncoding();
  if (!user_features) return text_block;
  if (user_block.size() != text_block.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "user block width " + std::to_string(user_block.size()) +
                    " differs from featurizer width " + std::to_string(text_block.size()));
  }
  Eigen::VectorXd out(text_block.size() * 2);
  out << text_block, user_block;
  return out;
}

std::string TrainReport::ToJson() const {
  nlohmann::ordered_json j;
  j["train_tuples"] = train_tuples;
  j["validation_tuples"] = validation_tuples;
  j["test_tuples"] = test_tuples;
  j["best_epoch"] = best_epoch;
  j["best_validation_mse"] = best_validation_mse;
  j["test_mse"] = std::isfinite(test_mse) ? nlohmann::ordered_json(test_mse) : nullptr;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const EpochStats& e : epochs) {
    rows.push_back({{"epoch", e.epoch},
                    {"train_mse", e.train_mse},
                    {"validation_mse", std::isfinite(e.validation_mse)
                                           ? nlohmann::ordered_json(e.validation_mse)
                                           : nullptr}});
  }
  j["epochs"] = rows;
  return j.dump(2) + "\n";
}

TrainResult Train(const std::vector<TrainingTuple>& corpus, const Featurizer& featurizer,
                  const ItemFeatures& items, const UserProfiles& users,
                  const TrainConfig& config) {
  if (config.batch_size == 0 || config.max_epochs < 1 || config.patience < 1) {
    throw Error(ErrorCode::kConfig, "batch size, epochs and patience must be positive");
  }
  if (items.fingerprint() != featurizer.fingerprint()) {
    throw Error(ErrorCode::kFingerprintMismatch,
                "item features come from '" + items.fingerprint() +
                    "', featurizer is '" + featurizer.fingerprint() + "'");
  }
  const int dim = featurizer.dim();
  const int request_dim = config.user_features ? 2 * dim : dim;

  // One text encoding per distinct request text.
  std::unordered_map<std::string, Eigen::VectorXd> text_cache;
  auto request_input = [&](const TrainingTuple& t) {
    auto it = text_cache.find(t.request.text);
    if (it == text_cache.end()) {
      Eigen::VectorXd v = FeaturizeRequest(Eigen::VectorXd(), t.request.text, featurizer,
                                           /*user_features=*/false);
      it = text_cache.emplace(t.request.text, std::move(v)).first;
    }
    if (!config.user_features) return it->second;
    Eigen::VectorXd out(request_dim);
    out << it->second, users.Block(t.user_id);
    return out;
  };

  SplitData data[3];
  std::vector<const TrainingTuple*> by_split[3];
  for (const TrainingTuple& t : corpus) by_split[static_cast<int>(t.split)].push_back(&t);
  for (int s = 0; s < 3; ++s) {
    const Eigen::Index n = static_cast<Eigen::Index>(by_split[s].size());
    data[s].request_inputs.resize(request_dim, n);
    data[s].item_inputs.resize(dim, n);
    data[s].targets.resize(n);
    for (Eigen::Index c = 0; c < n; ++c) {
      const TrainingTuple& t = *by_split[s][static_cast<size_t>(c)];
      data[s].request_inputs.col(c) = request_input(t);
      data[s].item_inputs.col(c) = items.Row(t.item_id);
      data[s].targets[c] = t.target;
    }
  }
  const SplitData& train = data[static_cast<int>(Split::kTrain)];
  const SplitData& validation = data[static_cast<int>(Split::kValidation)];
  const SplitData& test = data[static_cast<int>(Split::kTest)];
  if (train.size() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "corpus has no train tuples");
  }

  TrainResult result;
  TowerParams params = InitParams(dim, config.user_features, config.hidden, config.output,
                                  config.seed, featurizer.fingerprint());
  TowerParams velocity = params;
  for (auto& b : velocity.Blocks()) b.setZero();
  TowerParams grad = params;

  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Eigen::Index> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);

  TowerParams best = params;
  double best_score = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.Shuffle(order);
    size_t batch_no = 0;
    for (size_t start = 0; start < order.size(); start += config.batch_size, ++batch_no) {
      const size_t end = std::min(order.size(), start + config.batch_size);
      const std::vector<Eigen::Index> cols(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(end));
      const double loss = LossAndGradient(
          params, train.request_inputs(Eigen::all, cols), train.item_inputs(Eigen::all, cols),
          train.targets(cols), &grad);
      if (!std::isfinite(loss)) {
        throw Error(ErrorCode::kNumerical, "non-finite loss at epoch " +
                                               std::to_string(epoch) + " batch " +
                                               std::to_string(batch_no));
      }
      auto p = params.Blocks();
      auto v = velocity.Blocks();
      auto g = grad.Blocks();
      for (size_t k = 0; k < p.size(); ++k) {
        if (config.weight_decay > 0 && k + 1 < p.size()) g[k] += config.weight_decay * p[k];
        v[k] = config.momentum * v[k] - config.learning_rate * g[k];
        p[k] += v[k];
      }
    }
    if (!params.AllFinite()) {
      throw Error(ErrorCode::kNumerical,
                  "non-finite parameters after epoch " + std::to_string(epoch));
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_mse = Mse(params, train);
    stats.validation_mse = Mse(params, validation);
    if (!std::isfinite(stats.train_mse)) {
      throw Error(ErrorCode::kNumerical,
                  "non-finite train loss after epoch " + std::to_string(epoch));
    }
    result.report.epochs.push_back(stats);
    const double score = validation.size() > 0 ? stats.validation_mse : stats.train_mse;
    if (score < best_score) {
      best_score = score;
      best = params;
      result.report.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  result.report.best_validation_mse = best_score;
  result.report.test_mse = Mse(best, test);
  result.report.train_tuples = train.size();
  result.report.validation_tuples = validation.size();
  result.report.test_tuples = test.size();
  result.params = std::move(best);
  return result;
}

size_t ItemIndex::IndexOf(ItemId id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) {
    throw Error(ErrorCode::kNotFound, "item " + std::to_string(id) + " is not in the index");
  }
  return static_cast<size_t>(it - ids_.begin());
}

std::string ItemIndex::Serialize() const {
  BinaryWriter w(kIndexMagic, kIndexVersion);
  w.Str(fingerprint_);
  w.U64(params_digest_);
  w.I64(built_at_);
  w.U64(ids_.size());
  for (ItemId id : ids_) w.I64(id);
  WriteMatrix(w, rows_);
  return w.bytes();
}

ItemIndex ItemIndex::Deserialize(std::string bytes) {
  BinaryReader r(std::move(bytes), kIndexMagic, kIndexVersion);
  ItemIndex idx;
  idx.fingerprint_ = r.Str();
  idx.params_digest_ = r.U64();
  idx.built_at_ = r.I64();
  const uint64_t n = r.U64();
  if (n > (1u << 26)) throw Error(ErrorCode::kParse, "implausible index size");
  idx.ids_.resize(n);
  for (ItemId& id : idx.ids_) id = r.I64();
  idx.rows_ = ReadMatrix(r);
  if (!r.AtEnd() || static_cast<uint64_t>(idx.rows_.rows()) != n ||
      !std::is_sorted(idx.ids_.begin(), idx.ids_.end())) {
    throw Error(ErrorCode::kParse, "malformed index artifact");
  }
  return idx;
}

void ItemIndex::Save(const std::string& path) const { WriteFile(path, Serialize()); }

ItemIndex ItemIndex::Load(const std::string& path) { return Deserialize(ReadFile(path)); }

ItemIndex BuildIndex(const ItemFeatures& items, const TowerParams& params,
                     int64_t built_at) {
  if (items.fingerprint() != params.fingerprint) {
    throw Error(ErrorCode::kFingerprintMismatch,
                "parameters were trained over '" + params.fingerprint +
                    "', item features come from '" + items.fingerprint() + "'");
  }
  ItemIndex idx;
  idx.fingerprint_ = params.fingerprint;
  idx.params_digest_ = params.Digest();
  idx.built_at_ = built_at;
  idx.ids_ = items.ids();
  idx.rows_.resize(static_cast<Eigen::Index>(items.size()), params.item.output_dim());
  for (size_t i = 0; i < items.size(); ++i) {
    const Eigen::Index r = static_cast<Eigen::Index>(i);
    idx.rows_.row(r) = params.item.Forward(items.matrix().row(r).transpose()).transpose();
  }
  return idx;
}

ValueScores PredictEncoded(const Eigen::VectorXd& request_input, const TowerParams& params,
                           const ItemIndex& index, std::span<const ItemId> candidates) {
  if (index.fingerprint() != params.fingerprint ||
      index.rows().cols() != params.request.output_dim()) {
    throw Error(ErrorCode::kFingerprintMismatch,
                "index was not built for these parameters and featurizer");
  }
  const Eigen::VectorXd f = params.request.Forward(request_input);
  ValueScores out;
  for (ItemId id : candidates) {
    const Eigen::Index r = static_cast<Eigen::Index>(index.IndexOf(id));
    const double s = Sigmoid(params.temperature * index.rows().row(r).dot(f));
    out[id] = std::clamp(s, 0.0, 1.0);
  }
  return out;
}

ValueScores Predict(const Eigen::VectorXd& user_block, const Request& request,
                    const TowerParams& params, const Featurizer& featurizer,
                    const ItemIndex& index, std::span<const ItemId> candidates) {
  if (candidates.empty()) return {};
  if (featurizer.fingerprint() != params.fingerprint) {
    throw Error(ErrorCode::kFingerprintMismatch,
                "serving featurizer '" + featurizer.fingerprint() +
                    "' differs from training featurizer '" + params.fingerprint + "'");
  }
  return PredictEncoded(
      FeaturizeRequest(user_block, request.text, featurizer, params.user_features), params,
      index, candidates);
}

}  // namespace steerrec
