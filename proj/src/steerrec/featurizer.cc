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

#include "steerrec/featurizer.h"

#include <algorithm>
#include <set>

#include "httplib.h"
#include "json.hpp"
#include "steerrec/error.h"
#include "steerrec/instrumentation.h"
#include "steerrec/text.h"

namespace steerrec {

namespace {

bool IsNegationCue(std::string_view t) {
  static const std::set<std::string_view> kCues = {
      "not", "no", "never", "without", "avoid", "except", "less", "dont",
      "nothing", "none", "skip", "hate", "away", "instead", "neither", "nor",
      "tired", "excluding", "exclude", "fewer",
      // "used to like X" states a past preference.
      "used"};
  return kCues.count(t) > 0;
}

bool EndsScope(std::string_view t) {
  return t == "and" || t == "but" || t == "or" || t == "now" || t == "yet" ||
         t == "then" || t == "while" || t == "though" || t == "although";
}

class HashedTextFeaturizer : public Featurizer {
 public:
  explicit HashedTextFeaturizer(int dim) : dim_(dim) {}

  int dim() const override { return dim_; }
  std::string fingerprint() const override {
    return "hashed-text:v1:dim=" + std::to_string(dim_);
  }

  Eigen::VectorXd EncodeText(std::string_view text) const override {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_);
    for (const std::string& tok : HashedFeatureTokens(text)) {
      const uint64_t h = Fnv1a64(tok);
      const double sign = (h >> 63) ? -1.0 : 1.0;
      v[static_cast<Eigen::Index>(h % static_cast<uint64_t>(dim_))] += sign;
    }
    const double norm = v.norm();
    if (norm > 0) v /= norm;
    return v;
  }

 private:
  int dim_;
};

class ExternalFeaturizer : public Featurizer {
 public:
  explicit ExternalFeaturizer(FeaturizerConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty() || config_.model.empty()) {
      throw Error(ErrorCode::kConfig,
                  "external featurizer needs a base URL and a model");
    }
  }

  int dim() const override { return config_.dim; }
  std::string fingerprint() const override {
    return "external:" + config_.model + ":dim=" + std::to_string(config_.dim);
  }

  Eigen::VectorXd EncodeText(std::string_view text) const override {
    httplib::Client cli(config_.base_url);
    cli.set_read_timeout(60, 0);
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + config_.api_key);
    }
    nlohmann::json body = {{"model", config_.model}, {"input", std::string(text)}};
    auto res = cli.Post(config_.path, headers, body.dump(), "application/json");
    if (!res) {
      throw Error(ErrorCode::kTransient, "embedding transport failure: " +
                                             httplib::to_string(res.error()));
    }
    if (res->status == 429 || res->status >= 500) {
      throw Error(ErrorCode::kTransient,
                  "embedding provider returned HTTP " + std::to_string(res->status));
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kProvider,
                  "embedding provider returned HTTP " + std::to_string(res->status));
    }
    nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
    try {
      const auto& emb = j.at("data").at(0).at("embedding");
      if (static_cast<int>(emb.size()) != config_.dim) {
        throw Error(ErrorCode::kProvider,
                    "embedding width " + std::to_string(emb.size()) +
                        ", configured " + std::to_string(config_.dim));
      }
      Eigen::VectorXd v(config_.dim);
      for (int i = 0; i < config_.dim; ++i) v[i] = emb[i].get<double>();
      const double norm = v.norm();
      if (norm > 0) v /= norm;
      return v;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kProvider,
                  std::string("malformed embedding response: ") + e.what());
    }
  }

 private:
  FeaturizerConfig config_;
};

}  // namespace

std::unique_ptr<Featurizer> Featurizer::Create(const FeaturizerConfig& config) {
  if (config.dim < 1) throw Error(ErrorCode::kConfig, "featurizer dim must be >= 1");
  switch (config.mode) {
    case FeaturizerConfig::Mode::kHashedText:
      return std::make_unique<HashedTextFeaturizer>(config.dim);
    case FeaturizerConfig::Mode::kExternal:
      return std::make_unique<ExternalFeaturizer>(config);
  }
  throw Error(ErrorCode::kConfig, "unknown featurizer mode");
}

std::string ItemText(const Item& item) {
  // A trailing "(YYYY)" is dropped; the decade is appended below.
  std::string text = item.title;
  if (ParseTitleYear(text)) text = std::string(Trim(text.substr(0, text.rfind('('))));
  if (!item.summary.empty()) text += ". " + item.summary;
  for (const std::string& g : item.genres) text += ". " + g;
  if (item.decade) text += ". " + std::to_string(*item.decade) + "s";
  return text;
}

std::vector<std::string> HashedFeatureTokens(std::string_view text) {
  std::vector<std::string> out;
  // Clause boundaries end negation scope.
  size_t start = 0;
  for (size_t i = 0; i <= text.size(); ++i) {
    const bool boundary = i == text.size() || text[i] == ',' || text[i] == ';' ||
                          text[i] == '.' || text[i] == '!' || text[i] == '?' ||
                          text[i] == ':';
    if (!boundary) continue;
    bool negated = false;
    for (const std::string& raw : Tokenize(text.substr(start, i - start))) {
      if (EndsScope(raw)) {
        negated = false;
        continue;
      }
      if (IsNegationCue(raw)) {
        negated = true;
        continue;
      }
      if (IsStopword(raw)) continue;
      std::string tok = Stem(raw);
      if (negated) tok = "not_" + tok;
      out.push_back(std::move(tok));
    }
    start = i + 1;
  }
  return out;
}

ItemFeatures ItemFeatures::Build(const Catalog& catalog, const Featurizer& featurizer) {
  ItemFeatures f;
  f.fingerprint_ = featurizer.fingerprint();
  f.ids_ = catalog.Ids();
  f.rows_.resize(static_cast<Eigen::Index>(catalog.size()), featurizer.dim());
  for (size_t i = 0; i < catalog.size(); ++i) {
    f.rows_.row(static_cast<Eigen::Index>(i)) =
        featurizer.EncodeText(ItemText(catalog.items()[i])).transpose();
  }
  Instrumentation::Get().CountItemEncodings(catalog.size());
  return f;
}

size_t ItemFeatures::IndexOf(ItemId id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) {
    throw Error(ErrorCode::kNotFound, "no features for item " + std::to_string(id));
  }
  return static_cast<size_t>(it - ids_.begin());
}

Eigen::VectorXd ItemFeatures::Row(ItemId id) const {
  return rows_.row(static_cast<Eigen::Index>(IndexOf(id))).transpose();
}

}  // namespace steerrec
