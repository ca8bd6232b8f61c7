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


// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <array>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "oracles/oracles.h"
#include "steerrec/blend.h"
#include "steerrec/engagement.h"
#include "steerrec/engine.h"
#include "steerrec/error.h"
#include "steerrec/featurizer.h"
#include "steerrec/instrumentation.h"
#include "steerrec/judge.h"
#include "steerrec/reachability.h"
#include "steerrec/rng.h"
#include "steerrec/service.h"
#include "steerrec/simgen.h"
#include "steerrec/synthetic_world.h"
#include "steerrec/value_model.h"
#include "support/fixtures.h"

namespace steerrec {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Runs `body`, timing it; a thrown exception is a failure.
struct Criterion {
  int id;
  std::string name;
  double max_seconds;  // 0: no runtime bound
  std::function<Outcome()> body;
};

std::string Fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

// ---------------------------------------------------------------------------
// Shared desk-scale setup: the 500-item synthetic world, 60 template
// requests judged by the synthetic judge, a 5,000-tuple corpus and towers
// trained with the default configuration.

constexpr uint64_t kWorldSeed = 7;
constexpr uint64_t kRequestSeed = 11;
constexpr size_t kRequestsPerCategory = 6;
constexpr size_t kItemsPerRequest = 84;
constexpr size_t kCorpusSize = 5000;
constexpr uint64_t kHeldOutSeed = 99;

struct SimgenArtifacts {
  std::vector<Request> requests;
  std::vector<TrainingTuple> tuples;
  std::string requests_bytes;
  std::string corpus_bytes;
};

struct Desk {
  SyntheticWorld world;
  std::shared_ptr<const Catalog> catalog;
  std::shared_ptr<const Featurizer> featurizer;
  std::unique_ptr<ItemFeatures> items;
  std::unique_ptr<UserProfiles> users;
  SimgenArtifacts simgen;
  TrainResult trained;
  std::shared_ptr<const Recommender> recommender;
};

std::string RequestsToJsonl(const std::vector<Request>& requests) {
  std::string out;
  for (const Request& r : requests) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["user_id"] = r.user_id;
    j["category"] = r.category;
    j["persistent"] = r.persistent;
    j["text"] = r.text;
    out += j.dump() + "\n";
  }
  return out;
}

SimgenArtifacts RunSimgen(const SyntheticWorld& world) {
  SimgenArtifacts a;
  RequestGenOptions gen;
  gen.n_per_category = kRequestsPerCategory;
  gen.seed = kRequestSeed;
  a.requests = GenerateRequests(world.catalog, world.logs, gen);
  const SyntheticJudge judge(RuleLexicon::ForCatalog(world.catalog));
  CorpusOptions options;
  options.items_per_request = kItemsPerRequest;
  options.seed = kRequestSeed;
  Corpus corpus = BuildCorpus(a.requests, world.catalog, judge, options);
  if (corpus.tuples.size() > kCorpusSize) corpus.tuples.resize(kCorpusSize);
  a.tuples = std::move(corpus.tuples);
  a.requests_bytes = RequestsToJsonl(a.requests);
  a.corpus_bytes = CorpusToJsonl(a.tuples);
  return a;
}

TrainResult RunTrain(const Desk& d) {
  TrainConfig config;
  config.seed = kWorldSeed;
  return Train(d.simgen.tuples, *d.featurizer, *d.items, *d.users, config);
}

Desk& GetDesk() {
  static std::unique_ptr<Desk> desk;
  if (desk) return *desk;
  auto d = std::make_unique<Desk>();
  SyntheticWorldConfig config;
  config.seed = kWorldSeed;
  d->world = MakeSyntheticWorld(config);
  d->catalog = std::make_shared<const Catalog>(d->world.catalog);
  d->featurizer = Featurizer::Create({});
  d->items = std::make_unique<ItemFeatures>(ItemFeatures::Build(*d->catalog, *d->featurizer));
  d->users = std::make_unique<UserProfiles>(UserProfiles::Build(d->world.logs, *d->items));
  d->simgen = RunSimgen(d->world);
  d->trained = RunTrain(*d);
  d->recommender = testing::MakeRecommender(d->catalog, d->world.logs, d->trained.params);
  desk = std::move(d);
  return *desk;
}

std::vector<Request> HeldOutRequests(const Desk& d) {
  RequestGenOptions gen;
  gen.n_per_category = 2;
  gen.seed = kHeldOutSeed;
  for (const Request& r : d.simgen.requests) gen.exclude_texts.push_back(r.text);
  return GenerateRequests(d.world.catalog, d.world.logs, gen);
}

ExperimentReport RunReachability(const Desk& d) {
  const ScriptedProposer proposer(PersonaScripts(d.world.personas));
  ExperimentConfig config;
  config.n_trials = 50;
  config.seed = 5;
  return RunExperiment(d.world.logs, *d.recommender, proposer, config);
}

// ---------------------------------------------------------------------------
// 1. Engagement scores against a brute-force oracle.

std::vector<oracle::Rating> ReadRatingsIndependently(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::vector<oracle::Rating> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f[4];
    for (auto& x : f) std::getline(ss, x, ',');
    rows.push_back({std::stoll(f[0]), std::stoll(f[1]), std::stod(f[2]), std::stoll(f[3])});
  }
  return rows;
}

Outcome SarOracle() {
  const Catalog catalog = Catalog::Load(testing::DataPath("sar_items.csv"));
  const InteractionLoadResult loaded =
      LoadInteractions(testing::DataPath("sar_ratings.csv"), catalog);
  const std::vector<oracle::Rating> rows =
      ReadRatingsIndependently(testing::DataPath("sar_ratings.csv"));
  int64_t now = 0;
  std::set<int64_t> users;
  for (const auto& r : rows) {
    now = std::max(now, r.t);
    users.insert(r.user);
  }
  const CooccurrenceModel model = CooccurrenceModel::Fit(catalog, loaded.logs);
  const std::vector<ItemId> all = catalog.Ids();
  double worst = 0.0;
  size_t checked = 0;
  for (const InteractionLog& log : loaded.logs) {
    ScoreOptions options;
    options.now = now;
    const ScoreMap got = ScoreBase(log, model, all, options).scores;
    for (ItemId i : all) {
      const double want = oracle::SarScore(rows, log.user_id, i, model.config().affinity_threshold,
                                           model.config().decay_half_life_seconds, now);
      worst = std::max(worst, std::abs(got.at(i) - want));
      ++checked;
    }
  }
  const bool shape = catalog.size() == 20 && users.size() == 10 && loaded.logs.size() == 10;
  return {shape && checked == 200 && worst <= 1e-9,
          std::to_string(checked) + " pairs, max |diff| " + Fmt("%.3g", worst)};
}

// ---------------------------------------------------------------------------
// 2. Judge extraction on dyadic distributions (exact in binary floating point).

Outcome JudgeExtraction() {
  // Numerators over 64; masses strictly above 0.9 (57.6 / 64).
  const std::vector<std::array<int64_t, 5>> accepted = {
      {0, 0, 0, 0, 64},  {64, 0, 0, 0, 0},   {0, 0, 64, 0, 0},  {16, 16, 16, 8, 8},
      {0, 0, 0, 32, 29}, {1, 2, 4, 8, 48},   {0, 32, 0, 0, 26}, {13, 13, 13, 13, 12},
      {0, 0, 0, 60, 0},  {3, 5, 7, 11, 33}};
  int exact = 0;
  for (const auto& n : accepted) {
    GradedDistribution d;
    for (int g = 0; g < 5; ++g) d.probs[g] = static_cast<double>(n[g]) / 64.0;
    const auto [num, den] = oracle::ExactExpectation({n.begin(), n.end()});
    const double want = static_cast<double>(num) / static_cast<double>(den);
    exact += ExpectedRating(d).raw_expected == want ? 1 : 0;
  }
  // Masses at or below 0.9: 57/64, 0.9 itself, 0.5 and nothing at all.
  const std::vector<std::array<double, 5>> rejected = {
      {0, 0, 0, 0.5, 0.390625}, {0, 0, 0, 0.9, 0}, {0.25, 0, 0, 0, 0.25}, {0, 0, 0, 0, 0}};
  int refused = 0;
  for (const auto& p : rejected) {
    GradedDistribution d;
    d.probs = p;
    try {
      ExpectedRating(d);
    } catch (const ComprehensionError&) {
      ++refused;
    }
  }
  return {exact == 10 && refused == 4, std::to_string(exact) + "/10 exact, " +
                                           std::to_string(refused) + "/4 rejected"};
}

// ---------------------------------------------------------------------------
// 3. Analytic gradients against central differences.

double WorstGradientError(TowerParams& p, const Eigen::MatrixXd& req, const Eigen::MatrixXd& item,
                          const Eigen::VectorXd& targets, const std::vector<size_t>* sample) {
  TowerParams grad;
  LossAndGradient(p, req, item, targets, &grad);
  const auto analytic = grad.Blocks();
  auto blocks = p.Blocks();
  auto loss = [&] { return LossAndGradient(p, req, item, targets, nullptr); };
  double worst = 0.0;
  size_t flat = 0;
  size_t next = 0;
  for (size_t k = 0; k < blocks.size(); ++k) {
    for (Eigen::Index i = 0; i < blocks[k].size(); ++i, ++flat) {
      if (sample != nullptr) {
        if (next >= sample->size() || (*sample)[next] != flat) continue;
        ++next;
      }
      const double numeric = oracle::CentralDifference(loss, &blocks[k][i], 1e-5);
      worst = std::max(worst, oracle::RelativeError(analytic[k][i], numeric, 1e-6));
    }
  }
  return worst;
}

Outcome GradientCheck() {
  const SyntheticWorld w = MakeSyntheticWorld({.n_items = 100, .n_users = 10, .seed = 3});
  RequestGenOptions gen;
  gen.n_per_category = 1;
  gen.seed = 3;
  const std::vector<Request> requests = GenerateRequests(w.catalog, w.logs, gen);
  CorpusOptions co;
  co.items_per_request = 4;
  co.seed = 3;
  const Corpus corpus =
      BuildCorpus(requests, w.catalog, SyntheticJudge(RuleLexicon::ForCatalog(w.catalog)), co);
  Rng rng(3);
  const std::vector<TrainingTuple> batch = rng.Sample(corpus.tuples, 10);

  const auto featurizer = Featurizer::Create({});
  const ItemFeatures items = ItemFeatures::Build(w.catalog, *featurizer);
  const UserProfiles users = UserProfiles::Build(w.logs, items);
  const int dim = featurizer->dim();
  Eigen::MatrixXd req(2 * dim, 10), item(dim, 10);
  Eigen::VectorXd targets(10);
  for (int b = 0; b < 10; ++b) {
    req.col(b) = FeaturizeRequest(users.Block(batch[b].user_id), batch[b].request.text, *featurizer);
    item.col(b) = items.Row(batch[b].item_id);
    targets[b] = batch[b].target;
  }

  // Default widths: a seeded sample of coordinates (the full set has over
  // 100k entries). Small widths: every coordinate.
  TowerParams full = InitParams(dim, true, TrainConfig{}.hidden, TrainConfig{}.output, 3,
                                featurizer->fingerprint());
  std::vector<size_t> sample;
  for (size_t i = 0; i < full.size(); ++i) sample.push_back(i);
  sample = rng.Sample(sample, 4000);
  std::sort(sample.begin(), sample.end());
  const double worst_full = WorstGradientError(full, req, item, targets, &sample);

  TowerParams small = InitParams(dim, true, 8, 4, 4, featurizer->fingerprint());
  for (auto& block : small.Blocks()) {
    for (Eigen::Index i = 0; i < block.size(); ++i) block[i] += rng.Uniform(-0.2, 0.2);
  }
  const double worst_small = WorstGradientError(small, req, item, targets, nullptr);
  return {worst_full <= 1e-4 && worst_small <= 1e-4,
          "default widths (4000 sampled of " + std::to_string(full.size()) + ") " +
              Fmt("%.2e", worst_full) + ", small widths (all " +
              std::to_string(small.size()) + ") " + Fmt("%.2e", worst_small)};
}

// ---------------------------------------------------------------------------
// 4. Distillation fidelity.

Outcome Distillation() {
  const Desk& d = GetDesk();
  const std::vector<Request> held_out = HeldOutRequests(d);
  const SyntheticJudge judge(RuleLexicon::ForCatalog(*d.catalog));
  const ItemIndex index = BuildIndex(*d.items, d.trained.params, 0);
  const std::vector<ItemId> all = d.catalog->Ids();
  double overlap_sum = 0.0;
  for (const Request& r : held_out) {
    std::map<int64_t, double> truth;
    for (const Item& item : d.catalog->items()) truth[item.id] = judge.Score(item, r).normalized;
    const ValueScores pred =
        Predict(d.users->Block(r.user_id), r, d.trained.params, *d.featurizer, index, all);
    std::vector<std::pair<double, ItemId>> ranked;
    for (const auto& [id, v] : pred) ranked.push_back({-v, id});
    std::sort(ranked.begin(), ranked.end());
    std::vector<int64_t> top;
    for (size_t i = 0; i < 10; ++i) top.push_back(ranked[i].second);
    overlap_sum += oracle::TieAwareTopKOverlap(top, truth, 10);
  }
  const double overlap = overlap_sum / static_cast<double>(held_out.size());
  const double mse = d.trained.report.test_mse;
  const bool shape = d.catalog->size() == 500 && d.simgen.requests.size() == 60 &&
                     d.simgen.tuples.size() == kCorpusSize && held_out.size() == 20;
  return {shape && mse <= 0.05 && overlap >= 0.6,
          "test MSE " + Fmt("%.4f", mse) + " over " +
              std::to_string(d.trained.report.test_tuples) + " tuples, top-10 overlap " +
              Fmt("%.3f", overlap) + " over " + std::to_string(held_out.size()) +
              " held-out requests"};
}

// ---------------------------------------------------------------------------
// 5. One request encoding per feed, no judge calls while serving.

Outcome ServingEfficiency() {
  const Desk& d = GetDesk();
  Service service(d.recommender, d.world.logs);
  const std::vector<Request> held_out = HeldOutRequests(d);
  const CallCounts before = Instrumentation::Get().Snapshot();
  int ok = 0;
  for (int n = 0; n < 100; ++n) {
    Service::Query q;
    q.emplace("user_id", std::to_string(d.world.logs[n % d.world.logs.size()].user_id));
    q.emplace("request", held_out[n % held_out.size()].text);
    ok += service.Handle("GET", "/feed", q, "").status == 200 ? 1 : 0;
  }
  const CallCounts delta = Instrumentation::Get().Snapshot() - before;
  return {ok == 100 && delta.request_encodings == 100 && delta.judge_calls == 0 &&
              delta.item_encodings == 0,
          std::to_string(ok) + " feeds, " + std::to_string(delta.request_encodings) +
              " request encodings, " + std::to_string(delta.judge_calls) + " judge calls, " +
              std::to_string(delta.item_encodings) + " item encodings"};
}

// ---------------------------------------------------------------------------
// 6. Blend endpoints and single crossing.

Outcome BlendProperties() {
  Rng rng(6);
  auto order_by = [](std::vector<ItemId> ids, const std::map<int64_t, double>& r) {
    std::stable_sort(ids.begin(), ids.end(), [&](ItemId a, ItemId b) { return r.at(a) > r.at(b); });
    return ids;
  };
  BlendConfig at0, at1;
  at0.w_control = 0.0;
  at1.w_control = 1.0;
  int endpoints = 0;
  for (int f = 0; f < 100; ++f) {
    std::set<ItemId> idset;
    const size_t n = 2 + rng.Below(40);
    while (idset.size() < n) idset.insert(static_cast<ItemId>(1 + rng.Below(10000)));
    const std::vector<ItemId> ids(idset.begin(), idset.end());
    ScoreMap base, value;
    for (ItemId id : ids) {
      base[id] = static_cast<double>(rng.Below(8));  // ties on purpose
      value[id] = rng.Uniform();
    }
    const bool ok0 = Blend(base, value, at0, ids, n).ItemIds() == order_by(ids, oracle::RankMap(base));
    const bool ok1 = Blend(base, value, at1, ids, n).ItemIds() == order_by(ids, oracle::RankMap(value));
    endpoints += ok0 && ok1 ? 1 : 0;
  }

  // Two-item sweeps: base prefers one item, value the other.
  int single = 0;
  const int sweeps = 100;
  for (int s = 0; s < sweeps; ++s) {
    const ItemId a = static_cast<ItemId>(1 + rng.Below(1000));
    const ItemId b = a + 1 + static_cast<ItemId>(rng.Below(1000));
    const bool a_base = rng.Below(2) == 0;
    const double hi = rng.Uniform(1, 2), lo = rng.Uniform(0, 1);
    ScoreMap base = {{a, a_base ? hi : lo}, {b, a_base ? lo : hi}};
    ScoreMap value = {{a, a_base ? lo : hi}, {b, a_base ? hi : lo}};
    const std::vector<ItemId> ids = {a, b};
    int changes = 0;
    ItemId last = 0;
    for (int step = 0; step <= 100; ++step) {
      BlendConfig c;
      c.w_control = step / 100.0;
      const ItemId top = Blend(base, value, c, ids, 2).ItemIds().front();
      if (last != 0 && top != last) ++changes;
      last = top;
    }
    single += changes == 1 ? 1 : 0;
  }
  return {endpoints == 100 && single == sweeps,
          std::to_string(endpoints) + "/100 fixtures match both endpoints, " +
              std::to_string(single) + "/" + std::to_string(sweeps) +
              " two-item sweeps cross exactly once"};
}

// ---------------------------------------------------------------------------
// 7. Reachability direction.

Outcome Reachability() {
  const Desk& d = GetDesk();
  const ExperimentReport report = RunReachability(d);
  bool every_bin = true;
  std::string bins;
  for (const BinSummary& b : report.bins) {
    if (b.n == 0) continue;
    every_bin = every_bin && b.mean_ctrl_distance <= b.mean_filters_only_distance;
    bins += " " + Fmt("%.4f", b.mean_ctrl_distance) + "<=" + Fmt("%.4f", b.mean_filters_only_distance);
  }
  const BinSummary& o = report.overall;
  const bool strict = o.n > 0 && o.mean_ctrl_distance < o.mean_filters_only_distance;
  return {d.world.logs.size() == 60 && every_bin && strict,
          std::to_string(o.n) + " binned trials (" + std::to_string(report.failed) + " failed, " +
              std::to_string(report.zero_distance) + " zero-distance); overall ctrl " +
              Fmt("%.4f", o.mean_ctrl_distance) + " vs filters-only " +
              Fmt("%.4f", o.mean_filters_only_distance) + "; bins" + bins};
}

// ---------------------------------------------------------------------------
// 8. Determinism: a second run of simgen, train and the experiment writes the
// same bytes.

std::string WriteFile(const std::string& dir, const std::string& name, const std::string& bytes) {
  const std::string path = dir + "/" + name;
  std::ofstream(path, std::ios::binary) << bytes;
  return path;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome Determinism() {
  const Desk& first = GetDesk();
  const std::string dir_a = testing::MakeTempDir("accept_a");
  const std::string dir_b = testing::MakeTempDir("accept_b");
  const ExperimentReport report_a = RunReachability(first);
  auto write_all = [](const std::string& dir, const SimgenArtifacts& s, const TrainResult& t,
                      const ExperimentReport& e) {
    WriteFile(dir, "requests.jsonl", s.requests_bytes);
    WriteFile(dir, "corpus.jsonl", s.corpus_bytes);
    WriteFile(dir, "params.bin", t.params.Serialize());
    WriteFile(dir, "train_report.json", t.report.ToJson());
    WriteFile(dir, "experiment.json", e.ToJson());
    WriteFile(dir, "trials.csv", e.ToCsv());
  };
  write_all(dir_a, first.simgen, first.trained, report_a);

  Desk second;
  second.world = MakeSyntheticWorld({.seed = kWorldSeed});
  second.catalog = std::make_shared<const Catalog>(second.world.catalog);
  second.featurizer = Featurizer::Create({});
  second.items = std::make_unique<ItemFeatures>(ItemFeatures::Build(*second.catalog, *second.featurizer));
  second.users = std::make_unique<UserProfiles>(UserProfiles::Build(second.world.logs, *second.items));
  second.simgen = RunSimgen(second.world);
  second.trained = RunTrain(second);
  second.recommender =
      testing::MakeRecommender(second.catalog, second.world.logs, second.trained.params);
  write_all(dir_b, second.simgen, second.trained, RunReachability(second));

  std::vector<std::string> differing;
  for (const char* f : {"requests.jsonl", "corpus.jsonl", "params.bin", "train_report.json",
                        "experiment.json", "trials.csv"}) {
    const std::string a = ReadFile(dir_a + "/" + f), b = ReadFile(dir_b + "/" + f);
    if (a.empty() || a != b) differing.push_back(f);
  }
  std::string detail = "6 artifacts compared";
  for (const auto& f : differing) detail += ", differs: " + f;
  return {differing.empty(), detail};
}

}  // namespace
}  // namespace steerrec

int main() {
  using steerrec::Criterion;
  const std::vector<Criterion> criteria = {
      {1, "engagement scores match the brute-force oracle", 1.0, steerrec::SarOracle},
      {2, "judge expectation exact on dyadic cases, low mass rejected", 1.0,
       steerrec::JudgeExtraction},
      {3, "analytic gradients match central differences", 10.0, steerrec::GradientCheck},
      {4, "distilled value model tracks the judge", 300.0, steerrec::Distillation},
      {5, "100 feeds cost 100 request encodings and no judge calls", 0.0,
       steerrec::ServingEfficiency},
      {6, "blend endpoints and single crossing", 0.0, steerrec::BlendProperties},
      {7, "requests plus filters reach closer than filters alone", 600.0,
       steerrec::Reachability},
      {8, "seeded runs are byte-identical", 0.0, steerrec::Determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    steerrec::Outcome out;
    try {
      out = c.body();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.max_seconds > 0 && secs > c.max_seconds) {
      out.pass = false;
      out.detail += "; exceeded " + steerrec::Fmt("%.0f", c.max_seconds) + " s";
    }
    failed += out.pass ? 0 : 1;
    std::printf("%s [%d] %s: %s (%.2f s)\n", out.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                out.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
