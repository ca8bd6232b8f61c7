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

// steerrec command line. Talks to the library through the C API only.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "CLI11.hpp"
#include "steerrec/steerrec.h"

namespace {

// Environment variable holding the provider key for external models.
constexpr char kApiKeyEnv[] = "STEERREC_API_KEY";

struct DatasetFlags {
  std::string items;
  std::string ratings;
  std::string summaries;

  void Add(CLI::App* app, bool need_ratings = true) {
    app->add_option("--items", items, "Items CSV (movieId,title,genres)")->required();
    auto* r = app->add_option("--ratings", ratings, "Ratings CSV (userId,movieId,rating,timestamp)");
    if (need_ratings) r->required();
    app->add_option("--summaries", summaries, "Summaries JSONL");
  }
  steerrec_dataset Get() const {
    return {items.c_str(), ratings.empty() ? nullptr : ratings.c_str(),
            summaries.empty() ? nullptr : summaries.c_str()};
  }
};

struct LlmFlags {
  std::string base_url;
  std::string model;
  std::string replay;
  std::string api_key;
  int max_in_flight = 4;

  void Add(CLI::App* app) {
    app->add_option("--llm-url", base_url, "OpenAI-compatible base URL");
    app->add_option("--llm-model", model, "Chat model name");
    app->add_option("--llm-replay", replay, "Serve recorded LLM responses from this JSONL");
    app->add_option("--llm-max-in-flight", max_in_flight, "Concurrent LLM calls")
        ->check(CLI::PositiveNumber);
  }
  void Fill(steerrec_llm_options* o) {
    if (const char* key = std::getenv(kApiKeyEnv)) api_key = key;
    o->base_url = base_url.c_str();
    o->model = model.c_str();
    o->api_key = api_key.c_str();
    o->replay_path = replay.c_str();
    o->max_in_flight = max_in_flight;
  }
};

struct FeaturizerFlags {
  std::string base_url;
  std::string model;
  std::string api_key;
  int dim = 0;

  void Add(CLI::App* app) {
    app->add_option("--embed-url", base_url, "Embeddings endpoint; hashed text when unset");
    app->add_option("--embed-model", model, "Embedding model name");
    app->add_option("--embed-dim", dim, "Feature dimension");
  }
  void Fill(steerrec_featurizer_options* o) {
    if (const char* key = std::getenv(kApiKeyEnv)) api_key = key;
    o->base_url = base_url.c_str();
    o->model = model.c_str();
    o->api_key = api_key.c_str();
    if (dim > 0) o->dim = dim;
  }
};

// Prints the error and returns the process exit code.
int Check(steerrec_status status) {
  if (status == STEERREC_OK) return 0;
  std::fprintf(stderr, "error [%s]: %s\n", steerrec_status_name(status), steerrec_last_error());
  return 1;
}

void PrintOrWrite(char* json, const std::string& path) {
  if (json == nullptr) return;
  if (path.empty()) {
    std::printf("%s\n", json);
  } else {
    std::ofstream(path, std::ios::binary) << json << '\n';
  }
  steerrec_free(json);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"steerrec: steerable recommendations from engagement plus stated requests"};
  app.require_subcommand(1);
  app.set_version_flag("--version", steerrec_version());
  int rc = 0;

  // synth
  steerrec_synth_options synth;
  steerrec_synth_options_init(&synth);
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic catalog, users and personas");
  synth_cmd->add_option("--out", synth_out, "Existing output directory")->required();
  synth_cmd->add_option("--items", synth.n_items, "Number of items");
  synth_cmd->add_option("--users", synth.n_users, "Number of users");
  synth_cmd->add_option("--seed", synth.seed, "Seed");
  synth_cmd->callback([&] { rc = Check(steerrec_synth(&synth, synth_out.c_str())); });

  // fit
  DatasetFlags fit_data;
  steerrec_fit_options fit;
  steerrec_fit_options_init(&fit);
  std::string fit_out, fit_report;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the engagement model");
  fit_data.Add(fit_cmd);
  fit_cmd->add_option("--out", fit_out, "Model output path")->required();
  fit_cmd->add_option("--half-life-days", fit.half_life_days, "Affinity decay half-life");
  fit_cmd->add_option("--threshold", fit.affinity_threshold, "Engaged rating threshold");
  fit_cmd->add_option("--report", fit_report, "Write the JSON report here");
  fit_cmd->callback([&] {
    char* report = nullptr;
    const steerrec_dataset d = fit_data.Get();
    rc = Check(steerrec_fit(&d, &fit, fit_out.c_str(), &report));
    PrintOrWrite(report, fit_report);
  });

  // simgen
  DatasetFlags sim_data;
  LlmFlags sim_llm;
  steerrec_simgen_options sim;
  steerrec_simgen_options_init(&sim);
  std::string sim_out, sim_requests, sim_judge = "synthetic", sim_source = "template";
  auto* sim_cmd = app.add_subcommand("simgen", "Generate requests and a judged corpus");
  sim_data.Add(sim_cmd);
  sim_llm.Add(sim_cmd);
  sim_cmd->add_option("--out", sim_out, "Corpus JSONL output")->required();
  sim_cmd->add_option("--requests-out", sim_requests, "Generated requests JSONL");
  sim_cmd->add_option("--per-category", sim.n_per_category, "Requests per category");
  sim_cmd->add_option("--items-per-request", sim.items_per_request, "Items judged per request");
  sim_cmd->add_option("--max-tuples", sim.max_tuples, "Truncate the corpus (0 keeps all)");
  sim_cmd->add_option("--seed", sim.seed, "Seed");
  sim_cmd->add_option("--judge", sim_judge, "Judge")->check(CLI::IsMember({"synthetic", "llm"}));
  sim_cmd->add_option("--request-source", sim_source, "Request generator")
      ->check(CLI::IsMember({"template", "llm"}));
  sim_cmd->add_option("--concurrency", sim.max_concurrency, "Concurrent judge calls")
      ->check(CLI::PositiveNumber);
  sim_cmd->callback([&] {
    sim.judge = sim_judge.c_str();
    sim.request_source = sim_source.c_str();
    sim.requests_out = sim_requests.empty() ? nullptr : sim_requests.c_str();
    sim_llm.Fill(&sim.llm);
    char* report = nullptr;
    const steerrec_dataset d = sim_data.Get();
    rc = Check(steerrec_simgen(&d, &sim, sim_out.c_str(), &report));
    PrintOrWrite(report, "");
  });

  // train
  DatasetFlags train_data;
  FeaturizerFlags train_feat;
  steerrec_train_options train;
  steerrec_train_options_init(&train);
  std::string train_corpus, train_out, train_report;
  bool no_user_features = false;
  auto* train_cmd = app.add_subcommand("train", "Distill judge scores into the value towers");
  train_data.Add(train_cmd);
  train_feat.Add(train_cmd);
  train_cmd->add_option("--corpus", train_corpus, "Corpus JSONL")->required();
  train_cmd->add_option("--out", train_out, "Parameters output path")->required();
  train_cmd->add_option("--report", train_report, "Write the JSON report here");
  train_cmd->add_option("--seed", train.seed, "Seed");
  train_cmd->add_option("--hidden", train.hidden, "Hidden width");
  train_cmd->add_option("--output", train.output, "Tower output width");
  train_cmd->add_option("--batch", train.batch_size, "Batch size");
  train_cmd->add_option("--lr", train.learning_rate, "Learning rate");
  train_cmd->add_option("--momentum", train.momentum, "Momentum");
  train_cmd->add_option("--weight-decay", train.weight_decay, "L2 penalty");
  train_cmd->add_option("--epochs", train.max_epochs, "Maximum epochs");
  train_cmd->add_option("--patience", train.patience, "Early stopping patience");
  train_cmd->add_flag("--no-user-features", no_user_features, "Drop the user history block");
  train_cmd->callback([&] {
    train.user_features = no_user_features ? 0 : 1;
    train_feat.Fill(&train.featurizer);
    char* report = nullptr;
    const steerrec_dataset d = train_data.Get();
    rc = Check(steerrec_train(&d, train_corpus.c_str(), &train, train_out.c_str(), &report));
    PrintOrWrite(report, train_report);
  });

  // index
  DatasetFlags index_data;
  FeaturizerFlags index_feat;
  std::string index_params, index_out;
  int64_t built_at = 0;
  auto* index_cmd = app.add_subcommand("index", "Precompute item tower outputs");
  index_data.Add(index_cmd, false);
  index_feat.Add(index_cmd);
  index_cmd->add_option("--params", index_params, "Trained parameters")->required();
  index_cmd->add_option("--out", index_out, "Index output path")->required();
  index_cmd->add_option("--built-at", built_at, "Build timestamp recorded in the index");
  index_cmd->callback([&] {
    steerrec_featurizer_options f{nullptr, nullptr, nullptr, 0};
    index_feat.Fill(&f);
    const steerrec_dataset d = index_data.Get();
    rc = Check(steerrec_index(&d, index_params.c_str(), &f, built_at, index_out.c_str()));
  });

  // Shared model flags for recommend, reachability and serve.
  struct ModelFlags {
    DatasetFlags data;
    FeaturizerFlags feat;
    std::string engagement, params, index;
    void Add(CLI::App* cmd) {
      data.Add(cmd);
      feat.Add(cmd);
      cmd->add_option("--engagement", engagement, "Engagement model")->required();
      cmd->add_option("--params", params, "Tower parameters")->required();
      cmd->add_option("--index", index, "Item index")->required();
    }
    int Open(steerrec_engine** engine) {
      steerrec_engine_options o;
      steerrec_engine_options_init(&o);
      o.data = data.Get();
      o.engagement_path = engagement.c_str();
      o.params_path = params.c_str();
      o.index_path = index.c_str();
      feat.Fill(&o.featurizer);
      return Check(steerrec_engine_open(&o, engine));
    }
  };

  // recommend
  ModelFlags rec_models;
  steerrec_query query;
  steerrec_query_init(&query);
  std::string rec_request, rec_genres;
  auto* rec_cmd = app.add_subcommand("recommend", "Print one feed as JSON");
  rec_models.Add(rec_cmd);
  rec_cmd->add_option("--user", query.user_id, "User id (0 for cold start)");
  rec_cmd->add_option("--request", rec_request, "Natural-language request");
  rec_cmd->add_option("--genres", rec_genres, "Comma-separated genre filter");
  rec_cmd->add_option("--decade", query.decade, "Decade filter, e.g. 1990");
  rec_cmd->add_option("-w,--w-control", query.w_control, "Blend weight")
      ->check(CLI::Range(0.0, 1.0));
  rec_cmd->add_option("-k", query.k, "Feed length");
  rec_cmd->callback([&] {
    steerrec_engine* engine = nullptr;
    if ((rc = rec_models.Open(&engine)) != 0) return;
    query.request = rec_request.c_str();
    query.genres = rec_genres.c_str();
    char* feed = nullptr;
    rc = Check(steerrec_recommend(engine, &query, &feed));
    PrintOrWrite(feed, "");
    steerrec_engine_close(engine);
  });

  // reachability
  ModelFlags reach_models;
  LlmFlags reach_llm;
  steerrec_reach_options reach;
  steerrec_reach_options_init(&reach);
  std::string reach_proposer = "scripted", reach_personas, reach_out, reach_csv;
  auto* reach_cmd = app.add_subcommand("reachability", "Run the feed reachability experiment");
  reach_models.Add(reach_cmd);
  reach_llm.Add(reach_cmd);
  reach_cmd->add_option("--trials", reach.n_trials, "Number of trials");
  reach_cmd->add_option("--seed", reach.seed, "Seed");
  reach_cmd->add_option("--proposer", reach_proposer, "Request proposer")
      ->check(CLI::IsMember({"scripted", "descriptive", "llm"}));
  reach_cmd->add_option("--personas", reach_personas, "personas.jsonl for the scripted proposer");
  reach_cmd->add_option("--budget", reach.budget, "Requests tried per starting filter");
  reach_cmd->add_option("-w,--w-control", reach.w_control, "Blend weight")
      ->check(CLI::Range(0.0, 1.0));
  reach_cmd->add_option("-k", reach.k, "Feed length");
  reach_cmd->add_option("--concurrency", reach.max_concurrency, "Concurrent trials")
      ->check(CLI::PositiveNumber);
  reach_cmd->add_option("--out", reach_out, "JSON report path (stdout when unset)");
  reach_cmd->add_option("--csv", reach_csv, "Per-trial CSV path");
  reach_cmd->callback([&] {
    steerrec_engine* engine = nullptr;
    if ((rc = reach_models.Open(&engine)) != 0) return;
    reach.proposer = reach_proposer.c_str();
    reach.personas_path = reach_personas.c_str();
    reach.csv_out = reach_csv.empty() ? nullptr : reach_csv.c_str();
    reach_llm.Fill(&reach.llm);
    char* report = nullptr;
    rc = Check(steerrec_reachability(engine, &reach, &report));
    PrintOrWrite(report, reach_out);
    steerrec_engine_close(engine);
  });

  // serve
  ModelFlags serve_models;
  steerrec_service_options serve;
  steerrec_service_options_init(&serve);
  std::string host = "127.0.0.1", cors, feedback_log;
  int port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "Serve feeds over HTTP");
  serve_models.Add(serve_cmd);
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--port", port, "Port (0 picks one)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("-w,--w-control", serve.default_w_control, "Default blend weight")
      ->check(CLI::Range(0.0, 1.0));
  serve_cmd->add_option("--cors-origin", cors, "Access-Control-Allow-Origin value");
  serve_cmd->add_option("--feedback-log", feedback_log, "Append feedback events here");
  serve_cmd->callback([&] {
    steerrec_engine* engine = nullptr;
    if ((rc = serve_models.Open(&engine)) != 0) return;
    serve.feedback_log_path = feedback_log.c_str();
    steerrec_service* service = nullptr;
    rc = Check(steerrec_service_create(engine, &serve, &service));
    steerrec_engine_close(engine);
    if (rc != 0) return;
    std::fprintf(stderr, "serving on %s:%d\n", host.c_str(), port);
    rc = Check(steerrec_service_run(service, host.c_str(), port, cors.c_str()));
    steerrec_service_destroy(service);
  });

  CLI11_PARSE(app, argc, argv);
  return rc;
}
