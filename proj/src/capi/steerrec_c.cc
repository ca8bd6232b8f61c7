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

#include "steerrec/steerrec.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "steerrec/catalog.h"
#include "steerrec/engagement.h"
#include "steerrec/engine.h"
#include "steerrec/error.h"
#include "steerrec/featurizer.h"
#include "steerrec/instrumentation.h"
#include "steerrec/judge.h"
#include "steerrec/llm_client.h"
#include "steerrec/prompts.h"
#include "steerrec/reachability.h"
#include "steerrec/service.h"
#include "steerrec/simgen.h"
#include "steerrec/synthetic_world.h"
#include "steerrec/text.h"
#include "steerrec/value_model.h"

using Json = nlohmann::ordered_json;

struct steerrec_engine {
  std::shared_ptr<const steerrec::Recommender> recommender;
  std::vector<steerrec::InteractionLog> logs;
};

struct steerrec_service {
  std::unique_ptr<steerrec::Service> service;
  std::unique_ptr<steerrec::HttpServer> http;
};

namespace {

thread_local std::string g_last_error;

steerrec_status Ok() {
  g_last_error.clear();
  return STEERREC_OK;
}

steerrec_status Fail(steerrec_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `fn`, mapping exceptions to status codes.
template <typename Fn>
steerrec_status Guard(Fn&& fn) {
  try {
    fn();
    return Ok();
  } catch (const steerrec::Error& e) {
    return Fail(static_cast<steerrec_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return Fail(STEERREC_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Fail(STEERREC_INTERNAL, e.what());
  }
}

void Require(bool cond, const char* message) {
  if (!cond) throw steerrec::Error(steerrec::ErrorCode::kInvalidArgument, message);
}

bool Set(const char* s) { return s != nullptr && *s != '\0'; }

char* Dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void Emit(char** out, const std::string& s) {
  if (out != nullptr) *out = Dup(s);
}

std::shared_ptr<steerrec::Catalog> LoadCatalog(const steerrec_dataset* data) {
  Require(data != nullptr && Set(data->items_path), "dataset needs an items path");
  auto catalog = std::make_shared<steerrec::Catalog>(steerrec::Catalog::Load(data->items_path));
  if (Set(data->summaries_path)) catalog->AttachSummariesFile(data->summaries_path);
  return catalog;
}

steerrec::InteractionLoadResult LoadLogs(const steerrec_dataset* data,
                                         const steerrec::Catalog& catalog) {
  Require(Set(data->ratings_path), "dataset needs a ratings path");
  return steerrec::LoadInteractions(data->ratings_path, catalog);
}

steerrec::FeaturizerConfig FeaturizerFrom(const steerrec_featurizer_options* o) {
  steerrec::FeaturizerConfig config;
  if (o == nullptr) return config;
  if (o->dim > 0) config.dim = o->dim;
  if (Set(o->base_url)) {
    config.mode = steerrec::FeaturizerConfig::Mode::kExternal;
    config.base_url = o->base_url;
    config.model = Set(o->model) ? o->model : "";
    config.api_key = Set(o->api_key) ? o->api_key : "";
  }
  return config;
}

std::shared_ptr<steerrec::LlmClient> LlmFrom(const steerrec_llm_options& o) {
  std::shared_ptr<steerrec::LlmClient> inner;
  if (Set(o.replay_path)) {
    inner = steerrec::ReplayLlmClient::FromFile(o.replay_path);
  } else {
    if (!Set(o.base_url)) {
      throw steerrec::Error(steerrec::ErrorCode::kConfig,
                            "LLM use needs a base URL or a replay fixture");
    }
    steerrec::HttpLlmConfig config;
    config.base_url = o.base_url;
    config.model = Set(o.model) ? o.model : "";
    config.api_key = Set(o.api_key) ? o.api_key : "";
    inner = std::make_shared<steerrec::HttpLlmClient>(config);
  }
  steerrec::RetryPolicy policy;
  if (o.max_in_flight > 0) policy.max_in_flight = o.max_in_flight;
  return std::make_shared<steerrec::BoundedLlmClient>(inner, policy);
}

void InitLlm(steerrec_llm_options* o) {
  o->base_url = nullptr;
  o->model = nullptr;
  o->api_key = nullptr;
  o->replay_path = nullptr;
  o->max_in_flight = 4;
}

void InitFeaturizer(steerrec_featurizer_options* o) {
  o->base_url = nullptr;
  o->model = nullptr;
  o->api_key = nullptr;
  o->dim = steerrec::FeaturizerConfig{}.dim;
}

std::string RequestsToJsonl(const std::vector<steerrec::Request>& requests) {
  std::string out;
  for (const steerrec::Request& r : requests) {
    Json j;
    j["id"] = r.id;
    j["text"] = r.text;
    j["category"] = r.category;
    j["persistent"] = r.persistent;
    j["user_id"] = r.user_id;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace

extern "C" {

const char* steerrec_version(void) { return "0.1.0"; }

const char* steerrec_status_name(steerrec_status status) {
  if (status == STEERREC_OK) return "ok";
  if (status < STEERREC_INVALID_ARGUMENT || status > STEERREC_INTERNAL) return "unknown";
  return steerrec::ErrorCodeName(static_cast<steerrec::ErrorCode>(status));
}

const char* steerrec_last_error(void) { return g_last_error.c_str(); }

void steerrec_free(char* s) { std::free(s); }

steerrec_status steerrec_get_counters(steerrec_counters* out) {
  return Guard([&] {
    Require(out != nullptr, "counters output is null");
    const steerrec::CallCounts c = steerrec::Instrumentation::Get().Snapshot();
    *out = {c.request_encodings, c.item_encodings, c.judge_calls, c.llm_calls};
  });
}

// ---- synth ---------------------------------------------------------------

void steerrec_synth_options_init(steerrec_synth_options* o) {
  const steerrec::SyntheticWorldConfig d;
  o->n_items = d.n_items;
  o->n_users = d.n_users;
  o->seed = d.seed;
}

steerrec_status steerrec_synth(const steerrec_synth_options* o, const char* out_dir) {
  return Guard([&] {
    Require(o != nullptr && Set(out_dir), "synth needs options and an output directory");
    steerrec::SyntheticWorldConfig config;
    config.n_items = o->n_items;
    config.n_users = o->n_users;
    config.seed = o->seed;
    steerrec::SaveSyntheticWorld(steerrec::MakeSyntheticWorld(config), out_dir);
  });
}

// ---- fit -----------------------------------------------------------------

void steerrec_fit_options_init(steerrec_fit_options* o) {
  const steerrec::SarConfig d;
  o->half_life_days = d.decay_half_life_seconds / 86400.0;
  o->affinity_threshold = d.affinity_threshold;
}

steerrec_status steerrec_fit(const steerrec_dataset* data, const steerrec_fit_options* o,
                             const char* model_out, char** report_json) {
  return Guard([&] {
    Require(o != nullptr && Set(model_out), "fit needs options and an output path");
    auto catalog = LoadCatalog(data);
    const steerrec::InteractionLoadResult loaded = LoadLogs(data, *catalog);
    steerrec::SarConfig config;
    config.decay_half_life_seconds = o->half_life_days * 86400.0;
    config.affinity_threshold = o->affinity_threshold;
    const auto model = steerrec::CooccurrenceModel::Fit(*catalog, loaded.logs, config);
    model.Save(model_out);
    Json report;
    report["items"] = catalog->size();
    report["users"] = loaded.logs.size();
    report["dropped_unknown_items"] = loaded.dropped_unknown_items;
    report["clamped_ratings"] = loaded.clamped_ratings;
    report["rejected_rows"] = loaded.rejected_rows;
    report["reference_time"] = model.reference_time();
    Emit(report_json, report.dump());
  });
}

// ---- simgen --------------------------------------------------------------

void steerrec_simgen_options_init(steerrec_simgen_options* o) {
  o->n_per_category = steerrec::RequestGenOptions{}.n_per_category;
  o->items_per_request = steerrec::CorpusOptions{}.items_per_request;
  o->max_tuples = 0;
  o->seed = 0;
  o->judge = "synthetic";
  o->request_source = "template";
  o->max_concurrency = 1;
  InitLlm(&o->llm);
  o->requests_out = nullptr;
}

steerrec_status steerrec_simgen(const steerrec_dataset* data, const steerrec_simgen_options* o,
                                const char* corpus_out, char** report_json) {
  return Guard([&] {
    Require(o != nullptr && Set(corpus_out), "simgen needs options and an output path");
    const std::string judge_kind = Set(o->judge) ? o->judge : "synthetic";
    const std::string source = Set(o->request_source) ? o->request_source : "template";
    Require(judge_kind == "synthetic" || judge_kind == "llm",
            "judge must be 'synthetic' or 'llm'");
    Require(source == "template" || source == "llm",
            "request source must be 'template' or 'llm'");

    auto catalog = LoadCatalog(data);
    const auto loaded = LoadLogs(data, *catalog);
    std::shared_ptr<steerrec::LlmClient> client;
    if (judge_kind == "llm" || source == "llm") client = LlmFrom(o->llm);

    steerrec::RequestGenOptions gen;
    gen.n_per_category = o->n_per_category;
    gen.seed = o->seed;
    if (source == "llm") {
      gen.source = steerrec::RequestSource::kLlm;
      gen.client = client;
    }
    const auto requests = steerrec::GenerateRequests(*catalog, loaded.logs, gen);
    if (Set(o->requests_out)) steerrec::WriteFile(o->requests_out, RequestsToJsonl(requests));

    std::unique_ptr<steerrec::Judge> judge;
    if (judge_kind == "llm") {
      judge = std::make_unique<steerrec::LlmJudge>(client, steerrec::LoadPrompt("item_judge"));
    } else {
      judge = std::make_unique<steerrec::SyntheticJudge>(
          steerrec::RuleLexicon::ForCatalog(*catalog));
    }
    steerrec::CorpusOptions corpus_options;
    corpus_options.items_per_request = o->items_per_request;
    corpus_options.seed = o->seed;
    corpus_options.max_concurrency = o->max_concurrency > 0 ? o->max_concurrency : 1;
    steerrec::Corpus corpus = steerrec::BuildCorpus(requests, *catalog, *judge, corpus_options);
    if (o->max_tuples > 0 && corpus.tuples.size() > o->max_tuples) {
      corpus.tuples.resize(o->max_tuples);
    }
    steerrec::WriteFile(corpus_out, steerrec::CorpusToJsonl(corpus.tuples));

    Json report;
    report["requests"] = requests.size();
    report["tuples"] = corpus.tuples.size();
    report["skipped"] = corpus.skipped.size();
    report["judge"] = judge->name();
    Emit(report_json, report.dump());
  });
}

// ---- train / index -------------------------------------------------------

void steerrec_train_options_init(steerrec_train_options* o) {
  const steerrec::TrainConfig d;
  o->seed = d.seed;
  o->hidden = d.hidden;
  o->output = d.output;
  o->batch_size = d.batch_size;
  o->learning_rate = d.learning_rate;
  o->momentum = d.momentum;
  o->weight_decay = d.weight_decay;
  o->max_epochs = d.max_epochs;
  o->patience = d.patience;
  o->user_features = d.user_features ? 1 : 0;
  InitFeaturizer(&o->featurizer);
}

steerrec_status steerrec_train(const steerrec_dataset* data, const char* corpus_path,
                               const steerrec_train_options* o, const char* params_out,
                               char** report_json) {
  return Guard([&] {
    Require(o != nullptr && Set(corpus_path) && Set(params_out),
            "train needs options, a corpus and an output path");
    auto catalog = LoadCatalog(data);
    const auto loaded = LoadLogs(data, *catalog);
    const auto featurizer = steerrec::Featurizer::Create(FeaturizerFrom(&o->featurizer));
    const auto items = steerrec::ItemFeatures::Build(*catalog, *featurizer);
    const auto users = steerrec::UserProfiles::Build(loaded.logs, items);
    const auto corpus = steerrec::CorpusFromJsonl(steerrec::ReadFile(corpus_path));

    steerrec::TrainConfig config;
    config.seed = o->seed;
    config.hidden = o->hidden;
    config.output = o->output;
    config.batch_size = o->batch_size;
    config.learning_rate = o->learning_rate;
    config.momentum = o->momentum;
    config.weight_decay = o->weight_decay;
    config.max_epochs = o->max_epochs;
    config.patience = o->patience;
    config.user_features = o->user_features != 0;
    const steerrec::TrainResult result =
        steerrec::Train(corpus, *featurizer, items, users, config);
    result.params.Save(params_out);
    Emit(report_json, result.report.ToJson());
  });
}

steerrec_status steerrec_index(const steerrec_dataset* data, const char* params_path,
                               const steerrec_featurizer_options* featurizer_options,
                               int64_t built_at, const char* index_out) {
  return Guard([&] {
    Require(Set(params_path) && Set(index_out), "index needs parameters and an output path");
    auto catalog = LoadCatalog(data);
    const auto featurizer = steerrec::Featurizer::Create(FeaturizerFrom(featurizer_options));
    const auto items = steerrec::ItemFeatures::Build(*catalog, *featurizer);
    const auto params = steerrec::TowerParams::Load(params_path);
    steerrec::BuildIndex(items, params, built_at).Save(index_out);
  });
}

// ---- engine --------------------------------------------------------------

void steerrec_engine_options_init(steerrec_engine_options* o) {
  o->data = {nullptr, nullptr, nullptr};
  o->engagement_path = nullptr;
  o->params_path = nullptr;
  o->index_path = nullptr;
  InitFeaturizer(&o->featurizer);
}

steerrec_status steerrec_engine_open(const steerrec_engine_options* o, steerrec_engine** out) {
  return Guard([&] {
    Require(o != nullptr && out != nullptr, "engine_open needs options and an output");
    Require(Set(o->engagement_path) && Set(o->params_path) && Set(o->index_path),
            "engine_open needs engagement, parameter and index paths");
    *out = nullptr;
    auto catalog = LoadCatalog(&o->data);
    auto engine = std::make_unique<steerrec_engine>();
    engine->logs = LoadLogs(&o->data, *catalog).logs;
    std::shared_ptr<const steerrec::Featurizer> featurizer =
        steerrec::Featurizer::Create(FeaturizerFrom(&o->featurizer));
    auto items = std::make_shared<const steerrec::ItemFeatures>(
        steerrec::ItemFeatures::Build(*catalog, *featurizer));
    engine->recommender = std::make_shared<const steerrec::Recommender>(
        catalog,
        std::make_shared<const steerrec::CooccurrenceModel>(
            steerrec::CooccurrenceModel::Load(o->engagement_path)),
        featurizer, items,
        std::make_shared<const steerrec::TowerParams>(
            steerrec::TowerParams::Load(o->params_path)),
        std::make_shared<const steerrec::ItemIndex>(steerrec::ItemIndex::Load(o->index_path)));
    *out = engine.release();
  });
}

void steerrec_engine_close(steerrec_engine* engine) { delete engine; }

size_t steerrec_engine_num_items(const steerrec_engine* engine) {
  return engine == nullptr ? 0 : engine->recommender->catalog().size();
}

void steerrec_query_init(steerrec_query* q) {
  q->user_id = 0;
  q->request = nullptr;
  q->genres = nullptr;
  q->decade = 0;
  q->w_control = steerrec::BlendConfig{}.w_control;
  q->k = 10;
}

steerrec_status steerrec_recommend(const steerrec_engine* engine, const steerrec_query* q,
                                   char** feed_json) {
  return Guard([&] {
    Require(engine != nullptr && q != nullptr && feed_json != nullptr,
            "recommend needs an engine, a query and an output");
    steerrec::RecommendQuery query;
    const auto logs = steerrec::IndexLogs(engine->logs);
    if (auto it = logs.find(q->user_id); it != logs.end()) query.log = it->second;
    if (Set(q->request)) query.request = q->request;
    if (Set(q->genres)) {
      for (const std::string& g : steerrec::SplitString(q->genres, ',')) {
        const std::string label(steerrec::Trim(g));
        if (!label.empty()) query.filter.genres.insert(label);
      }
    }
    if (q->decade != 0) query.filter.decade = q->decade;
    query.blend.w_control = q->w_control;
    query.k = q->k;

    const steerrec::Feed feed = engine->recommender->Recommend(query);
    const steerrec::Catalog& catalog = engine->recommender->catalog();
    Json items = Json::array();
    for (const steerrec::FeedEntry& e : feed.entries) {
      const steerrec::Item& item = catalog.Get(e.item_id);
      Json row;
      row["item_id"] = e.item_id;
      row["title"] = item.title;
      row["genres"] = std::vector<std::string>(item.genres.begin(), item.genres.end());
      row["decade"] = item.decade ? Json(*item.decade) : Json(nullptr);
      row["base_score"] = e.base_score;
      row["value_score"] = feed.has_request ? Json(e.value_score) : Json(nullptr);
      row["base_rank"] = e.base_rank;
      row["value_rank"] = feed.has_request ? Json(e.value_rank) : Json(nullptr);
      row["blended_score"] = e.blended_score;
      items.push_back(std::move(row));
    }
    Json out;
    out["no_matches"] = feed.no_matches;
    out["items"] = std::move(items);
    *feed_json = Dup(out.dump());
  });
}

// ---- reachability --------------------------------------------------------

void steerrec_reach_options_init(steerrec_reach_options* o) {
  const steerrec::ExperimentConfig d;
  o->n_trials = d.n_trials;
  o->seed = d.seed;
  o->budget = d.agent.budget;
  o->w_control = d.agent.blend.w_control;
  o->k = d.agent.k;
  o->max_concurrency = d.max_concurrency;
  o->proposer = "scripted";
  o->personas_path = nullptr;
  InitLlm(&o->llm);
  o->csv_out = nullptr;
}

steerrec_status steerrec_reachability(const steerrec_engine* engine,
                                      const steerrec_reach_options* o, char** report_json) {
  return Guard([&] {
    Require(engine != nullptr && o != nullptr, "reachability needs an engine and options");
    const std::string kind = Set(o->proposer) ? o->proposer : "scripted";
    std::unique_ptr<steerrec::RequestProposer> proposer;
    if (kind == "scripted") {
      Require(Set(o->personas_path), "the scripted proposer needs a personas file");
      proposer = std::make_unique<steerrec::ScriptedProposer>(
          steerrec::PersonaScripts(steerrec::LoadPersonas(o->personas_path)));
    } else if (kind == "descriptive") {
      auto catalog = std::shared_ptr<const steerrec::Catalog>(
          engine->recommender, &engine->recommender->catalog());
      proposer = std::make_unique<steerrec::DescriptiveProposer>(
          catalog, steerrec::RuleLexicon::DefaultTerms());
    } else if (kind == "llm") {
      proposer = std::make_unique<steerrec::LlmProposer>(
          LlmFrom(o->llm), steerrec::LoadPrompt("reachability_agent"));
    } else {
      Require(false, "proposer must be 'scripted', 'descriptive' or 'llm'");
    }

    steerrec::ExperimentConfig config;
    config.n_trials = o->n_trials;
    config.seed = o->seed;
    config.agent.budget = o->budget;
    config.agent.blend.w_control = o->w_control;
    config.agent.k = o->k;
    config.max_concurrency = o->max_concurrency > 0 ? o->max_concurrency : 1;
    const steerrec::ExperimentReport report =
        steerrec::RunExperiment(engine->logs, *engine->recommender, *proposer, config);
    if (Set(o->csv_out)) steerrec::WriteFile(o->csv_out, report.ToCsv());
    Emit(report_json, report.ToJson());
  });
}

// ---- service -------------------------------------------------------------

void steerrec_service_options_init(steerrec_service_options* o) {
  const steerrec::ServiceOptions d;
  o->default_w_control = d.default_w_control;
  o->default_k = d.default_k;
  o->max_k = d.max_k;
  o->feedback_log_path = nullptr;
}

steerrec_status steerrec_service_create(const steerrec_engine* engine,
                                        const steerrec_service_options* o,
                                        steerrec_service** out) {
  return Guard([&] {
    Require(engine != nullptr && o != nullptr && out != nullptr,
            "service_create needs an engine, options and an output");
    *out = nullptr;
    steerrec::ServiceOptions options;
    options.default_w_control = o->default_w_control;
    options.default_k = o->default_k;
    options.max_k = o->max_k;
    if (Set(o->feedback_log_path)) options.feedback_log_path = o->feedback_log_path;
    auto svc = std::make_unique<steerrec_service>();
    svc->service =
        std::make_unique<steerrec::Service>(engine->recommender, engine->logs, options);
    *out = svc.release();
  });
}

void steerrec_service_destroy(steerrec_service* service) {
  if (service == nullptr) return;
  if (service->http) service->http->Stop();
  delete service;
}

steerrec_status steerrec_service_handle(steerrec_service* service, const char* method,
                                        const char* path, const char* query_string,
                                        const char* body, int* http_status,
                                        char** response_body) {
  return Guard([&] {
    Require(service != nullptr && Set(method) && Set(path) && http_status != nullptr &&
                response_body != nullptr,
            "service_handle needs a service, method, path and outputs");
    const auto query = steerrec::Service::ParseQuery(query_string ? query_string : "");
    const steerrec::ServiceResponse r =
        service->service->Handle(method, path, query, body ? body : "");
    *http_status = r.status;
    *response_body = Dup(r.body);
  });
}

steerrec_status steerrec_service_start(steerrec_service* service, const char* host, int port,
                                       const char* cors_origin, int* bound_port) {
  return Guard([&] {
    Require(service != nullptr, "service is null");
    Require(!service->http, "service is already serving");
    steerrec::ServeOptions options;
    if (Set(host)) options.host = host;
    options.port = port;
    if (Set(cors_origin)) options.cors_origin = cors_origin;
    service->http = std::make_unique<steerrec::HttpServer>(*service->service);
    const int bound = service->http->Start(options);
    if (bound_port != nullptr) *bound_port = bound;
  });
}

steerrec_status steerrec_service_run(steerrec_service* service, const char* host, int port,
                                     const char* cors_origin) {
  return Guard([&] {
    Require(service != nullptr, "service is null");
    Require(!service->http, "service is already serving");
    steerrec::ServeOptions options;
    if (Set(host)) options.host = host;
    options.port = port;
    if (Set(cors_origin)) options.cors_origin = cors_origin;
    service->http = std::make_unique<steerrec::HttpServer>(*service->service);
    service->http->Run(options);
  });
}

void steerrec_service_stop(steerrec_service* service) {
  if (service != nullptr && service->http) service->http->Stop();
}

}  // extern "C"
