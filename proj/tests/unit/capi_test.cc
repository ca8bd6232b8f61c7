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


// Exercises the shared library through its C header only.

#include "steerrec/steerrec.h"

#include <gtest/gtest.h>
#include <unistd.h>

#include <filesystem>
#include "json.hpp"
#include <string>

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

// Takes ownership of a library string.
std::string Take(char* s) {
  std::string out = s != nullptr ? s : "";
  steerrec_free(s);
  return out;
}

class CapiPipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new std::string((fs::temp_directory_path() /
                            ("steerrec_capi_" + std::to_string(::getpid())))
                               .string());
    fs::remove_all(*dir_);
    fs::create_directories(*dir_);
    steerrec_synth_options s;
    steerrec_synth_options_init(&s);
    s.n_items = 120;
    s.n_users = 10;
    ASSERT_EQ(steerrec_synth(&s, dir_->c_str()), STEERREC_OK) << steerrec_last_error();
  }
  static void TearDownTestSuite() {
    fs::remove_all(*dir_);
    delete dir_;
  }

  static std::string P(const std::string& name) { return *dir_ + "/" + name; }
  static steerrec_dataset Data() {
    static std::string items, ratings, summaries;
    items = P("movies.csv");
    ratings = P("ratings.csv");
    summaries = P("summaries.jsonl");
    return {items.c_str(), ratings.c_str(), summaries.c_str()};
  }

  // Runs fit, simgen, train and index once; later tests reuse the files.
  static void BuildModels() {
    if (fs::exists(P("index.bin"))) return;
    const steerrec_dataset data = Data();
    steerrec_fit_options fit;
    steerrec_fit_options_init(&fit);
    char* report = nullptr;
    ASSERT_EQ(steerrec_fit(&data, &fit, P("sar.bin").c_str(), &report), STEERREC_OK)
        << steerrec_last_error();
    EXPECT_EQ(Json::parse(Take(report))["items"], 120);

    steerrec_simgen_options sim;
    steerrec_simgen_options_init(&sim);
    sim.n_per_category = 2;
    sim.items_per_request = 30;
    ASSERT_EQ(steerrec_simgen(&data, &sim, P("corpus.jsonl").c_str(), &report), STEERREC_OK)
        << steerrec_last_error();
    Take(report);

    steerrec_train_options train;
    steerrec_train_options_init(&train);
    train.max_epochs = 3;
    ASSERT_EQ(steerrec_train(&data, P("corpus.jsonl").c_str(), &train, P("params.bin").c_str(),
                             &report),
              STEERREC_OK)
        << steerrec_last_error();
    EXPECT_TRUE(Json::parse(Take(report)).contains("test_mse"));

    ASSERT_EQ(steerrec_index(&data, P("params.bin").c_str(), &train.featurizer, 0,
                             P("index.bin").c_str()),
              STEERREC_OK)
        << steerrec_last_error();
  }

  static steerrec_engine* Open() {
    BuildModels();
    steerrec_engine_options o;
    steerrec_engine_options_init(&o);
    o.data = Data();
    static std::string sar, params, index;
    sar = P("sar.bin");
    params = P("params.bin");
    index = P("index.bin");
    o.engagement_path = sar.c_str();
    o.params_path = params.c_str();
    o.index_path = index.c_str();
    steerrec_engine* e = nullptr;
    EXPECT_EQ(steerrec_engine_open(&o, &e), STEERREC_OK) << steerrec_last_error();
    return e;
  }

  static std::string* dir_;
};

std::string* CapiPipelineTest::dir_ = nullptr;

TEST(CapiBasicsTest, VersionAndStatusNames) {
  EXPECT_STREQ(steerrec_version(), "0.1.0");
  EXPECT_STREQ(steerrec_status_name(STEERREC_OK), "ok");
  EXPECT_STREQ(steerrec_status_name(STEERREC_FINGERPRINT_MISMATCH), "fingerprint_mismatch");
  EXPECT_STREQ(steerrec_status_name(static_cast<steerrec_status>(99)), "unknown");
  steerrec_free(nullptr);
}

TEST(CapiBasicsTest, ErrorsSetTheLastMessage) {
  steerrec_synth_options s;
  steerrec_synth_options_init(&s);
  EXPECT_EQ(steerrec_synth(&s, nullptr), STEERREC_INVALID_ARGUMENT);
  EXPECT_STRNE(steerrec_last_error(), "");
  const steerrec_dataset missing = {"/nonexistent/movies.csv", "/nonexistent/ratings.csv",
                                    nullptr};
  steerrec_fit_options fit;
  steerrec_fit_options_init(&fit);
  EXPECT_EQ(steerrec_fit(&missing, &fit, "/tmp/never.bin", nullptr), STEERREC_IO);
  EXPECT_NE(std::string(steerrec_last_error()).find("/nonexistent"), std::string::npos);
  EXPECT_EQ(steerrec_get_counters(nullptr), STEERREC_INVALID_ARGUMENT);
}

TEST(CapiBasicsTest, OptionDefaults) {
  steerrec_train_options t;
  steerrec_train_options_init(&t);
  EXPECT_EQ(t.hidden, 128);
  EXPECT_EQ(t.output, 64);
  EXPECT_EQ(t.batch_size, 32u);
  EXPECT_DOUBLE_EQ(t.learning_rate, 0.05);
  EXPECT_EQ(t.featurizer.dim, 256);
  steerrec_query q;
  steerrec_query_init(&q);
  EXPECT_DOUBLE_EQ(q.w_control, 0.995);
  EXPECT_EQ(q.k, 10u);
  steerrec_fit_options f;
  steerrec_fit_options_init(&f);
  EXPECT_DOUBLE_EQ(f.half_life_days, 30.0);
  EXPECT_DOUBLE_EQ(f.affinity_threshold, 3.5);
}

TEST_F(CapiPipelineTest, SynthWritesTheDataset) {
  for (const char* f : {"movies.csv", "ratings.csv", "summaries.jsonl", "personas.jsonl"}) {
    EXPECT_TRUE(fs::exists(P(f))) << f;
  }
}

TEST_F(CapiPipelineTest, RecommendCountsOneEncodingPerRequestFeed) {
  steerrec_engine* e = Open();
  ASSERT_NE(e, nullptr);
  EXPECT_EQ(steerrec_engine_num_items(e), 120u);
  steerrec_counters before, after;
  ASSERT_EQ(steerrec_get_counters(&before), STEERREC_OK);
  steerrec_query q;
  steerrec_query_init(&q);
  q.request = "comedy";
  q.k = 5;
  char* feed = nullptr;
  ASSERT_EQ(steerrec_recommend(e, &q, &feed), STEERREC_OK) << steerrec_last_error();
  const Json j = Json::parse(Take(feed));
  EXPECT_EQ(j["items"].size(), 5u);
  EXPECT_FALSE(j["no_matches"].get<bool>());
  ASSERT_EQ(steerrec_get_counters(&after), STEERREC_OK);
  EXPECT_EQ(after.request_encodings - before.request_encodings, 1u);
  EXPECT_EQ(after.judge_calls - before.judge_calls, 0u);

  q.genres = "NotAGenre";
  EXPECT_EQ(steerrec_recommend(e, &q, &feed), STEERREC_INVALID_ARGUMENT);
  q.genres = nullptr;
  q.w_control = 2.0;
  EXPECT_EQ(steerrec_recommend(e, &q, &feed), STEERREC_INVALID_ARGUMENT);
  steerrec_engine_close(e);
}

TEST_F(CapiPipelineTest, EngineRejectsAMismatchedFeaturizer) {
  BuildModels();
  steerrec_engine_options o;
  steerrec_engine_options_init(&o);
  o.data = Data();
  const std::string sar = P("sar.bin"), params = P("params.bin"), index = P("index.bin");
  o.engagement_path = sar.c_str();
  o.params_path = params.c_str();
  o.index_path = index.c_str();
  o.featurizer.dim = 64;
  steerrec_engine* e = nullptr;
  EXPECT_EQ(steerrec_engine_open(&o, &e), STEERREC_FINGERPRINT_MISMATCH);
  EXPECT_EQ(e, nullptr);
}

TEST_F(CapiPipelineTest, ReachabilityReportsTrials) {
  steerrec_engine* e = Open();
  ASSERT_NE(e, nullptr);
  steerrec_reach_options o;
  steerrec_reach_options_init(&o);
  const std::string personas = P("personas.jsonl"), csv = P("trials.csv");
  o.personas_path = personas.c_str();
  o.csv_out = csv.c_str();
  o.n_trials = 4;
  o.budget = 1;
  char* report = nullptr;
  ASSERT_EQ(steerrec_reachability(e, &o, &report), STEERREC_OK) << steerrec_last_error();
  const Json j = Json::parse(Take(report));
  EXPECT_EQ(j["n_trials"], 4);
  EXPECT_EQ(j["proposer"], "scripted");
  EXPECT_TRUE(fs::exists(csv));
  o.proposer = "oracle";
  EXPECT_EQ(steerrec_reachability(e, &o, &report), STEERREC_INVALID_ARGUMENT);
  steerrec_engine_close(e);
}

TEST_F(CapiPipelineTest, ServiceHandlesRequestsInProcess) {
  steerrec_engine* e = Open();
  ASSERT_NE(e, nullptr);
  steerrec_service_options so;
  steerrec_service_options_init(&so);
  steerrec_service* svc = nullptr;
  ASSERT_EQ(steerrec_service_create(e, &so, &svc), STEERREC_OK) << steerrec_last_error();
  steerrec_engine_close(e);  // the service keeps its own reference

  int status = 0;
  char* body = nullptr;
  ASSERT_EQ(steerrec_service_handle(svc, "GET", "/feed", "k=3&request=drama", nullptr, &status,
                                    &body),
            STEERREC_OK);
  EXPECT_EQ(status, 200);
  EXPECT_EQ(Json::parse(Take(body))["items"].size(), 3u);
  ASSERT_EQ(steerrec_service_handle(svc, "GET", "/feed", "w=7", nullptr, &status, &body),
            STEERREC_OK);
  EXPECT_EQ(status, 400);
  Take(body);
  ASSERT_EQ(steerrec_service_handle(svc, "POST", "/requests", nullptr,
                                    R"({"text": "comedy", "persistent": true})", &status, &body),
            STEERREC_OK);
  EXPECT_EQ(status, 200);
  Take(body);

  int port = 0;
  ASSERT_EQ(steerrec_service_start(svc, "127.0.0.1", 0, nullptr, &port), STEERREC_OK)
      << steerrec_last_error();
  EXPECT_GT(port, 0);
  EXPECT_EQ(steerrec_service_start(svc, "127.0.0.1", 0, nullptr, &port),
            STEERREC_INVALID_ARGUMENT);
  steerrec_service_stop(svc);
  steerrec_service_destroy(svc);
}

}  // namespace
