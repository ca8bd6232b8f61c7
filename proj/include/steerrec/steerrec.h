/* Copyright 2026 The steerrec Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* steerrec C API.
 *
 * Every function returns a steerrec_status. On failure the message is
 * available from steerrec_last_error() on the same thread until the next
 * call. Strings handed out through char** parameters are heap allocated and
 * must be released with steerrec_free(). Options structs must be filled by
 * their *_init function first so that new fields get defaults.
 */

#ifndef STEERREC_STEERREC_H_
#define STEERREC_STEERREC_H_

#include <stddef.h>
#include <stdint.h>

#if defined(STEERREC_BUILDING_LIBRARY)
#define STEERREC_API __attribute__((visibility("default")))
#else
#define STEERREC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  STEERREC_OK = 0,
  STEERREC_INVALID_ARGUMENT = 1,
  STEERREC_NOT_FOUND = 2,
  STEERREC_PARSE = 3,
  STEERREC_DUPLICATE = 4,
  STEERREC_IO = 5,
  STEERREC_COMPREHENSION = 6,
  STEERREC_TRANSIENT = 7,
  STEERREC_PROVIDER = 8,
  STEERREC_FINGERPRINT_MISMATCH = 9,
  STEERREC_NUMERICAL = 10,
  STEERREC_CONFIG = 11,
  STEERREC_INTERNAL = 12
} steerrec_status;

STEERREC_API const char* steerrec_version(void);
STEERREC_API const char* steerrec_status_name(steerrec_status status);
/* Message of the last failure on this thread; "" when none. */
STEERREC_API const char* steerrec_last_error(void);
STEERREC_API void steerrec_free(char* s);

/* Process-wide call counters. They only grow; diff two snapshots. */
typedef struct {
  uint64_t request_encodings;
  uint64_t item_encodings;
  uint64_t judge_calls;
  uint64_t llm_calls;
} steerrec_counters;

STEERREC_API steerrec_status steerrec_get_counters(steerrec_counters* out);

/* Text featurizer. A NULL or empty base_url selects the built-in hashed
 * featurizer; otherwise an OpenAI-compatible embeddings endpoint. */
typedef struct {
  const char* base_url;
  const char* model;
  const char* api_key;
  int dim;
} steerrec_featurizer_options;

/* Chat model used by the LLM judge, request generator and proposer.
 * replay_path serves recorded responses instead of calling base_url. */
typedef struct {
  const char* base_url;
  const char* model;
  const char* api_key;
  const char* replay_path;
  int max_in_flight;
} steerrec_llm_options;

/* Dataset on disk: MovieLens-shaped CSVs plus optional summaries JSONL. */
typedef struct {
  const char* items_path;
  const char* ratings_path;
  const char* summaries_path; /* may be NULL */
} steerrec_dataset;

/* ---- synth: synthetic catalog, users and personas ---------------------- */

typedef struct {
  size_t n_items;
  size_t n_users;
  uint64_t seed;
} steerrec_synth_options;

STEERREC_API void steerrec_synth_options_init(steerrec_synth_options* o);
/* Writes movies.csv, ratings.csv, summaries.jsonl and personas.jsonl into
 * an existing directory. */
STEERREC_API steerrec_status steerrec_synth(const steerrec_synth_options* o,
                                            const char* out_dir);

/* ---- fit: engagement model --------------------------------------------- */

typedef struct {
  double half_life_days;
  double affinity_threshold;
} steerrec_fit_options;

STEERREC_API void steerrec_fit_options_init(steerrec_fit_options* o);
/* Fits the co-occurrence model and saves it. report_json (optional) gets
 * load statistics. */
STEERREC_API steerrec_status steerrec_fit(const steerrec_dataset* data,
                                          const steerrec_fit_options* o,
                                          const char* model_out, char** report_json);

/* ---- simgen: requests and judged tuples -------------------------------- */

typedef struct {
  size_t n_per_category;
  size_t items_per_request;
  /* Keep at most this many tuples (0 keeps all), in corpus order. */
  size_t max_tuples;
  uint64_t seed;
  /* "synthetic" or "llm". */
  const char* judge;
  /* "template" or "llm". */
  const char* request_source;
  int max_concurrency;
  steerrec_llm_options llm;
  /* Optional JSONL of the generated requests. */
  const char* requests_out;
} steerrec_simgen_options;

STEERREC_API void steerrec_simgen_options_init(steerrec_simgen_options* o);
STEERREC_API steerrec_status steerrec_simgen(const steerrec_dataset* data,
                                             const steerrec_simgen_options* o,
                                             const char* corpus_out, char** report_json);

/* ---- train: value towers ----------------------------------------------- */

typedef struct {
  uint64_t seed;
  int hidden;
  int output;
  size_t batch_size;
  double learning_rate;
  double momentum;
  double weight_decay;
  int max_epochs;
  int patience;
  int user_features; /* boolean */
  steerrec_featurizer_options featurizer;
} steerrec_train_options;

STEERREC_API void steerrec_train_options_init(steerrec_train_options* o);
STEERREC_API steerrec_status steerrec_train(const steerrec_dataset* data,
                                            const char* corpus_path,
                                            const steerrec_train_options* o,
                                            const char* params_out, char** report_json);

/* ---- index: item tower outputs ----------------------------------------- */

STEERREC_API steerrec_status steerrec_index(const steerrec_dataset* data,
                                            const char* params_path,
                                            const steerrec_featurizer_options* featurizer,
                                            int64_t built_at, const char* index_out);

/* ---- engine: loaded models --------------------------------------------- */

typedef struct steerrec_engine steerrec_engine;

typedef struct {
  steerrec_dataset data;
  const char* engagement_path;
  const char* params_path;
  const char* index_path;
  steerrec_featurizer_options featurizer;
} steerrec_engine_options;

STEERREC_API void steerrec_engine_options_init(steerrec_engine_options* o);
STEERREC_API steerrec_status steerrec_engine_open(const steerrec_engine_options* o,
                                                  steerrec_engine** out);
STEERREC_API void steerrec_engine_close(steerrec_engine* engine);
STEERREC_API size_t steerrec_engine_num_items(const steerrec_engine* engine);

typedef struct {
  int64_t user_id;     /* 0 or unknown: cold start */
  const char* request; /* NULL or blank: engagement only */
  const char* genres;  /* comma separated, may be NULL */
  int decade;          /* 0: any */
  double w_control;
  size_t k;
} steerrec_query;

STEERREC_API void steerrec_query_init(steerrec_query* q);
/* Feed as JSON: {"no_matches": bool, "items": [{item_id, title, ...}]}. */
STEERREC_API steerrec_status steerrec_recommend(const steerrec_engine* engine,
                                                const steerrec_query* q, char** feed_json);

/* ---- reachability experiment ------------------------------------------- */

typedef struct {
  size_t n_trials;
  uint64_t seed;
  int budget;
  double w_control;
  size_t k;
  int max_concurrency;
  /* "scripted", "descriptive" or "llm". */
  const char* proposer;
  /* personas.jsonl for the scripted proposer. */
  const char* personas_path;
  steerrec_llm_options llm;
  /* Optional per-trial CSV. */
  const char* csv_out;
} steerrec_reach_options;

STEERREC_API void steerrec_reach_options_init(steerrec_reach_options* o);
STEERREC_API steerrec_status steerrec_reachability(const steerrec_engine* engine,
                                                   const steerrec_reach_options* o,
                                                   char** report_json);

/* ---- service ------------------------------------------------------------ */

typedef struct steerrec_service steerrec_service;

typedef struct {
  double default_w_control;
  size_t default_k;
  size_t max_k;
  const char* feedback_log_path; /* may be NULL */
} steerrec_service_options;

STEERREC_API void steerrec_service_options_init(steerrec_service_options* o);
/* The service shares the engine's models; the engine may be closed after. */
STEERREC_API steerrec_status steerrec_service_create(const steerrec_engine* engine,
                                                     const steerrec_service_options* o,
                                                     steerrec_service** out);
STEERREC_API void steerrec_service_destroy(steerrec_service* service);

/* Handles one request in-process. query_string is the part after '?'. */
STEERREC_API steerrec_status steerrec_service_handle(steerrec_service* service,
                                                     const char* method, const char* path,
                                                     const char* query_string,
                                                     const char* body, int* http_status,
                                                     char** response_body);

/* Starts HTTP serving on a background thread. port 0 picks a free port,
 * returned in bound_port. cors_origin may be NULL. */
STEERREC_API steerrec_status steerrec_service_start(steerrec_service* service,
                                                    const char* host, int port,
                                                    const char* cors_origin,
                                                    int* bound_port);
/* Blocks serving until steerrec_service_stop() is called from elsewhere. */
STEERREC_API steerrec_status steerrec_service_run(steerrec_service* service,
                                                  const char* host, int port,
                                                  const char* cors_origin);
STEERREC_API void steerrec_service_stop(steerrec_service* service);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* STEERREC_STEERREC_H_ */
