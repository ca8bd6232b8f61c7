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

// JSON-over-HTTP serving: steerable feeds, feedback capture, stored
// requests and per-session metrics.
//
//   GET    /feed?user_id=&request=&genres=A,B&decade=1990&w=0.995&k=10
//   POST   /feedback      {"user_id", "item_id", "action": "interested"|"watched"}
//   POST   /requests      {"user_id", "text", "persistent"}
//   GET    /requests?user_id=
//   DELETE /requests/{id}
//   GET    /metrics?user_id=
//   GET    /health
//
// Service::Handle holds all logic so it can be driven without sockets;
// HttpServer only adapts cpp-httplib to it.

#ifndef STEERREC_SERVICE_H_
#define STEERREC_SERVICE_H_

#include <atomic>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "steerrec/catalog.h"
#include "steerrec/engine.h"

namespace steerrec {

struct ServiceOptions {
  double default_w_control = 0.995;
  size_t default_k = 10;
  size_t max_k = 500;
  // Append-only JSONL feedback log; empty keeps events in memory only.
  std::string feedback_log_path;
};

struct ServiceResponse {
  int status = 200;
  std::string body;  // JSON
};

class Service {
 public:
  using Query = std::multimap<std::string, std::string>;

  Service(std::shared_ptr<const Recommender> recommender, std::vector<InteractionLog> logs,
          ServiceOptions options = {});

  // Decodes "a=1&b=x%20y" into a multimap; repeated keys are kept.
  static Query ParseQuery(const std::string& query_string);

  // Routes one request. `path` excludes the query string.
  ServiceResponse Handle(const std::string& method, const std::string& path,
                         const Query& query, const std::string& body);

  // Swaps in new models; in-flight requests finish on the old ones.
  void Reload(std::shared_ptr<const Recommender> recommender);

  // Feedback events recorded since start (all users).
  size_t feedback_events() const { return feedback_events_.load(); }

 private:
  struct StoredRequest {
    std::string id;
    std::string text;
    bool persistent = false;
  };
  struct Session {
    std::mutex mu;
    std::vector<StoredRequest> persistent;
    std::optional<StoredRequest> one_time;
    std::set<ItemId> served;
    std::set<ItemId> liked;
    std::set<ItemId> watched;
    size_t feeds_served = 0;
    size_t featurizer_calls = 0;
  };

  std::shared_ptr<const Recommender> models() const;
  std::shared_ptr<Session> SessionFor(UserId user);
  const InteractionLog* LogFor(UserId user) const;

  ServiceResponse GetFeed(const Query& query);
  ServiceResponse PostFeedback(const std::string& body);
  ServiceResponse PostRequest(const std::string& body);
  ServiceResponse ListRequests(const Query& query);
  ServiceResponse DeleteRequest(const std::string& id);
  ServiceResponse GetMetrics(const Query& query);

  mutable std::mutex models_mu_;
  std::shared_ptr<const Recommender> recommender_;
  std::vector<InteractionLog> logs_;
  std::map<UserId, const InteractionLog*> log_index_;
  ServiceOptions options_;

  std::mutex sessions_mu_;
  std::map<UserId, std::shared_ptr<Session>> sessions_;
  std::map<std::string, UserId> request_owner_;
  uint64_t next_request_id_ = 1;

  std::mutex feedback_mu_;
  std::ofstream feedback_log_;
  std::atomic<size_t> feedback_events_{0};
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  // Value of Access-Control-Allow-Origin; empty disables CORS headers.
  std::string cors_origin;
};

class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  // Binds and starts serving on a background thread; returns the bound port.
  // Throws kIo when the address cannot be bound.
  int Start(const ServeOptions& options);
  // Blocks serving on the calling thread until Stop() is called.
  void Run(const ServeOptions& options);
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace steerrec

#endif  // STEERREC_SERVICE_H_
