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

#include "steerrec/service.h"

#include <charconv>
#include <chrono>
#include <cmath>

#include "httplib.h"
#include "json.hpp"
#include "steerrec/error.h"
#include "steerrec/text.h"

namespace steerrec {

namespace {

using Json = nlohmann::ordered_json;

ServiceResponse Reply(int status, const Json& body) { return {status, body.dump()}; }

ServiceResponse Fail(int status, const std::string& message) {
  return Reply(status, Json{{"error", message}});
}

// Thrown while reading request parameters; becomes a 400.
struct BadRequest {
  std::string message;
};

template <typename T>
T ParseNumber(std::string_view name, std::string_view text) {
  text = Trim(text);
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw BadRequest{"parameter '" + std::string(name) + "' is not a number: '" +
                     std::string(text) + "'"};
  }
  return v;
}

std::optional<std::string> Param(const Service::Query& q, const std::string& key) {
  auto it = q.find(key);
  if (it == q.end()) return std::nullopt;
  return it->second;
}

UserId UserParam(const Service::Query& q) {
  auto v = Param(q, "user_id");
  return v && !Trim(*v).empty() ? ParseNumber<UserId>("user_id", *v) : 0;
}

Json ParseBody(const std::string& body) {
  Json j = Json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw BadRequest{"body must be a JSON object"};
  return j;
}

template <typename T>
T Field(const Json& j, const char* key, std::optional<T> fallback = std::nullopt) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    if (fallback) return *fallback;
    throw BadRequest{std::string("missing field '") + key + "'"};
  }
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw BadRequest{std::string("field '") + key + "' has the wrong type"};
  }
}

int64_t NowSeconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

Service::Service(std::shared_ptr<const Recommender> recommender,
                 std::vector<InteractionLog> logs, ServiceOptions options)
    : recommender_(std::move(recommender)), logs_(std::move(logs)), options_(std::move(options)) {
  if (!recommender_) throw Error(ErrorCode::kInvalidArgument, "service needs a recommender");
  if (!(options_.default_w_control >= 0.0 && options_.default_w_control <= 1.0)) {
    throw Error(ErrorCode::kConfig, "default w_control must lie in [0, 1]");
  }
  log_index_ = IndexLogs(logs_);
  if (!options_.feedback_log_path.empty()) {
    feedback_log_.open(options_.feedback_log_path, std::ios::app | std::ios::binary);
    if (!feedback_log_) {
      throw Error(ErrorCode::kIo, "cannot open feedback log " + options_.feedback_log_path);
    }
  }
}

void Service::Reload(std::shared_ptr<const Recommender> recommender) {
  if (!recommender) throw Error(ErrorCode::kInvalidArgument, "cannot reload a null model");
  std::lock_guard<std::mutex> lock(models_mu_);
  recommender_ = std::move(recommender);
}

std::shared_ptr<const Recommender> Service::models() const {
  std::lock_guard<std::mutex> lock(models_mu_);
  return recommender_;
}

std::shared_ptr<Service::Session> Service::SessionFor(UserId user) {
  std::lock_guard<std::mutex> lock(sessions_mu_);
  auto& s = sessions_[user];
  if (!s) s = std::make_shared<Session>();
  return s;
}

const InteractionLog* Service::LogFor(UserId user) const {
  auto it = log_index_.find(user);
  return it == log_index_.end() ? nullptr : it->second;
}

Service::Query Service::ParseQuery(const std::string& query_string) {
  httplib::Params params;
  httplib::detail::parse_query_text(query_string, params);
  return Query(params.begin(), params.end());
}

ServiceResponse Service::Handle(const std::string& method, const std::string& path,
                                const Query& query, const std::string& body) {
  try {
    if (method == "GET" && path == "/feed") return GetFeed(query);
    if (method == "POST" && path == "/feedback") return PostFeedback(body);
    if (method == "POST" && path == "/requests") return PostRequest(body);
    if (method == "GET" && path == "/requests") return ListRequests(query);
    if (method == "DELETE" && path.rfind("/requests/", 0) == 0) {
      return DeleteRequest(path.substr(std::string("/requests/").size()));
    }
    if (method == "GET" && path == "/metrics") return GetMetrics(query);
    if (method == "GET" && path == "/health") {
      return Reply(200, Json{{"ok", true}, {"items", models()->catalog().size()}});
    }
    return Fail(404, "no route for " + method + " " + path);
  } catch (const BadRequest& e) {
    return Fail(400, e.message);
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::kInvalidArgument:
        return Fail(400, e.what());
      case ErrorCode::kNotFound:
        return Fail(404, e.what());
      case ErrorCode::kTransient:
        return Fail(503, e.what());
      default:
        return Fail(500, e.what());
    }
  } catch (const std::exception& e) {
    return Fail(500, e.what());
  }
}

ServiceResponse Service::GetFeed(const Query& query) {
  const std::shared_ptr<const Recommender> rec = models();
  const UserId user = UserParam(query);

  RecommendQuery q;
  q.log = LogFor(user);
  q.blend.w_control = options_.default_w_control;
  q.k = options_.default_k;
  if (auto w = Param(query, "w")) {
    q.blend.w_control = ParseNumber<double>("w", *w);
    if (!(q.blend.w_control >= 0.0 && q.blend.w_control <= 1.0)) {
      throw BadRequest{"w must lie in [0, 1], got " + std::string(Trim(*w))};
    }
  }
  if (auto k = Param(query, "k")) {
    const long long v = ParseNumber<long long>("k", *k);
    if (v < 0 || static_cast<size_t>(v) > options_.max_k) {
      throw BadRequest{"k must lie in [0, " + std::to_string(options_.max_k) + "]"};
    }
    q.k = static_cast<size_t>(v);
  }
  auto [from, to] = query.equal_range("genres");
  for (auto it = from; it != to; ++it) {
    for (const std::string& g : SplitString(it->second, ',')) {
      const std::string label(Trim(g));
      if (label.empty()) continue;
      if (!rec->catalog().vocabulary().count(label)) {
        throw BadRequest{"unknown genre '" + label + "'"};
      }
      q.filter.genres.insert(label);
    }
  }
  if (auto d = Param(query, "decade"); d && !Trim(*d).empty()) {
    std::string_view text = Trim(*d);
    if (!text.empty() && text.back() == 's') text.remove_suffix(1);
    const int decade = ParseNumber<int>("decade", text);
    if (decade % 10 != 0) throw BadRequest{"decade must be a multiple of 10"};
    q.filter.decade = decade;
  }

  std::shared_ptr<Session> session = SessionFor(user);
  std::lock_guard<std::mutex> lock(session->mu);
  std::vector<std::string> parts;
  for (const StoredRequest& r : session->persistent) parts.push_back(r.text);
  if (session->one_time) parts.push_back(session->one_time->text);
  if (auto r = Param(query, "request"); r && !Trim(*r).empty()) {
    parts.emplace_back(Trim(*r));
  }
  if (!parts.empty()) q.request = Join(parts, "; ");
  q.exclude = session->watched;

  const Feed feed = rec->Recommend(q);
  if (session->one_time) {
    std::lock_guard<std::mutex> owners(sessions_mu_);
    request_owner_.erase(session->one_time->id);
    session->one_time.reset();
  }
  ++session->feeds_served;
  if (feed.has_request && !feed.no_matches) ++session->featurizer_calls;

  Json items = Json::array();
  for (const FeedEntry& e : feed.entries) {
    session->served.insert(e.item_id);
    const Item& item = rec->catalog().Get(e.item_id);
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
    row["interested"] = session->liked.count(e.item_id) > 0;
    row["watched"] = session->watched.count(e.item_id) > 0;
    items.push_back(std::move(row));
  }
  Json out;
  out["user_id"] = user;
  out["request"] = q.request ? Json(*q.request) : Json(nullptr);
  out["filters"] = {
      {"genres", std::vector<std::string>(q.filter.genres.begin(), q.filter.genres.end())},
      {"decade", q.filter.decade ? Json(*q.filter.decade) : Json(nullptr)}};
  out["w_control"] = q.blend.w_control;
  out["k"] = q.k;
  out["no_matches"] = feed.no_matches;
  out["items"] = std::move(items);
  return Reply(200, out);
}

ServiceResponse Service::PostFeedback(const std::string& body) {
  const Json j = ParseBody(body);
  const UserId user = Field<UserId>(j, "user_id", UserId{0});
  const ItemId item = Field<ItemId>(j, "item_id");
  const std::string action = Field<std::string>(j, "action");
  if (action != "interested" && action != "watched") {
    throw BadRequest{"action must be 'interested' or 'watched', got '" + action + "'"};
  }
  if (!models()->catalog().Contains(item)) {
    return Fail(404, "unknown item " + std::to_string(item));
  }
  const int64_t ts = Field<int64_t>(j, "timestamp", NowSeconds());

  std::shared_ptr<Session> session = SessionFor(user);
  {
    std::lock_guard<std::mutex> lock(session->mu);
    (action == "watched" ? session->watched : session->liked).insert(item);
  }
  Json event;
  event["user_id"] = user;
  event["item_id"] = item;
  event["action"] = action;
  event["timestamp"] = ts;
  {
    std::lock_guard<std::mutex> lock(feedback_mu_);
    if (feedback_log_.is_open()) {
      feedback_log_ << event.dump() << '\n';
      feedback_log_.flush();
      if (!feedback_log_) throw Error(ErrorCode::kIo, "feedback log write failed");
    }
  }
  const size_t total = ++feedback_events_;
  Json out = event;
  out["ok"] = true;
  out["events"] = total;
  return Reply(200, out);
}

ServiceResponse Service::PostRequest(const std::string& body) {
  const Json j = ParseBody(body);
  const UserId user = Field<UserId>(j, "user_id", UserId{0});
  const std::string text(Trim(Field<std::string>(j, "text", std::string())));
  const bool persistent = Field<bool>(j, "persistent", false);
  if (text.empty()) throw BadRequest{"request text is empty"};

  StoredRequest r;
  r.text = text;
  r.persistent = persistent;
  std::shared_ptr<Session> session = SessionFor(user);
  {
    std::lock_guard<std::mutex> lock(sessions_mu_);
    r.id = "q" + std::to_string(next_request_id_++);
    request_owner_[r.id] = user;
  }
  {
    std::lock_guard<std::mutex> lock(session->mu);
    if (persistent) {
      session->persistent.push_back(r);
    } else {
      if (session->one_time) {
        std::lock_guard<std::mutex> owners(sessions_mu_);
        request_owner_.erase(session->one_time->id);
      }
      session->one_time = r;
    }
  }
  return Reply(200, Json{{"id", r.id}, {"user_id", user}, {"text", r.text},
                         {"persistent", r.persistent}});
}

ServiceResponse Service::ListRequests(const Query& query) {
  const UserId user = UserParam(query);
  std::shared_ptr<Session> session = SessionFor(user);
  std::lock_guard<std::mutex> lock(session->mu);
  Json list = Json::array();
  auto add = [&list](const StoredRequest& r) {
    list.push_back({{"id", r.id}, {"text", r.text}, {"persistent", r.persistent}});
  };
  for (const StoredRequest& r : session->persistent) add(r);
  if (session->one_time) add(*session->one_time);
  return Reply(200, Json{{"user_id", user}, {"requests", list}});
}

ServiceResponse Service::DeleteRequest(const std::string& id) {
  UserId user = 0;
  {
    std::lock_guard<std::mutex> lock(sessions_mu_);
    auto it = request_owner_.find(id);
    if (it == request_owner_.end()) return Fail(404, "unknown request '" + id + "'");
    user = it->second;
    request_owner_.erase(it);
  }
  std::shared_ptr<Session> session = SessionFor(user);
  std::lock_guard<std::mutex> lock(session->mu);
  auto& p = session->persistent;
  p.erase(std::remove_if(p.begin(), p.end(),
                         [&id](const StoredRequest& r) { return r.id == id; }),
          p.end());
  if (session->one_time && session->one_time->id == id) session->one_time.reset();
  return Reply(200, Json{{"deleted", id}});
}

ServiceResponse Service::GetMetrics(const Query& query) {
  const UserId user = UserParam(query);
  std::shared_ptr<Session> session = SessionFor(user);
  std::lock_guard<std::mutex> lock(session->mu);
  auto ratio = [&session](const std::set<ItemId>& marked) {
    if (session->served.empty()) return 0.0;
    size_t n = 0;
    for (ItemId id : marked) n += session->served.count(id);
    return static_cast<double>(n) / static_cast<double>(session->served.size());
  };
  Json out;
  out["user_id"] = user;
  out["items_served"] = session->served.size();
  out["liked_ratio"] = ratio(session->liked);
  out["watched_ratio"] = ratio(session->watched);
  out["feeds_served"] = session->feeds_served;
  out["featurizer_calls"] = session->featurizer_calls;
  return Reply(200, out);
}

// --- HTTP adapter -----------------------------------------------------------

struct HttpServer::Impl {
  explicit Impl(Service& s) : service(s) {}

  void Configure(const ServeOptions& options) {
    auto handler = [this, cors = options.cors_origin](const httplib::Request& req,
                                                      httplib::Response& res) {
      if (!cors.empty()) {
        res.set_header("Access-Control-Allow-Origin", cors);
        res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
      }
      if (req.method == "OPTIONS") {
        res.status = 204;
        return;
      }
      Service::Query query(req.params.begin(), req.params.end());
      const ServiceResponse r = service.Handle(req.method, req.path, query, req.body);
      res.status = r.status;
      res.set_content(r.body, "application/json");
    };
    const std::string any = R"(/.*)";
    server.Get(any, handler);
    server.Post(any, handler);
    server.Delete(any, handler);
    server.Options(any, handler);
  }

  int Bind(const ServeOptions& options) {
    Configure(options);
    if (options.port == 0) {
      const int port = server.bind_to_any_port(options.host);
      if (port < 0) throw Error(ErrorCode::kIo, "cannot bind " + options.host);
      return port;
    }
    if (!server.bind_to_port(options.host, options.port)) {
      throw Error(ErrorCode::kIo,
                  "cannot bind " + options.host + ":" + std::to_string(options.port));
    }
    return options.port;
  }

  Service& service;
  httplib::Server server;
  std::thread thread;
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { Stop(); }

int HttpServer::Start(const ServeOptions& options) {
  const int port = impl_->Bind(options);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void HttpServer::Run(const ServeOptions& options) {
  impl_->Bind(options);
  impl_->server.listen_after_bind();
}

void HttpServer::Stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace steerrec
