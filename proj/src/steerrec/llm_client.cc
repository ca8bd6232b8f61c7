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

#include "steerrec/llm_client.h"

#include <cstdio>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "steerrec/error.h"
#include "steerrec/instrumentation.h"
#include "steerrec/text.h"

namespace steerrec {

namespace {

using nlohmann::json;

std::string Excerpt(const std::string& body) {
  constexpr size_t kMax = 200;
  return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

[[noreturn]] void Malformed(const std::string& what, const std::string& body) {
  throw Error(ErrorCode::kProvider,
              "malformed provider response (" + what + "): " + Excerpt(body));
}

}  // namespace

std::string LlmRequest::Key() const {
  std::string material = system + '\x1f' + user + '\x1f' +
                         std::to_string(max_tokens) + '\x1f' +
                         std::to_string(top_logprobs);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(Fnv1a64(material)));
  return buf;
}

LlmResponse ParseChatCompletion(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) Malformed("not a JSON object", body);
  if (j.contains("error")) {
    throw Error(ErrorCode::kProvider, "provider error: " + Excerpt(body));
  }
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
    Malformed("missing choices", body);
  }
  const json& choice = j["choices"][0];
  if (!choice.is_object()) Malformed("choice is not an object", body);

  LlmResponse out;
  if (choice.contains("message") && choice["message"].is_object()) {
    const json& content = choice["message"].value("content", json());
    if (content.is_string()) out.text = content.get<std::string>();
  } else if (choice.contains("text") && choice["text"].is_string()) {
    out.text = choice["text"].get<std::string>();
  }

  if (!choice.contains("logprobs") || choice["logprobs"].is_null()) return out;
  const json& lp = choice["logprobs"];
  if (!lp.is_object()) Malformed("logprobs is not an object", body);
  try {
    if (lp.contains("content") && lp["content"].is_array()) {
      // Chat format: content[0].top_logprobs = [{token, logprob}, ...]
      if (lp["content"].empty()) return out;
      const json& first = lp["content"][0];
      for (const json& alt : first.at("top_logprobs")) {
        out.first_token_logprobs.push_back(
            {alt.at("token").get<std::string>(), alt.at("logprob").get<double>()});
      }
    } else if (lp.contains("top_logprobs") && lp["top_logprobs"].is_array()) {
      // Legacy completions format: top_logprobs[0] = {token: logprob, ...}
      if (lp["top_logprobs"].empty()) return out;
      for (const auto& [token, value] : lp["top_logprobs"][0].items()) {
        out.first_token_logprobs.push_back({token, value.get<double>()});
      }
    } else {
      Malformed("unrecognized logprobs layout", body);
    }
  } catch (const json::exception& e) {
    Malformed(e.what(), body);
  }
  return out;
}

HttpLlmClient::HttpLlmClient(HttpLlmConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty() || config_.model.empty()) {
    throw Error(ErrorCode::kConfig, "LLM client needs a base URL and a model");
  }
}

std::string HttpLlmClient::BuildBody(const LlmRequest& request) const {
  json messages = json::array();
  if (!request.system.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system}});
  }
  messages.push_back({{"role", "user"}, {"content", request.user}});
  json body = {{"model", config_.model},
               {"messages", messages},
               {"max_tokens", request.max_tokens},
               {"temperature", request.temperature}};
  if (request.top_logprobs > 0) {
    body["logprobs"] = true;
    body["top_logprobs"] = request.top_logprobs;
  }
  return body.dump();
}

namespace {

std::string PostRaw(const HttpLlmConfig& config, const std::string& body) {
  Instrumentation::Get().CountLlmCall();
  httplib::Client cli(config.base_url);
  cli.set_connection_timeout(config.timeout_seconds, 0);
  cli.set_read_timeout(config.timeout_seconds, 0);
  httplib::Headers headers;
  if (!config.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config.api_key);
  }
  auto res = cli.Post(config.path, headers, body, "application/json");
  if (!res) {
    throw Error(ErrorCode::kTransient,
                "LLM transport failure: " + httplib::to_string(res.error()));
  }
  if (res->status == 429 || res->status >= 500) {
    throw Error(ErrorCode::kTransient,
                "LLM provider returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kProvider, "LLM provider returned HTTP " +
                                          std::to_string(res->status) + ": " +
                                          Excerpt(res->body));
  }
  return res->body;
}

}  // namespace

LlmResponse HttpLlmClient::Complete(const LlmRequest& request) {
  return ParseChatCompletion(PostRaw(config_, BuildBody(request)));
}

RecordingLlmClient::Transport HttpTransport(HttpLlmConfig config) {
  auto client = std::make_shared<HttpLlmClient>(config);
  return [client, config](const LlmRequest& request) {
    return PostRaw(config, client->BuildBody(request));
  };
}

std::unique_ptr<ReplayLlmClient> ReplayLlmClient::FromFile(const std::string& path) {
  return FromJsonl(ReadFile(path));
}

std::unique_ptr<ReplayLlmClient> ReplayLlmClient::FromJsonl(const std::string& jsonl) {
  auto client = std::unique_ptr<ReplayLlmClient>(new ReplayLlmClient());
  size_t line_no = 0;
  for (const std::string& line : SplitString(jsonl, '\n')) {
    ++line_no;
    if (Trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("key") || !j.contains("response")) {
      throw Error(ErrorCode::kParse,
                  "replay fixture line " + std::to_string(line_no) +
                      ": expected {key, response}");
    }
    const json& resp = j["response"];
    client->bodies_[j["key"].get<std::string>()] =
        resp.is_string() ? resp.get<std::string>() : resp.dump();
  }
  return client;
}

LlmResponse ReplayLlmClient::Complete(const LlmRequest& request) {
  Instrumentation::Get().CountLlmCall();
  auto it = bodies_.find(request.Key());
  if (it == bodies_.end()) {
    throw Error(ErrorCode::kNotFound,
                "no recorded exchange for request key " + request.Key());
  }
  return ParseChatCompletion(it->second);
}

RecordingLlmClient::RecordingLlmClient(Transport transport, std::string fixture_path)
    : transport_(std::move(transport)), fixture_path_(std::move(fixture_path)) {}

LlmResponse RecordingLlmClient::Complete(const LlmRequest& request) {
  std::string body = transport_(request);
  {
    std::lock_guard<std::mutex> lock(mu_);
    std::ofstream out(fixture_path_, std::ios::app);
    if (!out) throw Error(ErrorCode::kIo, "cannot append to " + fixture_path_);
    json line = {{"key", request.Key()}, {"response", body}};
    out << line.dump() << '\n';
  }
  return ParseChatCompletion(body);
}

BoundedLlmClient::BoundedLlmClient(std::shared_ptr<LlmClient> inner,
                                   RetryPolicy policy, Sleeper sleeper)
    : inner_(std::move(inner)),
      policy_(policy),
      sleeper_(sleeper ? std::move(sleeper)
                       : [](std::chrono::milliseconds d) {
                           std::this_thread::sleep_for(d);
                         }),
      slots_(std::max(1, policy.max_in_flight)) {}

LlmResponse BoundedLlmClient::Complete(const LlmRequest& request) {
  for (int attempt = 0;; ++attempt) {
    slots_.acquire();
    try {
      LlmResponse r = inner_->Complete(request);
      slots_.release();
      return r;
    } catch (const Error& e) {
      slots_.release();
      if (!e.retryable() || attempt + 1 >= policy_.max_attempts) throw;
    } catch (...) {
      slots_.release();
      throw;
    }
    sleeper_(policy_.base_delay * (1LL << attempt));
  }
}

}  // namespace steerrec
