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

// Provider-agnostic LLM transport.
//
// LlmClient is the only surface the judge, request generator and
// reachability agent see. HttpLlmClient speaks the OpenAI-compatible chat
// completions protocol; ReplayLlmClient/RecordingLlmClient make every
// LLM-touching test hermetic; BoundedLlmClient adds an in-flight limit and
// exponential backoff on retryable failures.

#ifndef STEERREC_LLM_CLIENT_H_
#define STEERREC_LLM_CLIENT_H_

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <vector>

namespace steerrec {

struct TokenLogprob {
  std::string token;
  double logprob = 0.0;
};

struct LlmRequest {
  std::string system;
  std::string user;
  int max_tokens = 1;
  int top_logprobs = 20;
  double temperature = 0.0;

  // Stable key used by the record/replay layer.
  std::string Key() const;
};

struct LlmResponse {
  std::string text;
  // Top alternatives for the first generated token.
  std::vector<TokenLogprob> first_token_logprobs;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  // Throws Error(kTransient) for retryable transport failures and
  // Error(kProvider) for malformed or rejected responses.
  virtual LlmResponse Complete(const LlmRequest& request) = 0;
};

// Parses an OpenAI-compatible chat completion body. Throws kProvider with an
// excerpt of the payload when the shape is wrong.
LlmResponse ParseChatCompletion(const std::string& body);

struct HttpLlmConfig {
  // e.g. "https://api.openai.com"; the path below is appended.
  std::string base_url;
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_key;
  int timeout_seconds = 60;
};

class HttpLlmClient : public LlmClient {
 public:
  explicit HttpLlmClient(HttpLlmConfig config);
  LlmResponse Complete(const LlmRequest& request) override;

  // Request body sent to the provider; exposed for tests.
  std::string BuildBody(const LlmRequest& request) const;

 private:
  HttpLlmConfig config_;
};

// Serves responses recorded as JSONL lines {"key": .., "response": <raw
// provider body>}. Unknown requests throw kNotFound.
class ReplayLlmClient : public LlmClient {
 public:
  static std::unique_ptr<ReplayLlmClient> FromFile(const std::string& path);
  static std::unique_ptr<ReplayLlmClient> FromJsonl(const std::string& jsonl);

  LlmResponse Complete(const LlmRequest& request) override;
  size_t size() const { return bodies_.size(); }

 private:
  std::map<std::string, std::string> bodies_;
};

// Forwards to `inner`, appending every exchange to a JSONL fixture that
// ReplayLlmClient can serve later. Only raw bodies are recorded, so the
// inner client must expose them; HttpLlmClient does via the hook below.
class RecordingLlmClient : public LlmClient {
 public:
  using Transport = std::function<std::string(const LlmRequest&)>;

  RecordingLlmClient(Transport transport, std::string fixture_path);
  LlmResponse Complete(const LlmRequest& request) override;

 private:
  Transport transport_;
  std::string fixture_path_;
  std::mutex mu_;
};

// Raw-body transport for HttpLlmClient, for use with RecordingLlmClient.
RecordingLlmClient::Transport HttpTransport(HttpLlmConfig config);

struct RetryPolicy {
  int max_in_flight = 4;
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{200};
};

class BoundedLlmClient : public LlmClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  BoundedLlmClient(std::shared_ptr<LlmClient> inner, RetryPolicy policy,
                   Sleeper sleeper = nullptr);
  LlmResponse Complete(const LlmRequest& request) override;

 private:
  std::shared_ptr<LlmClient> inner_;
  RetryPolicy policy_;
  Sleeper sleeper_;
  std::counting_semaphore<> slots_;
};

}  // namespace steerrec

#endif  // STEERREC_LLM_CLIENT_H_
