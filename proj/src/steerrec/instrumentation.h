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

#ifndef STEERREC_INSTRUMENTATION_H_
#define STEERREC_INSTRUMENTATION_H_

#include <atomic>
#include <cstdint>

namespace steerrec {

struct CallCounts {
  uint64_t request_encodings = 0;
  uint64_t item_encodings = 0;
  uint64_t judge_calls = 0;
  uint64_t llm_calls = 0;

  CallCounts operator-(const CallCounts& o) const {
    return {request_encodings - o.request_encodings,
            item_encodings - o.item_encodings, judge_calls - o.judge_calls,
            llm_calls - o.llm_calls};
  }
};

// Process-wide call accounting. Counters only grow; callers diff snapshots.
class Instrumentation {
 public:
  static Instrumentation& Get();

  void CountRequestEncoding() { request_encodings_.fetch_add(1, kOrder); }
  void CountItemEncodings(uint64_t n) { item_encodings_.fetch_add(n, kOrder); }
  void CountJudgeCall() { judge_calls_.fetch_add(1, kOrder); }
  void CountLlmCall() { llm_calls_.fetch_add(1, kOrder); }

  CallCounts Snapshot() const {
    return {request_encodings_.load(kOrder), item_encodings_.load(kOrder),
            judge_calls_.load(kOrder), llm_calls_.load(kOrder)};
  }

 private:
  static constexpr auto kOrder = std::memory_order_relaxed;
  std::atomic<uint64_t> request_encodings_{0};
  std::atomic<uint64_t> item_encodings_{0};
  std::atomic<uint64_t> judge_calls_{0};
  std::atomic<uint64_t> llm_calls_{0};
};

inline Instrumentation& Instrumentation::Get() {
  static Instrumentation instance;
  return instance;
}

}  // namespace steerrec

#endif  // STEERREC_INSTRUMENTATION_H_
