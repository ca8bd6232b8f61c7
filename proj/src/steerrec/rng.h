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

#ifndef STEERREC_RNG_H_
#define STEERREC_RNG_H_

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace steerrec {

// std::mt19937_64 output is fixed by the standard, but the <random>
// distributions are not. Seeded artifacts go through these helpers so they
// are byte-identical regardless of the standard library in use.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t Next() { return engine_(); }

  // Uniform in [0, n). n must be > 0.
  uint64_t Below(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Uniform in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  template <typename T>
  void Shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[Below(i)]);
    }
  }

  // First `count` elements of a seeded Fisher-Yates pass: a uniform sample
  // without replacement.
  template <typename T>
  std::vector<T> Sample(std::vector<T> pool, size_t count) {
    if (count > pool.size()) count = pool.size();
    for (size_t i = 0; i < count; ++i) {
      std::swap(pool[i], pool[i + Below(pool.size() - i)]);
    }
    pool.resize(count);
    return pool;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace steerrec

#endif  // STEERREC_RNG_H_
