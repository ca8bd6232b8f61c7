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

// Seeded synthetic movie world for offline runs: a catalog with summaries
// that mention content keywords, and a population of users whose ratings
// follow a persona that one template request describes.

#ifndef STEERREC_SYNTHETIC_WORLD_H_
#define STEERREC_SYNTHETIC_WORLD_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "steerrec/catalog.h"

namespace steerrec {

struct SyntheticWorldConfig {
  size_t n_items = 500;
  size_t n_users = 60;
  uint64_t seed = 7;
  // Liked and disliked ratings per user.
  size_t liked_per_user = 20;
  size_t disliked_per_user = 10;
  int64_t start_time = 1'000'000'000;
};

struct Persona {
  UserId user_id = 0;
  std::string genre;
  std::optional<int> decade;
  std::string keyword;  // empty when the persona has none
  // A request in template form that states the persona.
  std::string defining_request;
};

struct SyntheticWorld {
  Catalog catalog;
  std::vector<InteractionLog> logs;  // ordered by user id
  std::vector<Persona> personas;     // parallel to logs
};

// The twelve genre labels used by the synthetic catalog.
const std::vector<std::string>& SyntheticGenres();

SyntheticWorld MakeSyntheticWorld(const SyntheticWorldConfig& config = {});

// Writes movies.csv, ratings.csv, summaries.jsonl and personas.jsonl into
// `dir`, which must exist.
void SaveSyntheticWorld(const SyntheticWorld& world, const std::string& dir);

// Reads personas.jsonl.
std::vector<Persona> LoadPersonas(const std::string& path);

}  // namespace steerrec

#endif  // STEERREC_SYNTHETIC_WORLD_H_
