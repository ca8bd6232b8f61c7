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

#include "steerrec/synthetic_world.h"

#include <algorithm>
#include <cstdio>
#include <set>

#include "json.hpp"
#include "steerrec/error.h"
#include "steerrec/judge.h"
#include "steerrec/rng.h"
#include "steerrec/simgen.h"
#include "steerrec/text.h"

namespace steerrec {

namespace {

// Title and summary words avoid genre names and content keywords so that
// only the intended slots carry signal.
const std::vector<std::string> kTitleAdjectives = {
    "Silent",  "Crimson", "Broken",   "Golden", "Hidden",  "Last",
    "Distant", "Midnight", "Electric", "Burning", "Quiet",  "Wild",
    "Paper",   "Northern", "Glass",    "Iron",    "Velvet", "Hollow"};
const std::vector<std::string> kTitleNouns = {
    "Harbor", "Echo",   "Garden", "Mirror", "Road",    "Letter",
    "Summer", "Valley", "Signal", "Tower",  "River",   "Crown",
    "Lantern", "Orchard", "Bridge", "Compass", "Meadow", "Station"};
const std::vector<std::string> kSummaryOpeners = {
    "A sweeping tale", "An intimate story", "A brisk yarn",
    "A sprawling saga", "A tender portrait", "A breathless chase"};

template <typename T>
const T& Pick(Rng& rng, const std::vector<T>& v) {
  return v[rng.Below(v.size())];
}

std::string PersonaRequest(const Persona& p) {
  TemplateSlots s;
  s.genre = p.genre;
  s.decade = p.decade.value_or(0);
  s.keyword = p.keyword;
  if (p.decade && !p.keyword.empty()) {
    return InstantiateTemplate("{genre} films featuring {keyword} from the {decade}s", s);
  }
  if (!p.keyword.empty()) return InstantiateTemplate("a {genre} movie about {keyword}", s);
  if (p.decade) {
    return InstantiateTemplate("I want to explore classic {genre} cinema from the {decade}s",
                               s);
  }
  return InstantiateTemplate("show me {genre} movies", s);
}

size_t CountMatches(const Catalog& catalog, const Persona& p) {
  size_t n = 0;
  const std::string stem = p.keyword.empty() ? "" : Stem(p.keyword);
  for (const Item& item : catalog.items()) {
    if (!item.genres.count(p.genre)) continue;
    if (p.decade && item.decade != p.decade) continue;
    if (!stem.empty()) {
      const std::vector<std::string> terms = ItemTerms(item);
      if (!std::binary_search(terms.begin(), terms.end(), stem)) continue;
    }
    ++n;
  }
  return n;
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

const std::vector<std::string>& SyntheticGenres() {
  static const std::vector<std::string> kGenres = {
      "Action", "Adventure", "Animation", "Children", "Comedy",  "Crime",
      "Drama",  "Fantasy",   "Horror",    "Romance",  "Sci-Fi", "Thriller"};
  return kGenres;
}

SyntheticWorld MakeSyntheticWorld(const SyntheticWorldConfig& config) {
  if (config.n_items < 1 || config.n_users < 1) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic world needs items and users");
  }
  Rng rng(config.seed);
  const std::vector<std::string>& genres = SyntheticGenres();
  const std::vector<std::string> terms = RuleLexicon::DefaultTerms();

  std::vector<Item> items;
  for (size_t i = 0; i < config.n_items; ++i) {
    Item item;
    item.id = static_cast<ItemId>(i + 1);
    const int year = 1950 + static_cast<int>(rng.Below(70));
    item.title = Pick(rng, kTitleAdjectives) + " " + Pick(rng, kTitleNouns) + " (" +
                 std::to_string(year) + ")";
    item.decade = DecadeOf(year);
    const size_t n_genres = 1 + rng.Below(3);
    for (const std::string& g : rng.Sample(genres, n_genres)) item.genres.insert(g);
    const std::vector<std::string> mine = rng.Sample(terms, 1 + rng.Below(2));
    item.summary = Pick(rng, kSummaryOpeners) + " of " + Join(mine, " and ") + ".";
    items.push_back(std::move(item));
  }
  SyntheticWorld world;
  world.catalog = Catalog::FromItems(std::move(items));
  const Catalog& catalog = world.catalog;
  const RuleLexicon lexicon = RuleLexicon::ForCatalog(catalog);

  std::vector<int> decades;
  for (const Item& item : catalog.items()) decades.push_back(*item.decade);
  std::sort(decades.begin(), decades.end());
  decades.erase(std::unique(decades.begin(), decades.end()), decades.end());

  for (size_t u = 0; u < config.n_users; ++u) {
    Persona p;
    p.user_id = static_cast<UserId>(u + 1);
    p.genre = genres[u % genres.size()];
    if (rng.Below(2) == 0) p.decade = Pick(rng, decades);
    if (rng.Below(3) != 0) {
      // Keywords carried by at least one item of the persona's genre.
      std::vector<std::string> options;
      for (const std::string& t : terms) {
        Persona probe = p;
        probe.keyword = t;
        if (CountMatches(catalog, probe) > 0) options.push_back(t);
      }
      if (!options.empty()) p.keyword = Pick(rng, options);
    }
    if (CountMatches(catalog, p) < 3) p.decade.reset();
    if (CountMatches(catalog, p) < 3) p.keyword.clear();
    p.defining_request = PersonaRequest(p);

    // Rank items by how well they fit the persona; random order among ties.
    const SyntheticRules rules = CompileRules(p.defining_request, lexicon);
    std::vector<size_t> order(catalog.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.Shuffle(order);
    std::vector<double> fit(catalog.size());
    for (size_t i = 0; i < catalog.size(); ++i) {
      fit[i] = JudgeSynthetic(catalog.items()[i], rules).normalized;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&fit](size_t a, size_t b) { return fit[a] > fit[b]; });
    const size_t liked = std::min(config.liked_per_user, order.size());
    std::vector<size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(liked), order.end());
    std::vector<size_t> disliked;
    for (size_t idx : rest) {
      if (fit[idx] < 0.5) disliked.push_back(idx);
    }
    disliked = rng.Sample(disliked, config.disliked_per_user);

    InteractionLog log;
    log.user_id = p.user_id;
    for (size_t k = 0; k < liked; ++k) {
      log.events.push_back({catalog.items()[order[k]].id,
                            4.0 + 0.5 * static_cast<double>(rng.Below(3)), 0});
    }
    for (size_t idx : disliked) {
      log.events.push_back({catalog.items()[idx].id,
                            1.0 + 0.5 * static_cast<double>(rng.Below(5)), 0});
    }
    rng.Shuffle(log.events);
    int64_t t = config.start_time + static_cast<int64_t>(rng.Below(86'400));
    for (RatingEvent& e : log.events) {
      t += 3'600 + static_cast<int64_t>(rng.Below(2 * 86'400));
      e.timestamp = t;
    }
    world.logs.push_back(std::move(log));
    world.personas.push_back(std::move(p));
  }
  return world;
}

void SaveSyntheticWorld(const SyntheticWorld& world, const std::string& dir) {
  std::string movies = "movieId,title,genres\n";
  std::string summaries;
  for (const Item& item : world.catalog.items()) {
    std::vector<std::string> g(item.genres.begin(), item.genres.end());
    movies += std::to_string(item.id) + "," + CsvField(item.title) + "," +
              CsvField(Join(g, "|")) + "\n";
    nlohmann::ordered_json j;
    j["item_id"] = item.id;
    j["summary"] = item.summary;
    summaries += j.dump() + "\n";
  }
  std::string ratings = "userId,movieId,rating,timestamp\n";
  for (const InteractionLog& log : world.logs) {
    for (const RatingEvent& e : log.events) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%lld,%lld,%.1f,%lld\n",
                    static_cast<long long>(log.user_id), static_cast<long long>(e.item_id),
                    e.rating, static_cast<long long>(e.timestamp));
      ratings += buf;
    }
  }
  std::string personas;
  for (const Persona& p : world.personas) {
    nlohmann::ordered_json j;
    j["user_id"] = p.user_id;
    j["genre"] = p.genre;
    j["decade"] = p.decade ? nlohmann::ordered_json(*p.decade) : nullptr;
    j["keyword"] = p.keyword;
    j["defining_request"] = p.defining_request;
    personas += j.dump() + "\n";
  }
  WriteFile(dir + "/movies.csv", movies);
  WriteFile(dir + "/ratings.csv", ratings);
  WriteFile(dir + "/summaries.jsonl", summaries);
  WriteFile(dir + "/personas.jsonl", personas);
}

std::vector<Persona> LoadPersonas(const std::string& path) {
  std::vector<Persona> out;
  size_t line_no = 0;
  for (const std::string& line : SplitString(ReadFile(path), '\n')) {
    ++line_no;
    if (Trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    try {
      if (j.is_discarded()) throw Error(ErrorCode::kParse, "not JSON");
      Persona p;
      p.user_id = j.at("user_id").get<UserId>();
      p.genre = j.at("genre").get<std::string>();
      if (!j.at("decade").is_null()) p.decade = j.at("decade").get<int>();
      p.keyword = j.at("keyword").get<std::string>();
      p.defining_request = j.at("defining_request").get<std::string>();
      out.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kParse,
                  path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace steerrec
