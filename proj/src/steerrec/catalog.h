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

// Item catalog, interaction logs and the shared domain records.
//
// Ingestion understands MovieLens-shaped CSV (movies.csv / ratings.csv) plus
// an optional summaries.jsonl sidecar. A Catalog is immutable once built and
// safe to read from any number of threads.

#ifndef STEERREC_CATALOG_H_
#define STEERREC_CATALOG_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace steerrec {

using ItemId = int64_t;
using UserId = int64_t;

struct Item {
  ItemId id = 0;
  std::string title;
  std::string summary;
  std::set<std::string> genres;
  // Unset when no year could be parsed; such items only match decade-free
  // filters.
  std::optional<int> decade;

  bool operator==(const Item&) const = default;
};

struct RatingEvent {
  ItemId item_id = 0;
  double rating = 0.0;
  int64_t timestamp = 0;

  bool operator==(const RatingEvent&) const = default;
};

struct InteractionLog {
  UserId user_id = 0;
  // Sorted by timestamp (stable with respect to file order).
  std::vector<RatingEvent> events;

  int64_t LatestTimestamp() const {
    return events.empty() ? 0 : events.back().timestamp;
  }
};

struct FilterSpec {
  std::set<std::string> genres;  // conjunctive
  std::optional<int> decade;

  bool empty() const { return genres.empty() && !decade; }
  bool operator==(const FilterSpec&) const = default;
  std::string ToString() const;
};

struct Request {
  std::string id;
  std::string text;
  // One of the ten generation categories, or "user" for live requests.
  std::string category = "user";
  bool persistent = false;
  // Originating user for generated requests; 0 when none.
  UserId user_id = 0;
};

// Column names expected in the items CSV header. Columns may appear in any
// order; extra columns are ignored.
struct CsvDescriptor {
  std::string id_column = "movieId";
  std::string title_column = "title";
  std::string genres_column = "genres";
  // Optional explicit release year; when absent the year is parsed from a
  // trailing "(YYYY)" in the title.
  std::string year_column = "year";
  char genre_separator = '|';
};

struct CatalogOptions {
  CsvDescriptor descriptor;
  // Genres admitted to the vocabulary even if no item carries them.
  std::vector<std::string> extra_genres;
};

class Catalog {
 public:
  Catalog() = default;

  // Throws kDuplicate on a repeated id and kInvalidArgument when an item
  // violates the record invariants.
  static Catalog FromItems(std::vector<Item> items,
                           const std::vector<std::string>& extra_genres = {});

  // Throws kIo, kParse ("row N: ...") or kDuplicate.
  static Catalog Load(const std::string& items_path,
                      const CatalogOptions& options = {});
  static Catalog Parse(std::string_view csv_text,
                       const CatalogOptions& options = {});

  // Attaches summaries from JSONL lines {"item_id": .., "summary": ".."}.
  // Unknown ids are ignored; returns the number attached.
  size_t AttachSummaries(std::string_view jsonl_text);
  size_t AttachSummariesFile(const std::string& path);

  // Items in canonical order (ascending id).
  const std::vector<Item>& items() const { return items_; }
  size_t size() const { return items_.size(); }
  const std::set<std::string>& vocabulary() const { return vocabulary_; }

  bool Contains(ItemId id) const { return index_.count(id) > 0; }
  // Throws kNotFound.
  const Item& Get(ItemId id) const;
  // Position in canonical order; throws kNotFound.
  size_t IndexOf(ItemId id) const;
  std::vector<ItemId> Ids() const;

 private:
  void Reindex();

  std::vector<Item> items_;
  std::unordered_map<ItemId, size_t> index_;
  std::set<std::string> vocabulary_;
};

// Year -> decade, e.g. 1995 -> 1990.
int DecadeOf(int year);

// Year from a trailing "(YYYY)" in a title, tolerating trailing whitespace
// and ranges such as "(2006-2007)".
std::optional<int> ParseTitleYear(std::string_view title);

struct InteractionLoadResult {
  // One log per user, ordered by user id.
  std::vector<InteractionLog> logs;
  size_t dropped_unknown_items = 0;
  size_t clamped_ratings = 0;
  // Rows that could not be parsed, with their 1-based line number.
  std::vector<std::string> rejected_rows;
};

InteractionLoadResult LoadInteractions(const std::string& ratings_path,
                                       const Catalog& catalog);
InteractionLoadResult ParseInteractions(std::string_view csv_text,
                                        const Catalog& catalog);

// Ids whose genres include every genre of `spec` and whose decade equals the
// spec's decade when one is set. Result is in canonical order. Throws
// kInvalidArgument for genres outside the vocabulary.
std::vector<ItemId> ApplyFilter(const Catalog& catalog, const FilterSpec& spec);

// Index logs by user id.
std::map<UserId, const InteractionLog*> IndexLogs(
    const std::vector<InteractionLog>& logs);

}  // namespace steerrec

#endif  // STEERREC_CATALOG_H_
