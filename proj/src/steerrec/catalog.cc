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

#include "steerrec/catalog.h"

#include <algorithm>
#include <charconv>

#include "json.hpp"
#include "steerrec/error.h"
#include "steerrec/text.h"

namespace steerrec {

namespace {

constexpr std::string_view kNoGenres = "(no genres listed)";

template <typename T>
std::optional<T> ParseNumber(std::string_view s) {
  s = Trim(s);
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

// from_chars for double is available in libstdc++ 11, but be explicit about
// the accepted grammar: plain decimal, no hex, no inf/nan.
std::optional<double> ParseDouble(std::string_view s) {
  s = Trim(s);
  if (s.empty()) return std::nullopt;
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || c == '.' || c == '-' || c == '+' ||
          c == 'e' || c == 'E')) {
      return std::nullopt;
    }
  }
  return ParseNumber<double>(s);
}

struct HeaderMap {
  std::unordered_map<std::string, size_t> columns;

  std::optional<size_t> Find(const std::string& name) const {
    auto it = columns.find(name);
    if (it == columns.end()) return std::nullopt;
    return it->second;
  }
};

HeaderMap ParseHeader(std::string_view line) {
  auto fields = SplitCsvRow(line);
  if (!fields) throw Error(ErrorCode::kParse, "row 1: unterminated quote");
  HeaderMap h;
  for (size_t i = 0; i < fields->size(); ++i) {
    std::string name((Trim((*fields)[i])));
    // Tolerate a UTF-8 BOM on the first column.
    if (i == 0 && name.starts_with("\xEF\xBB\xBF")) name.erase(0, 3);
    h.columns.emplace(std::move(name), i);
  }
  return h;
}

// Calls fn(line_number, line) for each non-empty line after the header.
template <typename Fn>
void ForEachDataLine(std::string_view text, Fn&& fn) {
  size_t line_no = 1;
  size_t start = text.find('\n');
  if (start == std::string_view::npos) return;
  ++start;
  while (start < text.size()) {
    ++line_no;
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!Trim(line).empty()) fn(line_no, line);
    start = end + 1;
  }
}

std::string_view FirstLine(std::string_view text) {
  size_t end = text.find('\n');
  return end == std::string_view::npos ? text : text.substr(0, end);
}

[[noreturn]] void RowError(size_t row, const std::string& what) {
  throw Error(ErrorCode::kParse, "row " + std::to_string(row) + ": " + what);
}

}  // namespace

std::string FilterSpec::ToString() const {
  std::vector<std::string> parts(genres.begin(), genres.end());
  if (decade) parts.push_back(std::to_string(*decade) + "s");
  return parts.empty() ? "{}" : Join(parts, "+");
}

int DecadeOf(int year) { return year - (((year % 10) + 10) % 10); }

std::optional<int> ParseTitleYear(std::string_view title) {
  title = Trim(title);
  if (title.empty() || title.back() != ')') return std::nullopt;
  size_t open = title.rfind('(');
  if (open == std::string_view::npos) return std::nullopt;
  std::string_view inner = title.substr(open + 1, title.size() - open - 2);
  if (inner.size() < 4) return std::nullopt;
  auto year = ParseNumber<int>(inner.substr(0, 4));
  if (!year || *year < 1000) return std::nullopt;
  // Anything after the first four digits must be a range suffix.
  if (inner.size() > 4 && inner[4] != '-' && static_cast<unsigned char>(inner[4]) < 0x80) {
    return std::nullopt;
  }
  return year;
}

Catalog Catalog::FromItems(std::vector<Item> items,
                           const std::vector<std::string>& extra_genres) {
  Catalog c;
  c.items_ = std::move(items);
  std::sort(c.items_.begin(), c.items_.end(),
            [](const Item& a, const Item& b) { return a.id < b.id; });
  for (size_t i = 1; i < c.items_.size(); ++i) {
    if (c.items_[i].id == c.items_[i - 1].id) {
      throw Error(ErrorCode::kDuplicate,
                  "duplicate item_id " + std::to_string(c.items_[i].id));
    }
  }
  for (const Item& item : c.items_) {
    if (item.id < 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "item_id must be >= 1, got " + std::to_string(item.id));
    }
    if (item.decade && *item.decade % 10 != 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "item " + std::to_string(item.id) + " has decade " +
                      std::to_string(*item.decade));
    }
    c.vocabulary_.insert(item.genres.begin(), item.genres.end());
  }
  c.vocabulary_.insert(extra_genres.begin(), extra_genres.end());
  c.Reindex();
  return c;
}

Catalog Catalog::Load(const std::string& items_path,
                      const CatalogOptions& options) {
  return Parse(ReadFile(items_path), options);
}

Catalog Catalog::Parse(std::string_view csv_text, const CatalogOptions& options) {
  const CsvDescriptor& d = options.descriptor;
  if (Trim(csv_text).empty()) {
    throw Error(ErrorCode::kParse, "row 1: missing header");
  }
  HeaderMap header = ParseHeader(FirstLine(csv_text));
  auto id_col = header.Find(d.id_column);
  auto title_col = header.Find(d.title_column);
  auto genres_col = header.Find(d.genres_column);
  auto year_col = header.Find(d.year_column);
  if (!id_col || !title_col || !genres_col) {
    throw Error(ErrorCode::kParse, "row 1: header must contain " + d.id_column +
                                       "," + d.title_column + "," +
                                       d.genres_column);
  }
  size_t needed = std::max({*id_col, *title_col, *genres_col}) + 1;

  std::vector<Item> items;
  std::unordered_map<ItemId, size_t> seen;
  ForEachDataLine(csv_text, [&](size_t row, std::string_view line) {
    auto fields = SplitCsvRow(line);
    if (!fields) RowError(row, "unterminated quote");
    if (fields->size() < needed) {
      RowError(row, "expected at least " + std::to_string(needed) +
                        " fields, got " + std::to_string(fields->size()));
    }
    auto id = ParseNumber<ItemId>((*fields)[*id_col]);
    if (!id || *id < 1) RowError(row, "bad item id '" + (*fields)[*id_col] + "'");
    if (!seen.emplace(*id, row).second) {
      throw Error(ErrorCode::kDuplicate,
                  "duplicate item_id " + std::to_string(*id) + " at row " +
                      std::to_string(row));
    }
    Item item;
    item.id = *id;
    item.title = std::string(Trim((*fields)[*title_col]));
    std::string_view genres = Trim((*fields)[*genres_col]);
    if (!genres.empty() && genres != kNoGenres) {
      for (const std::string& g : SplitString(genres, d.genre_separator)) {
        std::string_view label = Trim(g);
        if (!label.empty()) item.genres.emplace(label);
      }
    }
    std::optional<int> year;
    if (year_col && *year_col < fields->size() &&
        !Trim((*fields)[*year_col]).empty()) {
      year = ParseNumber<int>((*fields)[*year_col]);
      if (!year) RowError(row, "bad year '" + (*fields)[*year_col] + "'");
    } else {
      year = ParseTitleYear(item.title);
    }
    if (year) item.decade = DecadeOf(*year);
    items.push_back(std::move(item));
  });
  return FromItems(std::move(items), options.extra_genres);
}

size_t Catalog::AttachSummaries(std::string_view jsonl_text) {
  size_t attached = 0;
  size_t line_no = 0;
  for (const std::string& line : SplitString(jsonl_text, '\n')) {
    ++line_no;
    if (Trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("item_id") ||
        !j.contains("summary") || !j["item_id"].is_number_integer() ||
        !j["summary"].is_string()) {
      throw Error(ErrorCode::kParse,
                  "summaries line " + std::to_string(line_no) +
                      ": expected {item_id, summary}");
    }
    auto it = index_.find(j["item_id"].get<ItemId>());
    if (it == index_.end()) continue;
    items_[it->second].summary = j["summary"].get<std::string>();
    ++attached;
  }
  return attached;
}

size_t Catalog::AttachSummariesFile(const std::string& path) {
  return AttachSummaries(ReadFile(path));
}

const Item& Catalog::Get(ItemId id) const { return items_[IndexOf(id)]; }

size_t Catalog::IndexOf(ItemId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw Error(ErrorCode::kNotFound, "unknown item " + std::to_string(id));
  }
  return it->second;
}

std::vector<ItemId> Catalog::Ids() const {
  std::vector<ItemId> ids;
  ids.reserve(items_.size());
  for (const Item& item : items_) ids.push_back(item.id);
  return ids;
}

void Catalog::Reindex() {
  index_.clear();
  index_.reserve(items_.size());
  for (size_t i = 0; i < items_.size(); ++i) index_.emplace(items_[i].id, i);
}

InteractionLoadResult LoadInteractions(const std::string& ratings_path,
                                       const Catalog& catalog) {
  return ParseInteractions(ReadFile(ratings_path), catalog);
}

InteractionLoadResult ParseInteractions(std::string_view csv_text,
                                        const Catalog& catalog) {
  InteractionLoadResult result;
  if (Trim(csv_text).empty()) return result;
  HeaderMap header = ParseHeader(FirstLine(csv_text));
  auto user_col = header.Find("userId");
  auto item_col = header.Find("movieId");
  auto rating_col = header.Find("rating");
  auto ts_col = header.Find("timestamp");
  if (!user_col || !item_col || !rating_col || !ts_col) {
    throw Error(ErrorCode::kParse,
                "row 1: header must contain userId,movieId,rating,timestamp");
  }
  const size_t needed = std::max({*user_col, *item_col, *rating_col, *ts_col}) + 1;

  std::map<UserId, InteractionLog> by_user;
  ForEachDataLine(csv_text, [&](size_t row, std::string_view line) {
    auto reject = [&](const std::string& why) {
      result.rejected_rows.push_back("row " + std::to_string(row) + ": " + why);
    };
    auto fields = SplitCsvRow(line);
    if (!fields || fields->size() < needed) return reject("malformed record");
    auto user = ParseNumber<UserId>((*fields)[*user_col]);
    auto item = ParseNumber<ItemId>((*fields)[*item_col]);
    auto rating = ParseDouble((*fields)[*rating_col]);
    auto ts = ParseNumber<int64_t>((*fields)[*ts_col]);
    if (!user) return reject("bad userId '" + (*fields)[*user_col] + "'");
    if (!item) return reject("bad movieId '" + (*fields)[*item_col] + "'");
    if (!rating) return reject("bad rating '" + (*fields)[*rating_col] + "'");
    if (!ts) return reject("unparseable timestamp '" + (*fields)[*ts_col] + "'");
    if (!catalog.Contains(*item)) {
      ++result.dropped_unknown_items;
      return;
    }
    double r = *rating;
    if (r < 0.5 || r > 5.0) {
      r = std::clamp(r, 0.5, 5.0);
      ++result.clamped_ratings;
    }
    InteractionLog& log = by_user[*user];
    log.user_id = *user;
    log.events.push_back({*item, r, *ts});
  });
  for (auto& [user, log] : by_user) {
    std::stable_sort(log.events.begin(), log.events.end(),
                     [](const RatingEvent& a, const RatingEvent& b) {
                       return a.timestamp < b.timestamp;
                     });
    result.logs.push_back(std::move(log));
  }
  return result;
}

std::vector<ItemId> ApplyFilter(const Catalog& catalog, const FilterSpec& spec) {
  for (const std::string& g : spec.genres) {
    if (!catalog.vocabulary().count(g)) {
      throw Error(ErrorCode::kInvalidArgument, "unknown genre '" + g + "'");
    }
  }
  std::vector<ItemId> out;
  for (const Item& item : catalog.items()) {
    if (spec.decade && item.decade != spec.decade) continue;
    if (!std::includes(item.genres.begin(), item.genres.end(),
                       spec.genres.begin(), spec.genres.end())) {
      continue;
    }
    out.push_back(item.id);
  }
  return out;
}

std::map<UserId, const InteractionLog*> IndexLogs(
    const std::vector<InteractionLog>& logs) {
  std::map<UserId, const InteractionLog*> out;
  for (const InteractionLog& log : logs) out.emplace(log.user_id, &log);
  return out;
}

}  // namespace steerrec
