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

#include "steerrec/reachability.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <set>
#include <thread>

#include "json.hpp"
#include "steerrec/error.h"
#include "steerrec/judge.h"
#include "steerrec/rng.h"
#include "steerrec/simgen.h"
#include "steerrec/text.h"

namespace steerrec {

namespace {

// Below this baseline distance the percent-closed ratio is meaningless.
constexpr double kZeroDistance = 1e-12;

std::vector<std::string> TopByCount(const std::map<std::string, int>& tally, size_t n) {
  std::vector<std::pair<std::string, int>> v(tally.begin(), tally.end());
  std::stable_sort(v.begin(), v.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (size_t i = 0; i < v.size() && i < n; ++i) out.push_back(v[i].first);
  return out;
}

std::string Fmt(double v, const char* spec = "%.3f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

nlohmann::ordered_json SimJson(const FeedSimilarity& s) {
  return {{"cosine", s.cosine}, {"distance", s.distance()}, {"overlap", s.overlap}};
}

nlohmann::ordered_json BinJson(const BinSummary& b) {
  return {{"n", b.n},
          {"min_baseline_distance", b.min_baseline},
          {"max_baseline_distance", b.max_baseline},
          {"mean_filters_only_distance", b.mean_filters_only_distance},
          {"mean_ctrl_rec_distance", b.mean_ctrl_distance},
          {"filters_only_percent_closed", b.filters_closed_mean},
          {"filters_only_percent_closed_se", b.filters_closed_se},
          {"ctrl_rec_percent_closed", b.ctrl_closed_mean},
          {"ctrl_rec_percent_closed_se", b.ctrl_closed_se},
          {"percent_remaining_cut", b.remaining_cut}};
}

void MeanAndSe(const std::vector<double>& v, double* mean, double* se) {
  *mean = 0.0;
  *se = 0.0;
  if (v.empty()) return;
  for (double x : v) *mean += x;
  *mean /= static_cast<double>(v.size());
  if (v.size() < 2) return;
  double ss = 0.0;
  for (double x : v) ss += (x - *mean) * (x - *mean);
  *se = std::sqrt(ss / static_cast<double>(v.size() - 1)) /
        std::sqrt(static_cast<double>(v.size()));
}

BinSummary Summarize(const std::vector<const TrialResult*>& trials) {
  BinSummary b;
  b.n = trials.size();
  if (trials.empty()) return b;
  std::vector<double> f_closed, c_closed;
  b.min_baseline = trials.front()->baseline.distance();
  b.max_baseline = b.min_baseline;
  for (const TrialResult* t : trials) {
    const double base = t->baseline.distance();
    b.min_baseline = std::min(b.min_baseline, base);
    b.max_baseline = std::max(b.max_baseline, base);
    b.mean_filters_only_distance += t->filters_only.distance();
    b.mean_ctrl_distance += t->ctrl.distance();
    f_closed.push_back(100.0 * (base - t->filters_only.distance()) / base);
    c_closed.push_back(100.0 * (base - t->ctrl.distance()) / base);
  }
  b.mean_filters_only_distance /= static_cast<double>(b.n);
  b.mean_ctrl_distance /= static_cast<double>(b.n);
  MeanAndSe(f_closed, &b.filters_closed_mean, &b.filters_closed_se);
  MeanAndSe(c_closed, &b.ctrl_closed_mean, &b.ctrl_closed_se);
  if (b.mean_filters_only_distance > 0) {
    b.remaining_cut = 100.0 * (b.mean_filters_only_distance - b.mean_ctrl_distance) /
                      b.mean_filters_only_distance;
  }
  return b;
}

std::string CsvQuote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

FeedSimilarity CompareFeeds(const std::vector<ItemId>& a, const std::vector<ItemId>& b,
                            const ItemFeatures& embeddings) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot compare an empty feed");
  }
  auto mean = [&embeddings](const std::vector<ItemId>& feed) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(embeddings.dim());
    for (ItemId id : feed) m += embeddings.Row(id);
    return Eigen::VectorXd(m / static_cast<double>(feed.size()));
  };
  const Eigen::VectorXd ma = mean(a);
  const Eigen::VectorXd mb = mean(b);
  FeedSimilarity s;
  const double na = ma.norm(), nb = mb.norm();
  s.cosine = (na > 0 && nb > 0) ? std::clamp(ma.dot(mb) / (na * nb), -1.0, 1.0) : 0.0;
  const std::set<ItemId> sa(a.begin(), a.end());
  size_t shared = 0;
  for (ItemId id : std::set<ItemId>(b.begin(), b.end())) shared += sa.count(id);
  s.overlap = static_cast<double>(shared) / static_cast<double>(std::max(a.size(), b.size()));
  return s;
}

FilterSearchResult GreedyFilterSearch(const InteractionLog* source,
                                      const std::vector<ItemId>& target_feed,
                                      const Recommender& recommender, size_t k) {
  const Catalog& catalog = recommender.catalog();
  std::map<std::string, int> genre_tally;
  std::map<std::string, int> decade_tally;  // keyed by zero-padded decade
  for (ItemId id : target_feed) {
    const Item& item = catalog.Get(id);
    for (const std::string& g : item.genres) ++genre_tally[g];
    if (item.decade) {
      char key[16];
      std::snprintf(key, sizeof(key), "%06d", *item.decade);
      ++decade_tally[key];
    }
  }
  const std::vector<std::string> top_genres = TopByCount(genre_tally, 4);
  std::vector<int> top_decades;
  for (const std::string& d : TopByCount(decade_tally, 3)) top_decades.push_back(std::stoi(d));

  std::vector<FilterSpec> specs;
  specs.emplace_back();
  for (int d : top_decades) {
    FilterSpec s;
    s.decade = d;
    specs.push_back(s);
  }
  FilterSpec nested;
  for (const std::string& g : top_genres) {
    nested.genres.insert(g);
    nested.decade.reset();
    specs.push_back(nested);
    for (int d : top_decades) {
      FilterSpec s = nested;
      s.decade = d;
      specs.push_back(s);
    }
  }

  FilterSearchResult best;
  bool have = false;
  for (const FilterSpec& spec : specs) {
    RecommendQuery q;
    q.log = source;
    q.filter = spec;
    q.k = k;
    const Feed feed = recommender.Recommend(q);
    if (feed.entries.empty()) continue;
    best.evaluated.push_back(spec);
    const std::vector<ItemId> ids = feed.ItemIds();
    const FeedSimilarity sim = CompareFeeds(ids, target_feed, recommender.item_features());
    if (!have || sim.cosine > best.similarity.cosine) {
      have = true;
      best.filter = spec;
      best.similarity = sim;
      best.feed = ids;
    }
  }
  if (!have) {
    throw Error(ErrorCode::kInvalidArgument, "no filter leaves any candidate for the source");
  }
  return best;
}

std::string RenderFeed(const std::vector<ItemId>& feed, const Catalog& catalog) {
  std::string out;
  for (ItemId id : feed) {
    const Item& item = catalog.Get(id);
    std::vector<std::string> g(item.genres.begin(), item.genres.end());
    out += "- " + item.title + " [" + Join(g, ", ") + "]\n";
  }
  return out;
}

std::string ScriptedProposer::Propose(const Observation& obs) const {
  auto it = scripts_.find(obs.target_id);
  if (it == scripts_.end() || it->second.empty()) {
    throw Error(ErrorCode::kNotFound,
                "no scripted requests for target user " + std::to_string(obs.target_id));
  }
  return it->second[static_cast<size_t>(obs.iteration) % it->second.size()];
}

std::map<UserId, std::vector<std::string>> PersonaScripts(
    const std::vector<Persona>& personas) {
  std::map<UserId, std::vector<std::string>> out;
  for (const Persona& p : personas) {
    TemplateSlots s;
    s.genre = p.genre;
    s.keyword = p.keyword;
    s.decade = p.decade.value_or(0);
    std::vector<std::string> script = {p.defining_request,
                                       InstantiateTemplate("show me {genre} movies", s)};
    if (!p.keyword.empty()) {
      script.push_back(InstantiateTemplate("{genre} movies with {keyword}", s));
    } else if (p.decade) {
      script.push_back(InstantiateTemplate("{genre} from the {decade}s", s));
    }
    out[p.user_id] = std::move(script);
  }
  return out;
}

DescriptiveProposer::DescriptiveProposer(std::shared_ptr<const Catalog> catalog,
                                         std::vector<std::string> keywords)
    : catalog_(std::move(catalog)), keywords_(std::move(keywords)) {
  if (!catalog_) throw Error(ErrorCode::kInvalidArgument, "descriptive proposer needs a catalog");
}

std::string DescriptiveProposer::Propose(const Observation& obs) const {
  std::map<std::string, int> genres, decades, keywords;
  for (ItemId id : obs.target_items) {
    const Item& item = catalog_->Get(id);
    for (const std::string& g : item.genres) ++genres[g];
    if (item.decade) ++decades[std::to_string(*item.decade)];
    const std::vector<std::string> terms = ItemTerms(item);
    for (const std::string& kw : keywords_) {
      if (std::binary_search(terms.begin(), terms.end(), Stem(kw))) ++keywords[kw];
    }
  }
  if (genres.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "target feed carries no genres to describe");
  }
  TemplateSlots s;
  s.genre = TopByCount(genres, 1)[0];
  const std::vector<std::string> d = TopByCount(decades, 1);
  const std::vector<std::string> kw = TopByCount(keywords, 1);
  s.decade = d.empty() ? 0 : std::stoi(d[0]);
  s.keyword = kw.empty() ? "" : kw[0];
  switch (obs.iteration % 3) {
    case 0:
      if (!kw.empty() && !d.empty()) {
        return InstantiateTemplate("{genre} from the {decade}s with {keyword}", s);
      }
      [[fallthrough]];
    case 1:
      if (!kw.empty()) return InstantiateTemplate("{genre} movies with {keyword}", s);
      [[fallthrough]];
    default:
      if (!d.empty()) return InstantiateTemplate("{genre} from the {decade}s", s);
      return InstantiateTemplate("show me {genre} movies", s);
  }
}

LlmProposer::LlmProposer(std::shared_ptr<LlmClient> client, PromptTemplate prompt)
    : client_(std::move(client)), prompt_(std::move(prompt)) {
  if (!client_) throw Error(ErrorCode::kConfig, "LLM proposer needs a client");
}

std::string LlmProposer::Propose(const Observation& obs) const {
  LlmRequest req = prompt_.Render({{"target_feed", obs.target_feed},
                                   {"filters", obs.filters},
                                   {"current_feed", obs.current_feed},
                                   {"history", obs.history.empty() ? "(none)" : obs.history}});
  req.max_tokens = 120;
  req.top_logprobs = 0;
  return ExtractStatement(client_->Complete(req).text);
}

TrialResult AgentSearch(const InteractionLog* source, UserId target_id,
                        const std::vector<ItemId>& target_feed, const FilterSpec& best_filter,
                        const RequestProposer& proposer, const Recommender& recommender,
                        const AgentConfig& config) {
  if (config.budget < 0) throw Error(ErrorCode::kConfig, "agent budget must be >= 0");
  const Catalog& catalog = recommender.catalog();
  std::vector<FilterSpec> atoms;
  for (const std::string& g : best_filter.genres) {
    FilterSpec a;
    a.genres.insert(g);
    atoms.push_back(a);
  }
  if (best_filter.decade) {
    FilterSpec a;
    a.decade = best_filter.decade;
    atoms.push_back(a);
  }

  TrialResult result;
  result.source_id = source ? source->user_id : 0;
  result.target_id = target_id;
  bool have = false;
  auto consider = [&](const FilterSpec& filter, const std::string& request,
                      const std::vector<ItemId>& feed) {
    const FeedSimilarity sim = CompareFeeds(feed, target_feed, recommender.item_features());
    if (!have || sim.cosine > result.ctrl.cosine) {
      have = true;
      result.ctrl = sim;
      result.ctrl_filter = filter;
      result.ctrl_request = request;
    }
    return sim;
  };
  const std::string target_text = RenderFeed(target_feed, catalog);

  for (uint32_t mask = 0; mask < (1u << atoms.size()); ++mask) {
    FilterSpec filter;
    for (size_t a = 0; a < atoms.size(); ++a) {
      if (!(mask & (1u << a))) continue;
      filter.genres.insert(atoms[a].genres.begin(), atoms[a].genres.end());
      if (atoms[a].decade) filter.decade = atoms[a].decade;
    }
    RecommendQuery q;
    q.log = source;
    q.filter = filter;
    q.k = config.k;
    q.blend = config.blend;
    const Feed start = recommender.Recommend(q);
    if (start.entries.empty()) {
      result.tries.push_back({filter, -1, "", 0.0, "no candidates"});
      continue;
    }
    std::vector<ItemId> current = start.ItemIds();
    result.tries.push_back({filter, -1, "", consider(filter, "", current).cosine, ""});

    std::string history;
    for (int it = 0; it < config.budget; ++it) {
      Observation obs;
      obs.source_id = result.source_id;
      obs.target_id = target_id;
      obs.iteration = it;
      obs.target_feed = target_text;
      obs.filters = filter.ToString();
      obs.current_feed = RenderFeed(current, catalog);
      obs.history = history;
      obs.target_items = target_feed;
      obs.current_items = current;
      TryRecord rec;
      rec.filter = filter;
      rec.iteration = it;
      try {
        rec.request = proposer.Propose(obs);
        q.request = rec.request;
        const Feed feed = recommender.Recommend(q);
        if (feed.entries.empty()) throw Error(ErrorCode::kInvalidArgument, "empty feed");
        current = feed.ItemIds();
        rec.cosine = consider(filter, rec.request, current).cosine;
        history += rec.request + " -> " + Fmt(rec.cosine) + "\n";
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
      result.tries.push_back(std::move(rec));
    }
  }
  if (!have) throw Error(ErrorCode::kInvalidArgument, "no starting filter yields a feed");
  return result;
}

ExperimentReport RunExperiment(const std::vector<InteractionLog>& logs,
                               const Recommender& recommender,
                               const RequestProposer& proposer,
                               const ExperimentConfig& config) {
  if (logs.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "reachability needs at least two users");
  }
  Rng rng(config.seed);
  std::vector<std::pair<size_t, size_t>> pairs;
  for (size_t t = 0; t < config.n_trials; ++t) {
    const size_t s = rng.Below(logs.size());
    size_t g = rng.Below(logs.size() - 1);
    if (g >= s) ++g;
    pairs.emplace_back(s, g);
  }

  ExperimentReport report;
  report.proposer = proposer.name();
  report.seed = config.seed;
  report.trials.resize(pairs.size());
  auto run_trial = [&](size_t t) {
    const InteractionLog& source = logs[pairs[t].first];
    const InteractionLog& target = logs[pairs[t].second];
    TrialResult r;
    try {
      RecommendQuery tq;
      tq.log = &target;
      tq.k = config.agent.k;
      const std::vector<ItemId> target_feed = recommender.Recommend(tq).ItemIds();
      RecommendQuery sq = tq;
      sq.log = &source;
      const std::vector<ItemId> source_feed = recommender.Recommend(sq).ItemIds();
      if (target_feed.empty() || source_feed.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "empty engagement feed");
      }
      const FeedSimilarity baseline =
          CompareFeeds(source_feed, target_feed, recommender.item_features());
      const FilterSearchResult greedy =
          GreedyFilterSearch(&source, target_feed, recommender, config.agent.k);
      r = AgentSearch(&source, target.user_id, target_feed, greedy.filter, proposer,
                      recommender, config.agent);
      r.baseline = baseline;
      r.filters_only_filter = greedy.filter;
      r.filters_only = greedy.similarity;
    } catch (const std::exception& e) {
      r = TrialResult{};
      r.error = e.what();
    }
    r.trial = t;
    r.source_id = source.user_id;
    r.target_id = target.user_id;
    report.trials[t] = std::move(r);
  };

  if (config.max_concurrency <= 1) {
    for (size_t t = 0; t < pairs.size(); ++t) run_trial(t);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::jthread> workers;
    for (int w = 0; w < config.max_concurrency; ++w) {
      workers.emplace_back([&] {
        for (size_t t = next++; t < pairs.size(); t = next++) run_trial(t);
      });
    }
  }

  std::vector<const TrialResult*> included;
  for (const TrialResult& t : report.trials) {
    if (!t.error.empty()) {
      ++report.failed;
    } else if (t.baseline.distance() <= kZeroDistance) {
      ++report.zero_distance;
    } else {
      included.push_back(&t);
    }
  }
  std::stable_sort(included.begin(), included.end(),
                   [](const TrialResult* a, const TrialResult* b) {
                     return a->baseline.distance() < b->baseline.distance();
                   });
  std::vector<std::vector<const TrialResult*>> bins(5);
  for (size_t i = 0; i < included.size(); ++i) {
    bins[i * 5 / included.size()].push_back(included[i]);
  }
  for (const auto& bin : bins) report.bins.push_back(Summarize(bin));
  report.overall = Summarize(included);
  return report;
}

std::string ExperimentReport::ToJson() const {
  nlohmann::ordered_json j;
  j["proposer"] = proposer;
  j["seed"] = seed;
  j["observation_format"] = kObservationFormat;
  j["n_trials"] = trials.size();
  j["failed_trials"] = failed;
  j["zero_distance_trials"] = zero_distance;
  j["overall"] = BinJson(overall);
  nlohmann::ordered_json bj = nlohmann::ordered_json::array();
  for (const BinSummary& b : bins) bj.push_back(BinJson(b));
  j["quintiles"] = bj;
  nlohmann::ordered_json tj = nlohmann::ordered_json::array();
  for (const TrialResult& t : trials) {
    nlohmann::ordered_json row;
    row["trial"] = t.trial;
    row["source_id"] = t.source_id;
    row["target_id"] = t.target_id;
    if (!t.error.empty()) {
      row["error"] = t.error;
      tj.push_back(row);
      continue;
    }
    row["baseline"] = SimJson(t.baseline);
    row["filters_only"] = {{"filter", t.filters_only_filter.ToString()},
                           {"similarity", SimJson(t.filters_only)}};
    row["ctrl_rec"] = {{"filter", t.ctrl_filter.ToString()},
                       {"request", t.ctrl_request},
                       {"similarity", SimJson(t.ctrl)}};
    nlohmann::ordered_json tries = nlohmann::ordered_json::array();
    for (const TryRecord& r : t.tries) {
      nlohmann::ordered_json x;
      x["filter"] = r.filter.ToString();
      x["iteration"] = r.iteration;
      x["request"] = r.request;
      x["cosine"] = r.cosine;
      if (!r.error.empty()) x["error"] = r.error;
      tries.push_back(x);
    }
    row["tries"] = tries;
    tj.push_back(row);
  }
  j["trials"] = tj;
  return j.dump(2) + "\n";
}

std::string ExperimentReport::ToCsv() const {
  std::string out =
      "trial,source_id,target_id,baseline_distance,baseline_overlap,filters_only_filter,"
      "filters_only_distance,filters_only_overlap,ctrl_filter,ctrl_request,ctrl_distance,"
      "ctrl_overlap,error\n";
  auto num = [](double v) { return Fmt(v, "%.17g"); };
  for (const TrialResult& t : trials) {
    out += std::to_string(t.trial) + "," + std::to_string(t.source_id) + "," +
           std::to_string(t.target_id) + ",";
    if (!t.error.empty()) {
      out += ",,,,,,,,," + CsvQuote(t.error) + "\n";
      continue;
    }
    out += num(t.baseline.distance()) + "," + num(t.baseline.overlap) + "," +
           CsvQuote(t.filters_only_filter.ToString()) + "," + num(t.filters_only.distance()) +
           "," + num(t.filters_only.overlap) + "," + CsvQuote(t.ctrl_filter.ToString()) + "," +
           CsvQuote(t.ctrl_request) + "," + num(t.ctrl.distance()) + "," +
           num(t.ctrl.overlap) + ",\n";
  }
  return out;
}

}  // namespace steerrec
