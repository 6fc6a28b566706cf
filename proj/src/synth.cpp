// Copyright 2026 The cmtf Authors
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

#include "cmtf/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include "cmtf/checkpoint.hpp"
#include "cmtf/csv.hpp"
#include "cmtf/error.hpp"
#include "cmtf/seed.hpp"

namespace cmtf {
namespace {

// Independent streams of the root seed.
constexpr std::uint64_t kStreamModel = 1;
constexpr std::uint64_t kStreamMarket = 2;
constexpr std::uint64_t kStreamFeatures = 3;
constexpr std::uint64_t kStreamText = 4;
constexpr std::uint64_t kStreamTweets = 5;
constexpr std::uint64_t kStreamObserve = 6;
constexpr std::uint64_t kStreamPairs = 7;

const std::vector<std::string> kFillers{"shares", "market", "report", "quarter", "update"};

std::string stock_id(char prefix, std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%c%04zu", prefix, i);
  return buf;
}

bool bernoulli(std::mt19937_64& rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

std::size_t sample_index(std::span<const double> weights, std::mt19937_64& rng) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double u = uniform(rng, 0.0, total);
  for (std::size_t a = 0; a < weights.size(); ++a) {
    if (u < weights[a]) return a;
    u -= weights[a];
  }
  return weights.size() - 1;
}

std::vector<std::size_t> pick_distinct(std::mt19937_64& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t a = 0; a < k; ++a) std::swap(idx[a], idx[a + uniform_index(rng, n - a)]);
  idx.resize(k);
  return idx;
}

void fill_normal(Matrix& m, std::mt19937_64& rng, bool constant_first_column) {
  std::normal_distribution<double> nd(0.0, 1.0);
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = (constant_first_column && c == 0) ? 1.0 : nd(rng);
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace

void SyntheticSpec::validate() const {
  if (n_stocks < 2) throw ConfigError("n_stocks must be at least 2");
  if (n_events < 1) throw ConfigError("n_events must be positive");
  if (n_days < 3) throw ConfigError("n_days must be at least 3");
  if (ranks.r1 == 0 || ranks.r2 == 0 || ranks.r3 == 0) throw ConfigError("ranks must be positive");
  if (ranks.r1 > n_stocks || ranks.r2 > n_events || ranks.r3 > kSentimentAxis) throw ConfigError("ranks exceed the tensor dimensions");
  if (!(noise_level >= 0.0 && noise_level < 1.0)) throw ConfigError("noise_level must be in [0, 1)");
  if (!(correlation_strength >= 0.0 && correlation_strength <= 1.0)) {
    throw ConfigError("correlation_strength must be in [0, 1]");
  }
  if (group_size == 0) throw ConfigError("group_size must be positive");
  if (!(no_event_rate >= 0.0 && no_event_rate <= 1.0)) throw ConfigError("no_event_rate must be in [0, 1]");
  if (n_events == 1 && no_event_rate != 1.0) throw ConfigError("a single event category requires no_event_rate = 1");
  if (!(still_rate >= 0.0 && still_rate < 1.0)) throw ConfigError("still_rate must be in [0, 1)");
  if (!(spread >= 0.0 && spread <= 0.5)) throw ConfigError("spread must be in [0, 0.5]");
  if (!(feature_noise >= 0.0) || !std::isfinite(feature_noise)) throw ConfigError("feature_noise must be non-negative");
  if (!csv::is_iso_date(start_day)) throw ConfigError("start_day must be YYYY-MM-DD");
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j, SyntheticSpec s) {
  if (!j.is_object()) throw ConfigError("synthetic spec must be a JSON object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const auto& v = it.value();
      if (k == "n_stocks") s.n_stocks = v.get<std::size_t>();
      else if (k == "n_events") s.n_events = v.get<std::size_t>();
      else if (k == "n_days") s.n_days = v.get<std::size_t>();
      else if (k == "ranks") {
        const auto r = v.get<std::vector<std::size_t>>();
        if (r.size() != 3) throw ConfigError("ranks must list three values");
        s.ranks = {r[0], r[1], r[2]};
      } else if (k == "noise_level") s.noise_level = v.get<double>();
      else if (k == "correlation_strength") s.correlation_strength = v.get<double>();
      else if (k == "seed") s.seed = v.get<std::uint64_t>();
      else if (k == "group_size") s.group_size = v.get<std::size_t>();
      else if (k == "no_event_rate") s.no_event_rate = v.get<double>();
      else if (k == "still_rate") s.still_rate = v.get<double>();
      else if (k == "spread") s.spread = v.get<double>();
      else if (k == "feature_noise") s.feature_noise = v.get<double>();
      else if (k == "start_day") s.start_day = v.get<std::string>();
      else throw ConfigError("unknown synthetic spec field '" + k + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic spec: ") + e.what());
  }
  return s;
}

nlohmann::json synthetic_spec_to_json(const SyntheticSpec& s) {
  return {{"n_stocks", s.n_stocks},
          {"n_events", s.n_events},
          {"n_days", s.n_days},
          {"ranks", {s.ranks.r1, s.ranks.r2, s.ranks.r3}},
          {"noise_level", s.noise_level},
          {"correlation_strength", s.correlation_strength},
          {"seed", s.seed},
          {"group_size", s.group_size},
          {"no_event_rate", s.no_event_rate},
          {"still_rate", s.still_rate},
          {"spread", s.spread},
          {"feature_noise", s.feature_noise},
          {"start_day", s.start_day}};
}

std::vector<std::string> weekday_calendar(const std::string& start, std::size_t n) {
  using namespace std::chrono;
  if (!csv::is_iso_date(start)) throw ConfigError("invalid start date '" + start + "'");
  const int y = std::stoi(start.substr(0, 4));
  const unsigned m = static_cast<unsigned>(std::stoi(start.substr(5, 2)));
  const unsigned d = static_cast<unsigned>(std::stoi(start.substr(8, 2)));
  sys_days day{year{y} / month{m} / std::chrono::day{d}};
  std::vector<std::string> out;
  while (out.size() < n) {
    const weekday wd{day};
    if (wd != Saturday && wd != Sunday) {
      const year_month_day ymd{day};
      char buf[16];
      std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                    static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
      out.emplace_back(buf);
    }
    day += days{1};
  }
  return out;
}

PlantedModel plant_model(const SyntheticSpec& spec) {
  spec.validate();
  auto rng = stream_rng(spec.seed, kStreamModel);
  const std::size_t n = spec.n_stocks;
  const std::size_t n_groups = (n + spec.group_size - 1) / spec.group_size;
  const Ranks& r = spec.ranks;

  PlantedModel out;
  Matrix group_rows(n_groups, r.r1);
  fill_normal(group_rows, rng, true);
  out.model.u = Matrix(n, r.r1);
  out.group.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.group[i] = i / spec.group_size;
    for (std::size_t p = 0; p < r.r1; ++p) out.model.u(i, p) = group_rows(out.group[i], p);
  }
  out.model.v = Matrix(spec.n_events, r.r2);
  fill_normal(out.model.v, rng, true);
  out.model.w = Matrix(kSentimentAxis, r.r3);
  fill_normal(out.model.w, rng, true);
  out.model.core = DenseTensor3({r.r1, r.r2, r.r3});
  std::normal_distribution<double> nd(0.0, 1.0);
  for (double& c : out.model.core.values()) c = nd(rng);
  out.model.f = Matrix(r.r1, kFeatureNames.size());
  fill_normal(out.model.f, rng, false);

  // With a constant first column in U, V and W, core(0,0,0) is a constant
  // offset on every cell; the rest of the core sets the deviation.
  out.model.core(0, 0, 0) = 0.0;
  const DenseTensor3 dev = tucker_reconstruct(out.model);
  double peak = 0.0, sq = 0.0;
  for (double x : dev.values()) {
    peak = std::max(peak, std::abs(x));
    sq += x * x;
  }
  const double rms = std::sqrt(sq / static_cast<double>(dev.values().size()));
  const double scale = spec.spread > 0.0 ? (rms > 0.0 ? spec.spread / rms : 0.0) : (peak > 0.0 ? 0.45 / peak : 0.0);
  for (double& c : out.model.core.values()) c *= scale;
  out.model.core(0, 0, 0) = 0.5;
  out.prob = tucker_reconstruct(out.model);
  for (double& p : out.prob.values()) p = std::clamp(p, 0.05, 0.95);
  return out;
}

DataBundle SyntheticBundle::data() const {
  DataBundle b;
  b.quotes = quotes;
  b.events = events;
  b.postings = postings;
  b.tweets = tweets;
  b.event_categories = spec.n_events;
  return b;
}

SyntheticBundle generate_synthetic(const SyntheticSpec& spec) {
  SyntheticBundle b;
  b.spec = spec;
  b.truth = plant_model(spec);
  const std::size_t n = spec.n_stocks;
  const std::size_t m_events = spec.n_events;
  const std::size_t n_groups = b.truth.group.back() + 1;
  for (std::size_t i = 0; i < n; ++i) b.stocks.push_back(stock_id('S', i));
  const auto calendar = weekday_calendar(spec.start_day, spec.n_days);

  // Context prior pi(e, s) over the flattened (event, sentiment) grid.
  std::vector<double> prior(m_events * kSentimentAxis);
  for (std::size_t e = 0; e < m_events; ++e) {
    const double pe = e == 0 ? spec.no_event_rate
                             : (1.0 - spec.no_event_rate) / static_cast<double>(m_events - 1);
    for (std::size_t s = 0; s < kSentimentAxis; ++s) prior[e * kSentimentAxis + s] = pe / kSentimentAxis;
  }
  std::vector<double> q(n, 0.0);  // prior-averaged upward probability per stock
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < prior.size(); ++c)
      q[i] += prior[c] * b.truth.prob(i, c / kSentimentAxis, c % kSentimentAxis);

  // Market: group direction, member movements and contexts drawn from the
  // posterior given the movement, so each cell's up-rate is the planted one.
  auto rng = stream_rng(spec.seed, kStreamMarket);
  std::vector<double> close(n), industry(n_groups);
  for (auto& c : close) c = uniform(rng, 5.0, 50.0);
  for (auto& c : industry) c = uniform(rng, 500.0, 3000.0);
  std::vector<std::vector<std::size_t>> context(spec.n_days, std::vector<std::size_t>(n, 0));
  std::vector<std::vector<int>> direction(spec.n_days, std::vector<int>(n, 0));
  std::vector<std::vector<int>> group_dir(spec.n_days, std::vector<int>(n_groups, 0));
  std::vector<std::vector<double>> close_hist(spec.n_days), industry_hist(spec.n_days);
  std::vector<double> weights(prior.size());
  for (std::size_t t = 0; t < spec.n_days; ++t) {
    if (t > 0) {
      for (std::size_t g = 0; g < n_groups; ++g) {
        const std::size_t first = g * spec.group_size;
        const bool d = bernoulli(rng, q[first]);
        group_dir[t][g] = d ? 1 : -1;
        industry[g] *= 1.0 + (d ? 1.0 : -1.0) * uniform(rng, 0.002, 0.02);
        for (std::size_t i = first; i < std::min(n, first + spec.group_size); ++i) {
          const bool still = bernoulli(rng, spec.still_rate);
          bool up = bernoulli(rng, spec.correlation_strength) ? d : bernoulli(rng, q[i]);
          for (std::size_t c = 0; c < prior.size(); ++c) {
            const double p = b.truth.prob(i, c / kSentimentAxis, c % kSentimentAxis);
            weights[c] = still ? prior[c] : prior[c] * (up ? p : 1.0 - p);
          }
          context[t][i] = sample_index(weights, rng);
          if (bernoulli(rng, spec.noise_level)) up = bernoulli(rng, 0.5);
          double pchg = 0.0;
          if (still) {
            pchg = uniform(rng, -0.015, 0.015);
          } else {
            pchg = (up ? 1.0 : -1.0) * uniform(rng, 0.021, 0.06);
            direction[t][i] = up ? 1 : -1;
          }
          close[i] *= 1.0 + pchg;
        }
      }
    }
    close_hist[t] = close;
    industry_hist[t] = industry;
  }

  // Quantitative features: planted U F plus per-stock noise, mapped to
  // positive ranges, with daily jitter and occasional invalid values.
  auto frng = stream_rng(spec.seed, kStreamFeatures);
  std::normal_distribution<double> nd(0.0, 1.0);
  const std::size_t kf = kFeatureNames.size();
  Matrix x = multiply(b.truth.model.u, b.truth.model.f);
  const double offsets[] = {1.0, 8.0, 1.0, 4.0};
  const double scales[] = {0.5, 4.0, 0.4, 2.0};
  for (std::size_t c = 0; c < kf; ++c) {
    double mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x(i, c) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) var += (x(i, c) - mean) * (x(i, c) - mean) / static_cast<double>(n);
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    for (std::size_t i = 0; i < n; ++i) x(i, c) = (x(i, c) - mean) / sd + spec.feature_noise * nd(frng);
    double lo = x(0, c);
    for (std::size_t i = 0; i < n; ++i) lo = std::min(lo, x(i, c));
    for (std::size_t i = 0; i < n; ++i) x(i, c) = offsets[c] + scales[c] * (x(i, c) - lo);
  }
  for (std::size_t t = 0; t < spec.n_days; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      std::optional<double> f[4];
      for (std::size_t c = 0; c < kf; ++c) f[c] = x(i, c) * std::max(0.01, 1.0 + 0.02 * nd(frng));
      if (bernoulli(frng, 0.02)) f[1].reset();
      if (bernoulli(frng, 0.01)) f[3] = -*f[3];
      b.quotes.push_back({calendar[t], b.stocks[i], close_hist[t][i], f[0], f[1], f[2], f[3],
                          industry_hist[t][b.truth.group[i]]});
    }
  }

  // News and postings realizing each stock-day's context.
  std::map<std::string, int> lex;
  for (std::size_t e = 1; e < m_events; ++e) {
    lex["evt_" + std::to_string(e)] = static_cast<int>(e);
    lex["evt_" + std::to_string(e) + "_alt"] = static_cast<int>(e);
  }
  b.lexicon = EventLexicon(std::move(lex), m_events);
  auto trng = stream_rng(spec.seed, kStreamText);
  auto filler = [&] { return kFillers[uniform_index(trng, kFillers.size())]; };
  for (std::size_t t = 1; t < spec.n_days; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t e = context[t][i] / kSentimentAxis;
      const bool positive = context[t][i] % kSentimentAxis == 0;
      const std::string& day = calendar[t];
      if (e > 0) {
        const std::string tok = "evt_" + std::to_string(e) + (bernoulli(trng, 0.5) ? "" : "_alt");
        b.news.push_back({day, b.stocks[i], {filler(), tok, filler()}});
        if (bernoulli(trng, 0.1)) b.news.push_back({day, b.stocks[i], {filler(), filler()}});
      } else if (bernoulli(trng, 0.3)) {
        b.news.push_back({day, b.stocks[i], {filler(), filler()}});
      }
      if (!positive && bernoulli(trng, 0.2)) continue;  // no postings reads as negative
      const std::size_t n_posts = 1 + uniform_index(trng, 3);
      for (std::size_t a = 0; a < n_posts; ++a) {
        const long long major = 2 + static_cast<long long>(uniform_index(trng, 5));
        const long long minor = static_cast<long long>(uniform_index(trng, 2));
        PostingRecord p{day, b.stocks[i], positive ? major : minor, positive ? minor : major, major + minor,
                        static_cast<long long>(uniform_index(trng, 200)),
                        static_cast<long long>(uniform_index(trng, 50))};
        b.postings.push_back(std::move(p));
      }
    }
  }
  for (const auto& item : b.news) b.events.push_back({item.day, item.stock, assign_event(item.tokens, b.lexicon)});

  // Tweets: group members seen moving together on a day get co-mentioned;
  // plus random pairs, unknown tickers and over-long spam lists.
  auto wrng = stream_rng(spec.seed, kStreamTweets);
  for (std::size_t t = 1; t < spec.n_days; ++t) {
    const std::string& day = calendar[t];
    for (std::size_t g = 0; g < n_groups; ++g) {
      if (!bernoulli(wrng, 0.6)) continue;
      const std::size_t first = g * spec.group_size;
      std::vector<std::size_t> along;
      for (std::size_t i = first; i < std::min(n, first + spec.group_size); ++i)
        if (direction[t][i] == group_dir[t][g]) along.push_back(i);
      if (along.size() < 2) continue;
      const std::size_t k = 2 + uniform_index(wrng, std::min<std::size_t>(along.size(), kMaxTickersPerTweet) - 1);
      Tweet tw{day, {}};
      for (std::size_t idx : pick_distinct(wrng, along.size(), k)) tw.tickers.push_back(b.stocks[along[idx]]);
      b.tweets.push_back(std::move(tw));
    }
    if (bernoulli(wrng, 0.5)) {
      Tweet tw{day, {}};
      for (std::size_t idx : pick_distinct(wrng, n, 2)) tw.tickers.push_back(b.stocks[idx]);
      if (bernoulli(wrng, 0.1)) tw.tickers.push_back("UNLISTED");
      b.tweets.push_back(std::move(tw));
    }
    if (n >= kMaxTickersPerTweet + 2 && bernoulli(wrng, 0.1)) {
      Tweet tw{day, {}};
      for (std::size_t idx : pick_distinct(wrng, n, kMaxTickersPerTweet + 2)) tw.tickers.push_back(b.stocks[idx]);
      b.tweets.push_back(std::move(tw));
    }
  }
  return b;
}

nlohmann::json synthetic_run_config(const SyntheticSpec& s) {
  return {{"quotes", "quotes.csv"},
          {"news", "news.csv"},
          {"lexicon", "lexicon.json"},
          {"postings", "postings.csv"},
          {"tweets", "tweets.csv"},
          {"event_categories", s.n_events},
          {"seed", s.seed},
          {"method", "perceived"},
          {"ablation", "full"},
          {"train_fraction", 0.2},
          {"hyperparams",
           {{"ranks", {s.ranks.r1, s.ranks.r2, s.ranks.r3}},
            {"lambda1", 1.0},
            {"lambda2", 1.0},
            {"lambda3", 0.001},
            {"eta", 0.1},
            {"epsilon", 1e-6},
            {"max_epochs", 1500},
            {"init_scale", 0.3}}},
          {"out", "out"}};
}

void write_synthetic(const SyntheticBundle& b, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_quotes_csv(dir / "quotes.csv", b.quotes);
  write_news_csv(dir / "news.csv", b.news);
  write_lexicon_json(dir / "lexicon.json", b.lexicon);
  write_events_csv(dir / "events.csv", b.events);
  write_postings_csv(dir / "postings.csv", b.postings);
  write_tweets_csv(dir / "tweets.csv", b.tweets);

  HyperParams h;
  h.ranks = b.spec.ranks;
  h.seed = b.spec.seed;
  nlohmann::json truth{{"spec", synthetic_spec_to_json(b.spec)},
                       {"stocks", b.stocks},
                       {"group", b.truth.group},
                       {"model", checkpoint_to_json(b.truth.model, h)},
                       {"prob", b.truth.prob.values()}};
  write_json(dir / "truth.json", truth);

  write_json(dir / "config.json", synthetic_run_config(b.spec));
}

PlantedCompletion planted_completion(const SyntheticSpec& spec, double observe_fraction) {
  if (!(observe_fraction > 0.0 && observe_fraction < 1.0)) throw ConfigError("observe_fraction must be in (0, 1)");
  PlantedCompletion out;
  out.truth = plant_model(spec);
  const Dims3 d = out.truth.prob.dims();
  auto rng = stream_rng(spec.seed, kStreamObserve);
  std::vector<std::size_t> cells(d.size());
  std::iota(cells.begin(), cells.end(), std::size_t{0});
  std::shuffle(cells.begin(), cells.end(), rng);
  const auto n_obs = static_cast<std::size_t>(std::llround(observe_fraction * static_cast<double>(d.size())));
  std::sort(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(n_obs));
  std::sort(cells.begin() + static_cast<std::ptrdiff_t>(n_obs), cells.end());
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<TensorEntry> obs;
  for (std::size_t a = 0; a < cells.size(); ++a) {
    const std::size_t c = cells[a];
    const std::size_t i = c / (d.n1 * d.n2), j = (c / d.n2) % d.n1, k = c % d.n2;
    const double v = out.truth.prob(i, j, k);
    if (a < n_obs) {
      const double noisy = spec.noise_level > 0.0 ? std::clamp(v + spec.noise_level * nd(rng), 0.0, 1.0) : v;
      obs.push_back({i, j, k, noisy});
    } else {
      out.held_out.push_back({i, j, k, v});
    }
  }
  out.observed = SparseTensor3(d, std::move(obs));
  return out;
}

PairTrial make_pair_trial(std::uint64_t seed, double agreement, std::size_t n_days, std::size_t n_independent) {
  if (!(agreement >= 0.5 && agreement <= 1.0)) throw ConfigError("agreement must be in [0.5, 1]");
  auto rng = stream_rng(seed, kStreamPairs);
  const double follow = 0.5 * (1.0 + std::sqrt(2.0 * agreement - 1.0));
  const std::size_t n = 2 + n_independent;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(stock_id('P', i));
  const auto calendar = weekday_calendar("2024-01-02", n_days);

  // Industry 0 belongs to the coupled pair, industry i-1 to independent stock i.
  std::vector<double> close(n), industry(n - 1);
  for (auto& c : close) c = uniform(rng, 5.0, 50.0);
  for (auto& c : industry) c = uniform(rng, 500.0, 3000.0);
  PairTrial out;
  for (std::size_t t = 0; t < n_days; ++t) {
    std::vector<int> dir(n, 0);
    if (t > 0) {
      std::vector<bool> latent(n - 1);
      for (std::size_t g = 0; g < n - 1; ++g) {
        latent[g] = bernoulli(rng, 0.5);
        industry[g] *= 1.0 + (latent[g] ? 1.0 : -1.0) * uniform(rng, 0.002, 0.02);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const bool base = latent[i < 2 ? 0 : i - 1];
        const bool up = bernoulli(rng, follow) ? base : !base;
        double pchg = 0.0;
        if (bernoulli(rng, 0.1)) {
          pchg = uniform(rng, -0.015, 0.015);
        } else {
          pchg = (up ? 1.0 : -1.0) * uniform(rng, 0.021, 0.06);
          dir[i] = up ? 1 : -1;
        }
        close[i] *= 1.0 + pchg;
      }
      for (int sign : {1, -1}) {
        std::vector<std::size_t> same;
        for (std::size_t i = 0; i < n; ++i)
          if (dir[i] == sign) same.push_back(i);
        if (same.size() < 2) continue;
        const std::size_t k = 2 + uniform_index(rng, std::min<std::size_t>(same.size(), kMaxTickersPerTweet) - 1);
        Tweet tw{calendar[t], {}};
        for (std::size_t idx : pick_distinct(rng, same.size(), k)) tw.tickers.push_back(ids[same[idx]]);
        out.tweets.push_back(std::move(tw));
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      out.quotes.push_back({calendar[t], ids[i], close[i], 1.0, 10.0, 1.0, 5.0, industry[i < 2 ? 0 : i - 1]});
    }
  }
  return out;
}

}  // namespace cmtf
