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

#include "cmtf/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

#include "cmtf/checkpoint.hpp"
#include "cmtf/csv.hpp"
#include "cmtf/seed.hpp"

namespace cmtf {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void log_line(Stage s, const std::string& msg) {
  std::fprintf(stderr, "[%s] %s\n", std::string(to_string(s)).c_str(), msg.c_str());
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

json range_json(const DateRange& r) { return json{{"first", r.first}, {"last", r.last}}; }

DateRange range_from(const json& j, const char* what) {
  if (!j.is_object() || !j.contains("first") || !j.contains("last")) {
    throw ConfigError(std::string(what) + " must be an object with first and last");
  }
  return {j.at("first").get<std::string>(), j.at("last").get<std::string>()};
}

std::string_view error_kind(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const DataError*>(&e)) return "data";
  if (dynamic_cast<const DivergenceError*>(&e)) return "divergence";
  if (dynamic_cast<const DimensionError*>(&e)) return "dimension";
  return "error";
}

struct StageRecord {
  std::vector<std::pair<std::string, fs::path>> inputs;
  std::vector<fs::path> outputs;  // inside the output directory
  std::optional<std::uint64_t> seed;
};

std::string display_path(const std::optional<fs::path>& p) { return p ? p->generic_string() : std::string(); }

void record_stage(const PipelineConfig& c, Stage s, const StageRecord& r) {
  const fs::path mpath = c.out_dir / outputs::kManifest;
  json manifest = json::object();
  if (fs::exists(mpath)) {
    try {
      manifest = read_json_file(mpath);
    } catch (const DataError&) {
      manifest = json::object();
    }
  }
  const json cfg = config_to_json(c);
  const std::string hash = sha256_hex(cfg.dump());
  manifest["root_seed"] = c.seed;
  manifest["config_hash"] = hash;
  manifest["config"] = cfg;
  json rec{{"config_hash", hash}, {"inputs", json::object()}, {"outputs", json::object()}};
  for (const auto& [name, p] : r.inputs) rec["inputs"][name] = sha256_file(p);
  for (const auto& p : r.outputs) rec["outputs"][p.generic_string()] = sha256_file(c.out_dir / p);
  if (r.seed) rec["seed"] = *r.seed;
  manifest["stages"][std::string(to_string(s))] = rec;
  write_json_file(mpath, manifest);
}

template <class Body>
void guarded(const PipelineConfig& c, Stage s, Body&& body) {
  const fs::path marker = c.out_dir / outputs::kFailure;
  try {
    fs::create_directories(c.out_dir);
    fs::remove(marker);
    body();
  } catch (const std::exception& e) {
    try {
      fs::create_directories(c.out_dir);
      write_json_file(marker, json{{"stage", to_string(s)}, {"kind", error_kind(e)}, {"error", e.what()}});
    } catch (const std::exception&) {
      // The original failure is more useful than a marker write error.
    }
    throw StageError(s, e.what(), std::current_exception());
  }
}

fs::path required_input(const PipelineConfig& c, const std::optional<fs::path>& p, const char* what) {
  if (!p) throw ConfigError(std::string("no ") + what + " file configured");
  const fs::path full = c.resolve(*p);
  if (!fs::exists(full)) throw DataError("missing " + std::string(what) + " file: " + full.string());
  return full;
}

std::optional<fs::path> optional_input(const PipelineConfig& c, const std::optional<fs::path>& p, const char* what) {
  if (!p) return std::nullopt;
  return required_input(c, p, what);
}

std::vector<CorrelationMethod> methods_of(const PipelineConfig& c) {
  return c.correlate_methods.empty() ? std::vector<CorrelationMethod>{c.method} : c.correlate_methods;
}

std::string sentiment_name(std::size_t k) { return std::string(to_string(static_cast<Polarity>(k))); }

std::size_t parse_sentiment(const std::string& s) {
  if (s == "positive") return 0;
  if (s == "negative") return 1;
  throw DataError("unknown sentiment '" + s + "'");
}

Movement parse_movement(const std::string& s) {
  if (s == "up") return Movement::up;
  if (s == "down") return Movement::down;
  throw DataError("unknown movement label '" + s + "'");
}

std::size_t stock_index(const std::vector<std::string>& stocks, const std::string& id) {
  auto it = std::lower_bound(stocks.begin(), stocks.end(), id);
  if (it == stocks.end() || *it != id) throw DataError("stock '" + id + "' is not in the universe");
  return static_cast<std::size_t>(it - stocks.begin());
}

}  // namespace

std::string_view to_string(Stage s) noexcept {
  switch (s) {
    case Stage::ingest: return "ingest";
    case Stage::correlate: return "correlate";
    case Stage::train: return "train";
    case Stage::backtest: return "backtest";
  }
  return "ingest";
}

Stage parse_stage(std::string_view s) {
  for (Stage st : {Stage::ingest, Stage::correlate, Stage::train, Stage::backtest})
    if (to_string(st) == s) return st;
  throw ConfigError("unknown stage '" + std::string(s) + "' (expected ingest, correlate, train or backtest)");
}

std::string outputs::correlation_file(CorrelationMethod m) {
  return "correlation_" + std::string(to_string(m)) + ".csv";
}

std::string outputs::neighbors_file(CorrelationMethod m) {
  return "neighbors_" + std::string(to_string(m)) + ".csv";
}

// ---------------------------------------------------------------------------
// Config

void PipelineConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must be in (0, 1)");
  if (!(sentiment_threshold >= 0.0) || !std::isfinite(sentiment_threshold)) {
    throw ConfigError("sentiment_threshold must be finite and non-negative");
  }
  if (train_period.has_value() != test_period.has_value()) {
    throw ConfigError("train_period and test_period must be given together");
  }
  if (train_period) {
    BacktestConfig bc;
    bc.train_period = *train_period;
    bc.test_period = *test_period;
    bc.sentiment_threshold = sentiment_threshold;
    bc.validate();
  }
  if (top_k == 0) throw ConfigError("top_k must be positive");
  if (events && news) throw ConfigError("configure either events or news, not both");
  if (news && !lexicon) throw ConfigError("news input requires a lexicon");
  constexpr auto big = std::numeric_limits<std::size_t>::max();
  hyperparams.validate({big, big, big});
}

fs::path PipelineConfig::resolve(const fs::path& p) const {
  return p.is_absolute() ? p : base_dir / p;
}

HyperParams PipelineConfig::effective_hyperparams() const {
  HyperParams h = apply_ablation(hyperparams, ablation);
  h.seed = derive_seed(seed, kTrainSeedStream);
  return h;
}

PipelineConfig config_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  PipelineConfig c;
  c.base_dir = base_dir;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const json& v = it.value();
      auto path_of = [&] { return std::optional<fs::path>(v.get<std::string>()); };
      if (k == "quotes") c.quotes = path_of();
      else if (k == "events") c.events = path_of();
      else if (k == "news") c.news = path_of();
      else if (k == "lexicon") c.lexicon = path_of();
      else if (k == "postings") c.postings = path_of();
      else if (k == "tweets") c.tweets = path_of();
      else if (k == "event_categories") c.event_categories = v.get<std::size_t>();
      else if (k == "method") c.method = parse_correlation_method(v.get<std::string>());
      else if (k == "methods") {
        for (const auto& m : v) c.correlate_methods.push_back(parse_correlation_method(m.get<std::string>()));
      } else if (k == "ablation") c.ablation = parse_ablation(v.get<std::string>());
      else if (k == "train_period") c.train_period = range_from(v, "train_period");
      else if (k == "test_period") c.test_period = range_from(v, "test_period");
      else if (k == "train_fraction") c.train_fraction = v.get<double>();
      else if (k == "sentiment_threshold") c.sentiment_threshold = v.get<double>();
      else if (k == "hyperparams") {
        if (v.is_object() && v.contains("seed")) {
          throw ConfigError("hyperparams.seed is derived from the top-level seed; set \"seed\" instead");
        }
        c.hyperparams = hyperparams_from_json(v, c.hyperparams);
      } else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "top_k") c.top_k = v.get<std::size_t>();
      else if (k == "out") c.out_dir = base_dir / v.get<std::string>();
      else throw ConfigError("unknown config key '" + k + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!j.contains("out")) c.out_dir = base_dir / "out";
  c.validate();
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

json config_to_json(const PipelineConfig& c) {
  json methods = json::array();
  for (auto m : methods_of(c)) methods.push_back(to_string(m));
  json j{{"event_categories", c.event_categories},
         {"method", to_string(c.method)},
         {"methods", methods},
         {"ablation", to_string(c.ablation)},
         {"train_fraction", c.train_fraction},
         {"sentiment_threshold", c.sentiment_threshold},
         {"hyperparams", hyperparams_to_json(c.hyperparams)},
         {"seed", c.seed},
         {"top_k", c.top_k}};
  j["hyperparams"].erase("seed");
  const std::pair<const char*, const std::optional<fs::path>*> paths[] = {
      {"quotes", &c.quotes},   {"events", &c.events},     {"news", &c.news},
      {"lexicon", &c.lexicon}, {"postings", &c.postings}, {"tweets", &c.tweets}};
  for (const auto& [key, p] : paths)
    if (*p) j[key] = p->value().generic_string();
  if (c.train_period) j["train_period"] = range_json(*c.train_period);
  if (c.test_period) j["test_period"] = range_json(*c.test_period);
  return j;
}

void apply_overrides(PipelineConfig& c, const ConfigOverrides& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.method) {
    c.method = *o.method;
    c.correlate_methods = {*o.method};
  }
  if (o.ablation) c.ablation = *o.ablation;
  if (o.out_dir) c.out_dir = *o.out_dir;
}

// ---------------------------------------------------------------------------
// Hashing

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

// ---------------------------------------------------------------------------
// Stage artifacts

Universe read_universe(const fs::path& out_dir) {
  const json j = read_json_file(out_dir / outputs::kUniverse);
  try {
    Universe u;
    u.stocks = j.at("stocks").get<std::vector<std::string>>();
    u.event_categories = j.at("event_categories").get<std::size_t>();
    u.train_period = range_from(j.at("train_period"), "train_period");
    u.test_period = range_from(j.at("test_period"), "test_period");
    if (!std::is_sorted(u.stocks.begin(), u.stocks.end())) throw DataError("universe stocks are not sorted");
    return u;
  } catch (const json::exception& e) {
    throw DataError(std::string(outputs::kUniverse) + ": " + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string(outputs::kUniverse) + ": " + e.what());
  }
}

void write_tensor_csv(const fs::path& path, const UpwardTensor& a, const Universe& u) {
  std::vector<std::vector<std::string>> rows;
  const auto entries = a.tensor.entries();
  for (std::size_t n = 0; n < entries.size(); ++n) {
    const auto& e = entries[n];
    const auto& c = a.counts[n];
    rows.push_back({u.stocks[e.i], std::to_string(e.j), sentiment_name(e.k), std::to_string(c.up),
                    std::to_string(c.down), csv::format(e.value)});
  }
  csv::write(path, {"stock", "event", "sentiment", "up", "down", "prob_up"}, rows);
}

UpwardTensor read_tensor_csv(const fs::path& path, const Universe& u) {
  const csv::Table t = csv::read(path);
  const std::size_t c_stock = t.column("stock"), c_event = t.column("event"), c_sent = t.column("sentiment"),
                    c_up = t.column("up"), c_down = t.column("down");
  std::vector<DailyObservation> obs;
  for (const auto& r : t.rows) {
    const std::size_t i = stock_index(u.stocks, r[c_stock]);
    const long long j = csv::parse_int(r[c_event], "event");
    const long long up = csv::parse_int(r[c_up], "up"), down = csv::parse_int(r[c_down], "down");
    if (j < 0 || up < 0 || down < 0 || up + down == 0) throw DataError(path.string() + ": invalid tensor row");
    const std::size_t k = parse_sentiment(r[c_sent]);
    for (long long n = 0; n < up; ++n) obs.push_back({i, static_cast<std::size_t>(j), k, 1});
    for (long long n = 0; n < down; ++n) obs.push_back({i, static_cast<std::size_t>(j), k, -1});
  }
  try {
    return aggregate_upward_probability(obs, {u.stocks.size(), u.event_categories, kSentimentAxis});
  } catch (const DimensionError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_test_samples(const fs::path& path, std::span<const TestSample> samples, const Universe& u) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& s : samples) {
    rows.push_back({s.day, u.stocks[s.stock], std::to_string(s.event), sentiment_name(s.sentiment),
                    std::string(to_string(s.label))});
  }
  csv::write(path, {"day", "stock", "event", "sentiment", "label"}, rows);
}

std::vector<TestSample> read_test_samples(const fs::path& path, const Universe& u) {
  const csv::Table t = csv::read(path);
  const std::size_t c_day = t.column("day"), c_stock = t.column("stock"), c_event = t.column("event"),
                    c_sent = t.column("sentiment"), c_label = t.column("label");
  std::vector<TestSample> out;
  for (const auto& r : t.rows) {
    const long long j = csv::parse_int(r[c_event], "event");
    // Categories first seen in the test period lie past the axis and score as cold.
    if (j < 0) throw DataError(path.string() + ": negative event category");
    out.push_back({r[c_day], stock_index(u.stocks, r[c_stock]), static_cast<std::size_t>(j),
                   parse_sentiment(r[c_sent]), parse_movement(r[c_label])});
  }
  return out;
}

void write_correlation_csv(const fs::path& path, const CorrelationMatrix& z, std::span<const std::string> stocks) {
  std::vector<std::string> header{"stock"};
  header.insert(header.end(), stocks.begin(), stocks.end());
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < stocks.size(); ++i) {
    std::vector<std::string> row{stocks[i]};
    for (std::size_t j = 0; j < stocks.size(); ++j) row.push_back(csv::format(z.values(i, j)));
    rows.push_back(std::move(row));
  }
  csv::write(path, header, rows);
}

CorrelationMatrix read_correlation_csv(const fs::path& path, CorrelationMethod m,
                                       std::span<const std::string> stocks) {
  const csv::Table t = csv::read(path);
  const std::size_t n = stocks.size();
  if (t.header.size() != n + 1 || t.rows.size() != n) throw DataError(path.string() + ": matrix size mismatch");
  CorrelationMatrix z{Matrix(n, n), m, false};
  for (std::size_t i = 0; i < n; ++i) {
    if (t.header[i + 1] != stocks[i] || t.rows[i][0] != stocks[i]) {
      throw DataError(path.string() + ": stock order differs from the universe");
    }
    for (std::size_t j = 0; j < n; ++j) z.values(i, j) = csv::parse_double(t.rows[i][j + 1], "correlation");
  }
  return z;
}

json metrics_to_json(const MetricsReport& m, const json& config_echo) {
  return json{{"acc", m.acc},
              {"mcc", m.mcc},
              {"confusion", {{"tp", m.confusion.tp}, {"fp", m.confusion.fp}, {"fn", m.confusion.fn}, {"tn", m.confusion.tn}}},
              {"n_samples", m.n_samples},
              {"n_cold", m.n_cold},
              {"config", config_echo}};
}

// ---------------------------------------------------------------------------
// Stages

void run_ingest(const PipelineConfig& c) {
  guarded(c, Stage::ingest, [&] {
    StageRecord rec;
    const fs::path quotes_path = required_input(c, c.quotes, "quotes");
    rec.inputs.emplace_back(display_path(c.quotes), quotes_path);
    DataBundle b;
    b.quotes = read_quotes_csv(quotes_path);
    b.event_categories = c.event_categories;
    if (c.events) {
      const fs::path p = required_input(c, c.events, "events");
      rec.inputs.emplace_back(display_path(c.events), p);
      b.events = read_events_csv(p);
    } else if (c.news) {
      const fs::path np = required_input(c, c.news, "news");
      const fs::path lp = required_input(c, c.lexicon, "lexicon");
      rec.inputs.emplace_back(display_path(c.news), np);
      rec.inputs.emplace_back(display_path(c.lexicon), lp);
      const EventLexicon lex = EventLexicon::from_json_file(lp);
      b.events = read_news_csv(np, lex);
      b.event_categories = std::max(b.event_categories, lex.category_count());
    } else {
      throw ConfigError("configure an events file or a news file with a lexicon");
    }
    if (auto p = optional_input(c, c.postings, "postings")) {
      rec.inputs.emplace_back(display_path(c.postings), *p);
      b.postings = read_postings_csv(*p);
    } else {
      log_line(Stage::ingest, "no postings configured; every day reads as negative sentiment");
    }

    DateRange train, test;
    if (c.train_period) {
      train = *c.train_period;
      test = *c.test_period;
    } else {
      const MarketPanel panel = build_panel(b.quotes);
      std::tie(train, test) = split_calendar(panel.calendar, c.train_fraction);
    }
    BacktestConfig bc;
    bc.train_period = train;
    bc.test_period = test;
    bc.sentiment_threshold = c.sentiment_threshold;
    const TrainingInputs in = prepare_inputs(b, bc);

    const Universe u{in.panel.stocks, in.a.tensor.dims().n1, train, test};
    write_json_file(c.out_dir / outputs::kUniverse,
                    json{{"stocks", u.stocks},
                         {"event_categories", u.event_categories},
                         {"train_period", range_json(train)},
                         {"test_period", range_json(test)}});
    write_feature_csv(c.out_dir / outputs::kFeatures, in.x);
    write_tensor_csv(c.out_dir / outputs::kTensor, in.a, u);
    write_test_samples(c.out_dir / outputs::kTestSamples, in.test_samples, u);
    rec.outputs = {outputs::kUniverse, outputs::kFeatures, outputs::kTensor, outputs::kTestSamples};
    record_stage(c, Stage::ingest, rec);
    log_line(Stage::ingest, std::to_string(u.stocks.size()) + " stocks, " + std::to_string(u.event_categories) +
                                " event categories, " + std::to_string(in.a.tensor.size()) + " observed cells, " +
                                std::to_string(in.test_samples.size()) + " test samples; train " + train.first +
                                ".." + train.last + ", test " + test.first + ".." + test.last);
  });
}

void run_correlate(const PipelineConfig& c) {
  guarded(c, Stage::correlate, [&] {
    StageRecord rec;
    const Universe u = read_universe(c.out_dir);
    const fs::path quotes_path = required_input(c, c.quotes, "quotes");
    rec.inputs.emplace_back(outputs::kUniverse, c.out_dir / outputs::kUniverse);
    rec.inputs.emplace_back(display_path(c.quotes), quotes_path);
    const MarketPanel panel = build_panel(read_quotes_csv(quotes_path));
    if (panel.stocks != u.stocks) throw DataError("quotes no longer match the ingested universe; rerun ingest");
    std::optional<std::vector<Tweet>> tweets;
    if (auto p = optional_input(c, c.tweets, "tweets")) {
      rec.inputs.emplace_back(display_path(c.tweets), *p);
      tweets = read_tweets_csv(*p);
    }
    for (CorrelationMethod m : methods_of(c)) {
      const CorrelationMatrix z = stock_correlation(panel, m, u.train_period, tweets);
      if (z.degenerate) log_line(Stage::correlate, std::string(to_string(m)) + ": no positive correlation; Z is the identity");
      write_correlation_csv(c.out_dir / outputs::correlation_file(m), z, u.stocks);
      std::vector<std::vector<std::string>> rows;
      for (std::size_t s = 0; s < u.stocks.size(); ++s)
        for (const auto& nb : top_neighbors(z, s, c.top_k))
          rows.push_back({u.stocks[s], std::to_string(nb.rank), u.stocks[nb.stock], csv::format(nb.correlation)});
      csv::write(c.out_dir / outputs::neighbors_file(m), {"stock", "rank", "neighbor", "correlation"}, rows);
      rec.outputs.emplace_back(outputs::correlation_file(m));
      rec.outputs.emplace_back(outputs::neighbors_file(m));
      log_line(Stage::correlate, std::string(to_string(m)) + " matrix for " + std::to_string(u.stocks.size()) + " stocks");
    }
    record_stage(c, Stage::correlate, rec);
  });
}

void run_train(const PipelineConfig& c) {
  guarded(c, Stage::train, [&] {
    StageRecord rec;
    const Universe u = read_universe(c.out_dir);
    const FeatureMatrix x = read_feature_csv(c.out_dir / outputs::kFeatures);
    if (x.stocks != u.stocks) throw DataError("features do not match the ingested universe");
    const UpwardTensor a = read_tensor_csv(c.out_dir / outputs::kTensor, u);
    rec.inputs = {{outputs::kUniverse, c.out_dir / outputs::kUniverse},
                  {outputs::kFeatures, c.out_dir / outputs::kFeatures},
                  {outputs::kTensor, c.out_dir / outputs::kTensor}};
    const HyperParams h = c.effective_hyperparams();
    Matrix z = Matrix::identity(u.stocks.size());
    if (h.lambda2 != 0.0) {
      const std::string zf = outputs::correlation_file(c.method);
      if (!fs::exists(c.out_dir / zf)) throw DataError("missing " + zf + "; run the correlate stage first");
      z = read_correlation_csv(c.out_dir / zf, c.method, u.stocks).values;
      rec.inputs.emplace_back(zf, c.out_dir / zf);
    }
    const TrainResult r = train(a.tensor, x.values, z, h);
    save_checkpoint(c.out_dir / outputs::kModel, r.model, h);
    write_json_file(c.out_dir / outputs::kTrainReport, json{{"loss_trace", r.report.loss_trace},
                                                          {"epochs_run", r.report.epochs_run},
                                                          {"converged", r.report.converged}});
    rec.outputs = {outputs::kModel, outputs::kTrainReport};
    rec.seed = h.seed;
    record_stage(c, Stage::train, rec);
    log_line(Stage::train, std::to_string(r.report.epochs_run) + " epochs, final objective " +
                               csv::format(r.report.loss_trace.back()) +
                               (r.report.converged ? ", converged" : ", epoch limit reached"));
  });
}

void run_backtest_stage(const PipelineConfig& c) {
  guarded(c, Stage::backtest, [&] {
    StageRecord rec;
    const Universe u = read_universe(c.out_dir);
    const Checkpoint ck = load_checkpoint(c.out_dir / outputs::kModel);
    const UpwardTensor a = read_tensor_csv(c.out_dir / outputs::kTensor, u);
    const auto samples = read_test_samples(c.out_dir / outputs::kTestSamples, u);
    rec.inputs = {{outputs::kUniverse, c.out_dir / outputs::kUniverse},
                  {outputs::kModel, c.out_dir / outputs::kModel},
                  {outputs::kTensor, c.out_dir / outputs::kTensor},
                  {outputs::kTestSamples, c.out_dir / outputs::kTestSamples}};
    if (ck.model.dims() != a.tensor.dims()) throw DataError("model dimensions do not match the ingested tensor");
    if (samples.empty()) throw DataError("test period has no up/down samples");
    const ScoredPredictions scored = score_predictions(ck.model, a.tensor, samples, u.stocks);

    json echo{{"method", to_string(c.method)},
              {"ablation", to_string(c.ablation)},
              {"train_period", range_json(u.train_period)},
              {"test_period", range_json(u.test_period)},
              {"sentiment_threshold", c.sentiment_threshold},
              {"seed", c.seed},
              {"hyperparams", hyperparams_to_json(ck.hyperparams)}};
    write_json_file(c.out_dir / outputs::kMetrics, metrics_to_json(scored.metrics, echo));
    std::vector<std::vector<std::string>> rows;
    for (const auto& p : scored.rows) {
      rows.push_back({p.day, p.stock, std::to_string(p.event), sentiment_name(p.sentiment), csv::format(p.prob_up),
                      std::string(to_string(p.pred)), std::string(to_string(p.label))});
    }
    csv::write(c.out_dir / outputs::kPredictions, {"day", "stock", "event", "sentiment", "prob_up", "pred", "label"}, rows);
    rec.outputs = {outputs::kMetrics, outputs::kPredictions};
    record_stage(c, Stage::backtest, rec);
    char buf[128];
    std::snprintf(buf, sizeof buf, "ACC %.4f  MCC %.4f  over %zu samples (%zu cold)", scored.metrics.acc,
                  scored.metrics.mcc, scored.metrics.n_samples, scored.metrics.n_cold);
    log_line(Stage::backtest, buf);
  });
}

void run_pipeline(const PipelineConfig& c, Stage from) {
  c.validate();
  if (from <= Stage::ingest) run_ingest(c);
  if (from <= Stage::correlate) {
    if (c.effective_hyperparams().lambda2 != 0.0) {
      run_correlate(c);
    } else {
      log_line(Stage::correlate, "skipped: lambda2 is zero");
    }
  }
  if (from <= Stage::train) run_train(c);
  run_backtest_stage(c);
}

}  // namespace cmtf
