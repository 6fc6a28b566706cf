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


#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "cmtf/checkpoint.hpp"
#include "cmtf/csv.hpp"
#include "cmtf/error.hpp"
#include "cmtf/pipeline.hpp"
#include "cmtf/seed.hpp"
#include "cmtf/synth.hpp"
#include "test_util.hpp"

namespace cmtf {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

SyntheticSpec tiny(std::uint64_t seed) {
  SyntheticSpec s;
  s.n_stocks = 16;
  s.group_size = 4;
  s.n_events = 8;
  s.n_days = 60;
  s.ranks = {3, 3, 2};
  s.seed = seed;
  return s;
}

json read_json(const fs::path& p) { return json::parse(testing::slurp(p)); }

void write_json(const fs::path& p, const json& j) { std::ofstream(p) << j.dump(2); }

// Synthetic bundle with a quicker training schedule.
fs::path bundle_dir(const std::string& name, std::uint64_t seed = 1) {
  auto dir = testing::scratch_dir(name);
  const auto spec = tiny(seed);
  write_synthetic(generate_synthetic(spec), dir);
  auto cfg = read_json(dir / "config.json");
  cfg["hyperparams"]["max_epochs"] = 80;
  cfg["train_fraction"] = 0.5;
  write_json(dir / "config.json", cfg);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CMTF_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

TEST(Config, ParsesAndResolvesPaths) {
  auto dir = testing::scratch_dir("cfg_parse");
  write_json(dir / "c.json", json{{"quotes", "q.csv"},
                                  {"events", "/abs/e.csv"},
                                  {"method", "direction"},
                                  {"ablation", "no_z"},
                                  {"seed", 12},
                                  {"hyperparams", {{"eta", 0.2}}},
                                  {"out", "res"}});
  auto c = load_config(dir / "c.json");
  EXPECT_EQ(c.resolve(*c.quotes), dir / "q.csv");
  EXPECT_EQ(c.resolve(*c.events), fs::path("/abs/e.csv"));
  EXPECT_EQ(c.method, CorrelationMethod::direction);
  EXPECT_EQ(c.ablation, Ablation::no_z);
  EXPECT_EQ(c.hyperparams.eta, 0.2);
  EXPECT_EQ(c.hyperparams.lambda1, HyperParams{}.lambda1);
  EXPECT_EQ(c.out_dir, dir / "res");
  EXPECT_EQ(c.effective_hyperparams().lambda2, 0.0);
  EXPECT_EQ(c.effective_hyperparams().seed, derive_seed(12, kTrainSeedStream));
}

TEST(Config, Rejections) {
  const fs::path base = "/tmp";
  EXPECT_THROW(config_from_json(json{{"qoutes", "q.csv"}}, base), ConfigError);
  EXPECT_THROW(config_from_json(json{{"hyperparams", {{"seed", 3}}}}, base), ConfigError);
  EXPECT_THROW(config_from_json(json{{"method", "granger"}}, base), ConfigError);
  EXPECT_THROW(config_from_json(json{{"train_fraction", 1.5}}, base), ConfigError);
  EXPECT_THROW(config_from_json(json{{"events", "e"}, {"news", "n"}, {"lexicon", "l"}}, base), ConfigError);
  EXPECT_THROW(config_from_json(json{{"news", "n"}}, base), ConfigError);
  EXPECT_THROW(config_from_json(json{{"train_period", {{"first", "2024-01-01"}, {"last", "2024-02-01"}}}}, base),
               ConfigError);
  EXPECT_THROW(load_config("/nonexistent/c.json"), ConfigError);
}

TEST(Config, FlagsOverrideConfig) {
  auto c = config_from_json(json{{"seed", 1}, {"method", "coupled"}, {"methods", {"coupled", "pchange"}}}, "/tmp");
  ConfigOverrides o;
  o.seed = 9;
  o.method = CorrelationMethod::perceived;
  o.out_dir = "/tmp/elsewhere";
  apply_overrides(c, o);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.method, CorrelationMethod::perceived);
  EXPECT_EQ(c.correlate_methods, std::vector<CorrelationMethod>{CorrelationMethod::perceived});
  EXPECT_EQ(c.out_dir, fs::path("/tmp/elsewhere"));
  EXPECT_EQ(c.ablation, Ablation::full);
}

TEST(Config, JsonRoundTrip) {
  auto c = config_from_json(json{{"quotes", "q.csv"}, {"seed", 4}, {"hyperparams", {{"lambda3", 0.2}}}}, "/tmp/x");
  auto back = config_from_json(config_to_json(c), "/tmp/x");
  EXPECT_EQ(config_to_json(back), config_to_json(c));
}

TEST(Seeds, StreamsAreDistinctAndStable) {
  EXPECT_EQ(derive_seed(5, 1), derive_seed(5, 1));
  EXPECT_NE(derive_seed(5, 1), derive_seed(5, 2));
  EXPECT_NE(derive_seed(5, 1), derive_seed(6, 1));
}

TEST(Hashing, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Pipeline, MatchesInMemoryBacktest) {
  const auto dir = bundle_dir("pipe_mem");
  const auto c = load_config(dir / "config.json");
  run_pipeline(c);

  const auto b = generate_synthetic(tiny(1));
  BacktestConfig bc;
  const auto cal = weekday_calendar(b.spec.start_day, b.spec.n_days);
  std::tie(bc.train_period, bc.test_period) = split_calendar(cal, c.train_fraction);
  bc.ablation = c.ablation;
  bc.correlation_method = c.method;
  bc.hyperparams = c.effective_hyperparams();
  const auto mem = run_backtest(b.data(), bc);

  const auto m = read_json(c.out_dir / outputs::kMetrics);
  EXPECT_EQ(m["acc"].get<double>(), mem.metrics.acc);
  EXPECT_EQ(m["mcc"].get<double>(), mem.metrics.mcc);
  EXPECT_EQ(m["n_samples"].get<std::size_t>(), mem.metrics.n_samples);
  EXPECT_EQ(m["n_cold"].get<std::size_t>(), mem.metrics.n_cold);
  EXPECT_EQ(load_checkpoint(c.out_dir / outputs::kModel).model, mem.training.model);

  const auto preds = csv::read(c.out_dir / outputs::kPredictions);
  EXPECT_EQ(preds.header,
            (std::vector<std::string>{"day", "stock", "event", "sentiment", "prob_up", "pred", "label"}));
  ASSERT_EQ(preds.rows.size(), mem.predictions.size());
  for (std::size_t r = 0; r < preds.rows.size(); ++r)
    EXPECT_EQ(csv::parse_double(preds.rows[r][4], "prob_up"), mem.predictions[r].prob_up);
}

TEST(Pipeline, ManifestHashesOutputs) {
  const auto dir = bundle_dir("pipe_manifest");
  const auto c = load_config(dir / "config.json");
  run_pipeline(c);
  const auto man = read_json(c.out_dir / outputs::kManifest);
  EXPECT_EQ(man["root_seed"].get<std::uint64_t>(), c.seed);
  for (const char* stage : {"ingest", "correlate", "train", "backtest"}) {
    ASSERT_TRUE(man["stages"].contains(stage)) << stage;
    const auto& rec = man["stages"][stage];
    EXPECT_EQ(rec["config_hash"], man["config_hash"]);
    for (auto it = rec["outputs"].begin(); it != rec["outputs"].end(); ++it)
      EXPECT_EQ(it.value().get<std::string>(), sha256_file(c.out_dir / it.key())) << it.key();
  }
  EXPECT_EQ(man["stages"]["ingest"]["inputs"].size(), 4u);  // tweets are read by correlate
  EXPECT_EQ(man["stages"]["train"]["seed"].get<std::uint64_t>(), c.effective_hyperparams().seed);
  EXPECT_FALSE(fs::exists(c.out_dir / outputs::kFailure));
}

TEST(Pipeline, RerunAndPartialRerunAreIdentical) {
  const auto dir = bundle_dir("pipe_rerun");
  auto c = load_config(dir / "config.json");
  run_pipeline(c);
  const auto metrics = testing::slurp(c.out_dir / outputs::kMetrics);
  const auto model = testing::slurp(c.out_dir / outputs::kModel);
  run_pipeline(c, Stage::train);
  EXPECT_EQ(testing::slurp(c.out_dir / outputs::kMetrics), metrics);
  EXPECT_EQ(testing::slurp(c.out_dir / outputs::kModel), model);
  c.out_dir = dir / "second";
  run_pipeline(c);
  EXPECT_EQ(testing::slurp(c.out_dir / outputs::kMetrics), metrics);
  EXPECT_EQ(testing::slurp(c.out_dir / outputs::kModel), model);
}

TEST(Pipeline, ZeroCouplingEqualsNoZNoX) {
  const auto dir = bundle_dir("pipe_zero");
  auto ablated = load_config(dir / "config.json");
  ablated.ablation = Ablation::no_z_no_x;
  ablated.out_dir = dir / "ablated";
  auto zeroed = load_config(dir / "config.json");
  zeroed.hyperparams.lambda1 = 0.0;
  zeroed.hyperparams.lambda2 = 0.0;
  zeroed.out_dir = dir / "zeroed";
  run_pipeline(ablated);
  run_pipeline(zeroed);
  for (const char* f : {outputs::kModel, outputs::kPredictions, outputs::kTrainReport})
    EXPECT_EQ(testing::slurp(ablated.out_dir / f), testing::slurp(zeroed.out_dir / f)) << f;
  const auto ma = read_json(ablated.out_dir / outputs::kMetrics);
  const auto mz = read_json(zeroed.out_dir / outputs::kMetrics);
  for (const char* k : {"acc", "mcc", "confusion", "n_samples", "n_cold"}) EXPECT_EQ(ma[k], mz[k]) << k;
}

TEST(Pipeline, MissingQuotesNamesPath) {
  const auto dir = bundle_dir("pipe_noquotes");
  fs::remove(dir / "quotes.csv");
  const auto c = load_config(dir / "config.json");
  try {
    run_pipeline(c);
    FAIL() << "expected a stage failure";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), Stage::ingest);
    EXPECT_NE(std::string(e.what()).find((dir / "quotes.csv").string()), std::string::npos);
    EXPECT_THROW(e.rethrow_cause(), DataError);
  }
  const auto marker = read_json(c.out_dir / outputs::kFailure);
  EXPECT_EQ(marker["stage"], "ingest");
  EXPECT_EQ(marker["kind"], "data");
  EXPECT_FALSE(fs::exists(c.out_dir / outputs::kMetrics));
}

TEST(Pipeline, PerceivedWithoutTweets) {
  const auto dir = bundle_dir("pipe_notweets");
  auto cfg = read_json(dir / "config.json");
  cfg.erase("tweets");
  write_json(dir / "config.json", cfg);
  const auto c = load_config(dir / "config.json");
  run_ingest(c);
  try {
    run_correlate(c);
    FAIL() << "expected a stage failure";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), Stage::correlate);
    EXPECT_THROW(e.rethrow_cause(), ConfigError);
  }
  EXPECT_TRUE(fs::exists(c.out_dir / outputs::kFailure));
}

TEST(Pipeline, TrainWithoutCorrelationFileFails) {
  const auto dir = bundle_dir("pipe_noz");
  const auto c = load_config(dir / "config.json");
  run_ingest(c);
  EXPECT_THROW(run_train(c), StageError);
}

TEST(Pipeline, IntermediateFilesRoundTrip) {
  const auto dir = bundle_dir("pipe_files");
  const auto c = load_config(dir / "config.json");
  run_ingest(c);
  run_correlate(c);
  const auto u = read_universe(c.out_dir);
  EXPECT_EQ(u.stocks.size(), 16u);
  EXPECT_EQ(u.event_categories, 8u);
  const auto a = read_tensor_csv(c.out_dir / outputs::kTensor, u);
  write_tensor_csv(dir / "t2.csv", a, u);
  EXPECT_EQ(testing::slurp(dir / "t2.csv"), testing::slurp(c.out_dir / outputs::kTensor));
  const auto z = read_correlation_csv(c.out_dir / outputs::correlation_file(CorrelationMethod::perceived),
                                      CorrelationMethod::perceived, u.stocks);
  write_correlation_csv(dir / "z2.csv", z, u.stocks);
  EXPECT_EQ(testing::slurp(dir / "z2.csv"),
            testing::slurp(c.out_dir / outputs::correlation_file(CorrelationMethod::perceived)));
  const auto s = read_test_samples(c.out_dir / outputs::kTestSamples, u);
  write_test_samples(dir / "s2.csv", s, u);
  EXPECT_EQ(testing::slurp(dir / "s2.csv"), testing::slurp(c.out_dir / outputs::kTestSamples));
  const auto nb = csv::read(c.out_dir / outputs::neighbors_file(CorrelationMethod::perceived));
  EXPECT_EQ(nb.header, (std::vector<std::string>{"stock", "rank", "neighbor", "correlation"}));
  EXPECT_EQ(nb.rows.size(), 16u * 10u);
}

// Two stocks with identical prices (and tweets naming them together) among
// independent ones.
TEST(Correlate, CoMovingPairAreTopNeighbors) {
  auto dir = testing::scratch_dir("comove");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> move(-0.06, 0.06);
  std::bernoulli_distribution coin(0.5);
  const auto cal = weekday_calendar("2024-01-02", 80);
  const std::vector<std::string> ids{"A", "B", "C", "D", "E"};
  std::vector<double> close(5, 20.0), ind(5, 1000.0);
  std::vector<QuoteRecord> quotes;
  std::vector<Tweet> tweets;
  for (const auto& day : cal) {
    const double shared = move(rng);
    for (std::size_t i = 0; i < 5; ++i) {
      const double r = i < 2 ? shared : move(rng);
      close[i] *= 1.0 + r;
      ind[i] *= 1.0 + (i < 2 ? shared : move(rng)) * 0.2;
      quotes.push_back({day, ids[i], close[i], 1.0 + i, 10.0, 2.0, 3.0, ind[i]});
    }
    tweets.push_back({day, {"A", "B"}});
    if (coin(rng)) tweets.push_back({day, {ids[2 + day.size() % 3], "A"}});
  }
  write_quotes_csv(dir / "quotes.csv", quotes);
  write_events_csv(dir / "events.csv", std::vector<EventRecord>{{cal[1], "A", 1}});
  write_tweets_csv(dir / "tweets.csv", tweets);
  write_json(dir / "config.json",
             json{{"quotes", "quotes.csv"},
                  {"events", "events.csv"},
                  {"tweets", "tweets.csv"},
                  {"methods", {"coupled", "direction", "pchange", "perceived"}},
                  {"top_k", 2}});
  const auto c = load_config(dir / "config.json");
  run_ingest(c);
  run_correlate(c);
  for (auto m : {CorrelationMethod::coupled, CorrelationMethod::direction, CorrelationMethod::pchange,
                 CorrelationMethod::perceived}) {
    const auto nb = csv::read(c.out_dir / outputs::neighbors_file(m));
    std::map<std::string, std::string> top1;
    for (const auto& r : nb.rows)
      if (r[1] == "1") top1[r[0]] = r[2];
    EXPECT_EQ(top1["A"], "B") << to_string(m);
    EXPECT_EQ(top1["B"], "A") << to_string(m);
  }
}

TEST(Cli, ExitCodes) {
  const auto dir = bundle_dir("cli_codes");
  const std::string cfg = "--config " + (dir / "config.json").string();
  EXPECT_EQ(run_cli("run " + cfg), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / outputs::kMetrics));
  EXPECT_EQ(run_cli("run " + cfg + " --from-stage backtest"), 0);
  EXPECT_EQ(run_cli("run " + cfg + " --method nope"), 2);
  EXPECT_EQ(run_cli("run"), 2);
  EXPECT_EQ(run_cli("train " + cfg + " --ablation no_z --out " + (dir / "fresh").string()), 3);

  auto j = read_json(dir / "config.json");
  j["hyperparams"]["eta"] = 1e3;
  j["hyperparams"]["init_scale"] = 5.0;
  write_json(dir / "diverge.json", j);
  EXPECT_EQ(run_cli("run --config " + (dir / "diverge.json").string()), 4);

  fs::remove(dir / "quotes.csv");
  EXPECT_EQ(run_cli("ingest " + cfg), 3);
  EXPECT_TRUE(fs::exists(dir / "out" / outputs::kFailure));
  j = read_json(dir / "config.json");
  j["bogus"] = 1;
  write_json(dir / "bad.json", j);
  EXPECT_EQ(run_cli("run --config " + (dir / "bad.json").string()), 2);
}

TEST(Cli, SynthIsDeterministic) {
  auto dir = testing::scratch_dir("cli_synth");
  write_json(dir / "spec.json", synthetic_spec_to_json(tiny(2)));
  const std::string spec = "--config " + (dir / "spec.json").string();
  ASSERT_EQ(run_cli("synth " + spec + " --out " + (dir / "a").string()), 0);
  ASSERT_EQ(run_cli("synth " + spec + " --out " + (dir / "b").string()), 0);
  ASSERT_EQ(run_cli("synth " + spec + " --seed 3 --out " + (dir / "c").string()), 0);
  EXPECT_EQ(testing::slurp(dir / "a" / "quotes.csv"), testing::slurp(dir / "b" / "quotes.csv"));
  EXPECT_EQ(testing::slurp(dir / "a" / "truth.json"), testing::slurp(dir / "b" / "truth.json"));
  EXPECT_NE(testing::slurp(dir / "a" / "quotes.csv"), testing::slurp(dir / "c" / "quotes.csv"));
}

}  // namespace
}  // namespace cmtf
