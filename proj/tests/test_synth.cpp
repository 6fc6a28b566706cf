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

#include <filesystem>
#include <map>
#include <set>

#include "cmtf/error.hpp"
#include "cmtf/synth.hpp"
#include "test_util.hpp"

namespace cmtf {
namespace {

namespace fs = std::filesystem;

SyntheticSpec tiny(std::uint64_t seed) {
  SyntheticSpec s;
  s.n_stocks = 12;
  s.group_size = 4;
  s.n_events = 6;
  s.n_days = 40;
  s.ranks = {3, 3, 2};
  s.seed = seed;
  return s;
}

std::map<std::string, std::string> read_all(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = testing::slurp(e.path());
  return out;
}

TEST(Synth, ByteIdenticalPerSeed) {
  auto a = testing::scratch_dir("synth_a");
  auto b = testing::scratch_dir("synth_b");
  auto c = testing::scratch_dir("synth_c");
  write_synthetic(generate_synthetic(tiny(7)), a);
  write_synthetic(generate_synthetic(tiny(7)), b);
  write_synthetic(generate_synthetic(tiny(8)), c);
  const auto fa = read_all(a), fb = read_all(b), fc = read_all(c);
  for (const char* f : {"quotes.csv", "news.csv", "lexicon.json", "events.csv", "postings.csv", "tweets.csv",
                        "truth.json", "config.json"})
    EXPECT_TRUE(fa.count(f)) << f;
  EXPECT_EQ(fa, fb);
  EXPECT_NE(fa.at("quotes.csv"), fc.at("quotes.csv"));
}

TEST(Synth, FullStrengthGroupsMoveTogether) {
  auto s = tiny(3);
  s.correlation_strength = 1.0;
  const auto b = generate_synthetic(s);
  const auto panel = build_panel(b.quotes);
  auto dirs = [&](std::size_t i) {
    const auto& ser = panel.series[i];
    std::vector<int> d(ser.days.size(), 0);
    for (std::size_t t = 1; t < d.size(); ++t)
      if (ser.movement[t] != Movement::still) d[t] = ser.movement[t] == Movement::up ? 1 : -1;
    return d;
  };
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < s.n_stocks; ++i)
    for (std::size_t j = i + 1; j < s.n_stocks; ++j) {
      const auto gi = b.truth.group[*panel.index_of(b.stocks[i])];
      if (gi != b.truth.group[*panel.index_of(b.stocks[j])]) continue;
      ++pairs;
      const auto di = dirs(*panel.index_of(b.stocks[i]));
      const auto dj = dirs(*panel.index_of(b.stocks[j]));
      EXPECT_EQ(coevolve_direction(di, dj), 1.0);
    }
  EXPECT_EQ(pairs, 3u * 6u);
}

TEST(Synth, ContentsAreConsistent) {
  const auto b = generate_synthetic(tiny(4));
  EXPECT_EQ(b.stocks.size(), 12u);
  EXPECT_EQ(b.quotes.size(), 12u * 40u);
  const auto panel = build_panel(b.quotes);
  EXPECT_EQ(panel.calendar.size(), 40u);
  std::set<std::string> universe(b.stocks.begin(), b.stocks.end());
  for (const auto& e : b.events) {
    EXPECT_GE(e.category, 0);
    EXPECT_LT(e.category, 6);
    EXPECT_TRUE(universe.count(e.stock));
  }
  for (const auto& p : b.postings) {
    EXPECT_LE(p.pos_words, p.sent_words);
    EXPECT_LE(p.neg_words, p.sent_words);
  }
  std::size_t up = 0, down = 0;
  for (const auto& l : panel.labels()) {
    if (l.label == Movement::up) ++up;
    if (l.label == Movement::down) ++down;
  }
  EXPECT_GT(up, 50u);
  EXPECT_GT(down, 50u);
  const auto data = b.data();
  ASSERT_TRUE(data.tweets.has_value());
  EXPECT_EQ(data.event_categories, 6u);
}

TEST(Synth, PlantedModelShape) {
  auto s = tiny(5);
  const auto p = plant_model(s);
  EXPECT_EQ(p.prob.dims(), (Dims3{12, 6, 2}));
  EXPECT_EQ(p.model.ranks(), s.ranks);
  for (double v : p.prob.values()) {
    EXPECT_GE(v, 0.05);
    EXPECT_LE(v, 0.95);
  }
  s.spread = 0.0;
  const auto exact = plant_model(s);
  const auto rec = tucker_reconstruct(exact.model);
  for (std::size_t x = 0; x < rec.values().size(); ++x)
    EXPECT_NEAR(exact.prob.values()[x], rec.values()[x], 1e-12);
}

TEST(Synth, PlantedCompletionSplitsCells) {
  SyntheticSpec s;
  s.n_stocks = 20;
  s.n_events = 30;
  s.group_size = 1;
  s.spread = 0.0;
  s.seed = 6;
  const auto pc = planted_completion(s, 0.4);
  EXPECT_EQ(pc.observed.size(), 480u);
  EXPECT_EQ(pc.held_out.size(), 720u);
  for (const auto& e : pc.observed.entries()) EXPECT_EQ(e.value, pc.truth.prob(e.i, e.j, e.k));
  for (const auto& e : pc.held_out) {
    EXPECT_FALSE(pc.observed.contains(e.i, e.j, e.k));
    EXPECT_EQ(e.value, pc.truth.prob(e.i, e.j, e.k));
  }
  s.noise_level = 0.1;
  const auto noisy = planted_completion(s, 0.4);
  double diff = 0.0;
  for (const auto& e : noisy.observed.entries()) diff += std::abs(e.value - noisy.truth.prob(e.i, e.j, e.k));
  EXPECT_GT(diff / 480.0, 0.04);
}

TEST(Synth, PairTrialAgreement) {
  std::size_t agree = 0, common = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto t = make_pair_trial(seed);
    const auto panel = build_panel(t.quotes);
    ASSERT_EQ(panel.stocks.size(), 6u);
    const auto& a = panel.series[0];
    const auto& b = panel.series[1];
    for (std::size_t d = 1; d < a.days.size(); ++d) {
      if (a.movement[d] == Movement::still || b.movement[d] == Movement::still) continue;
      ++common;
      agree += a.movement[d] == b.movement[d];
    }
  }
  EXPECT_NEAR(static_cast<double>(agree) / static_cast<double>(common), 0.9, 0.02);
}

TEST(Synth, SpecValidation) {
  auto s = tiny(1);
  s.noise_level = 1.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = tiny(1);
  s.correlation_strength = 1.5;
  EXPECT_THROW(s.validate(), ConfigError);
  s = tiny(1);
  s.ranks = {3, 3, 3};
  EXPECT_THROW(s.validate(), ConfigError);
  s = tiny(1);
  s.n_stocks = 0;
  EXPECT_THROW(s.validate(), ConfigError);
  EXPECT_THROW(generate_synthetic(s), ConfigError);
}

TEST(Synth, SpecJsonRoundTrip) {
  auto s = tiny(9);
  s.noise_level = 0.2;
  auto back = synthetic_spec_from_json(synthetic_spec_to_json(s));
  EXPECT_EQ(synthetic_spec_to_json(back), synthetic_spec_to_json(s));
  EXPECT_THROW(synthetic_spec_from_json(nlohmann::json{{"n_stock", 3}}), ConfigError);
}

TEST(Synth, WeekdayCalendar) {
  const auto c = weekday_calendar("2024-01-05", 3);  // a Friday
  EXPECT_EQ(c, (std::vector<std::string>{"2024-01-05", "2024-01-08", "2024-01-09"}));
}

}  // namespace
}  // namespace cmtf
