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

#pragma once

// Synthetic data with a planted factor model: grouped stocks sharing latent
// rows, movements drawn from planted upward probabilities, and the quotes,
// news, postings and tweets files the pipeline ingests.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmtf/correlation.hpp"
#include "cmtf/evaluation.hpp"
#include "cmtf/market_data.hpp"
#include "cmtf/signals.hpp"
#include "cmtf/tensor.hpp"

namespace cmtf {

struct SyntheticSpec {
  std::size_t n_stocks = 96;
  std::size_t n_events = 20;  // event axis size, category 0 included
  std::size_t n_days = 100;
  Ranks ranks{5, 5, 2};
  double noise_level = 0.0;           // probability a movement is replaced by a coin flip
  double correlation_strength = 0.9;  // probability a member follows its group direction
  std::uint64_t seed = 0;
  std::size_t group_size = 8;
  double no_event_rate = 0.3;
  double still_rate = 0.1;
  double spread = 0.4;                // sd of the planted deviation from 0.5; 0 = exact low rank
  double feature_noise = 0.5;         // per-stock noise on planted features, in feature sd units
  std::string start_day = "2024-01-02";

  /// Throws ConfigError on out-of-range fields.
  void validate() const;
};

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j, SyntheticSpec defaults = {});
nlohmann::json synthetic_spec_to_json(const SyntheticSpec& s);

struct PlantedModel {
  FactorModel model;                // f holds the planted feature loadings
  std::vector<std::size_t> group;   // group of each stock
  DenseTensor3 prob;                // planted upward probabilities, in [0.05, 0.95]
};

/// Planted Tucker model whose reconstruction is 0.5 plus a deviation with
/// standard deviation `spread`, clipped to [0.05, 0.95]. With spread 0 the
/// deviation is scaled to a maximum magnitude of 0.45 so nothing is clipped
/// and the tensor is exactly low rank. Stocks of one group share their U row.
PlantedModel plant_model(const SyntheticSpec& spec);

struct SyntheticBundle {
  SyntheticSpec spec;
  std::vector<std::string> stocks;
  std::vector<QuoteRecord> quotes;
  std::vector<NewsItem> news;
  EventLexicon lexicon;
  std::vector<EventRecord> events;  // news classified through the lexicon
  std::vector<PostingRecord> postings;
  std::vector<Tweet> tweets;
  PlantedModel truth;

  DataBundle data() const;
};

/// Deterministic per spec.seed.
SyntheticBundle generate_synthetic(const SyntheticSpec& spec);

/// Pipeline config (as JSON, paths relative to the bundle) with settings
/// suited to the bundle: true ranks, perceived correlations and a short
/// training window.
nlohmann::json synthetic_run_config(const SyntheticSpec& s);

/// Writes quotes.csv, news.csv, lexicon.json, events.csv, postings.csv,
/// tweets.csv, truth.json and a ready-to-run config.json into `dir`.
void write_synthetic(const SyntheticBundle& b, const std::filesystem::path& dir);

struct PlantedCompletion {
  PlantedModel truth;
  SparseTensor3 observed;
  std::vector<TensorEntry> held_out;  // true values of the unobserved cells
};

/// Observes round(fraction * size) cells of the planted tensor; each observed
/// value gets Gaussian noise of sd spec.noise_level, clamped to [0, 1].
PlantedCompletion planted_completion(const SyntheticSpec& spec, double observe_fraction);

struct PairTrial {
  std::vector<QuoteRecord> quotes;
  std::vector<Tweet> tweets;
};

/// Stocks 0 and 1 agree in direction on a fraction `agreement` of days in
/// expectation; the remaining stocks move independently.
PairTrial make_pair_trial(std::uint64_t seed, double agreement = 0.9, std::size_t n_days = 250,
                          std::size_t n_independent = 4);

/// Consecutive weekdays starting at `start` (YYYY-MM-DD).
std::vector<std::string> weekday_calendar(const std::string& start, std::size_t n);

}  // namespace cmtf
