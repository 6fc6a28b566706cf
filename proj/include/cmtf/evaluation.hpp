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

// Backtest harness: chronological split, training per ablation, prediction of
// test-day movements and ACC/MCC scoring.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmtf/correlation.hpp"
#include "cmtf/factorizer.hpp"
#include "cmtf/market_data.hpp"
#include "cmtf/signals.hpp"

namespace cmtf {

/// Binary confusion counts with "up" as the positive class.
struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
  void add(Movement predicted, Movement actual);
  bool operator==(const Confusion&) const = default;
};

/// (tp + tn) / total; throws DataError on an empty confusion.
double accuracy(const Confusion& c);

/// Matthews correlation; 0 when any marginal is empty.
double mcc(const Confusion& c);

enum class Ablation { full, no_z, no_z_no_x };

std::string_view to_string(Ablation a) noexcept;
/// Accepts full, no_z, no_z_no_x; throws ConfigError otherwise.
Ablation parse_ablation(std::string_view s);

/// no_z zeroes lambda2, no_z_no_x zeroes lambda1 and lambda2.
HyperParams apply_ablation(HyperParams h, Ablation a);

struct BacktestConfig {
  DateRange train_period;
  DateRange test_period;
  Ablation ablation = Ablation::full;
  CorrelationMethod correlation_method = CorrelationMethod::coupled;
  HyperParams hyperparams;
  double sentiment_threshold = 0.0;

  /// Throws ConfigError unless both ranges are ordered and train ends before test starts.
  void validate() const;
};

/// Splits a sorted calendar so the first `train_fraction` of days train.
std::pair<DateRange, DateRange> split_calendar(std::span<const std::string> calendar,
                                               double train_fraction);

struct DataBundle {
  std::vector<QuoteRecord> quotes;
  std::vector<EventRecord> events;
  std::vector<PostingRecord> postings;
  std::optional<std::vector<Tweet>> tweets;
  std::size_t event_categories = 0;  // 0: one past the largest category seen
};

/// Event axis size for a bundle.
std::size_t event_axis_size(const DataBundle& b, const DateRange& train_period);

/// Z for the stocks of `panel` from data inside `period`.
CorrelationMatrix stock_correlation(const MarketPanel& panel, CorrelationMethod method,
                                    const DateRange& period,
                                    const std::optional<std::vector<Tweet>>& tweets);

struct TestSample {
  std::string day;
  std::size_t stock = 0;
  std::size_t event = 0;
  std::size_t sentiment = 0;
  Movement label = Movement::up;
};

/// Everything the trainer sees, built from the training period only.
struct TrainingInputs {
  MarketPanel panel;
  FeatureMatrix x;
  UpwardTensor a;
  std::vector<TestSample> test_samples;
};

TrainingInputs prepare_inputs(const DataBundle& bundle, const BacktestConfig& config);

std::vector<TestSample> to_test_samples(std::span<const DailySignal> signals);

struct PredictionRow {
  std::string day;
  std::string stock;
  std::size_t event = 0;
  std::size_t sentiment = 0;
  double prob_up = 0.0;
  Movement pred = Movement::down;
  Movement label = Movement::down;
  bool cold = false;
};

struct MetricsReport {
  double acc = 0.0;
  double mcc = 0.0;
  Confusion confusion;
  std::size_t n_samples = 0;
  std::size_t n_cold = 0;
};

struct ScoredPredictions {
  MetricsReport metrics;
  std::vector<PredictionRow> rows;
};

/// Predicts every sample. A sample whose cell is absent from `a` and whose
/// event never occurs in `a` is cold: prob_up 0.5, predicted down.
ScoredPredictions score_predictions(const FactorModel& model, const SparseTensor3& a,
                                    std::span<const TestSample> samples,
                                    std::span<const std::string> stock_ids);

struct BacktestOutcome {
  MetricsReport metrics;
  std::vector<PredictionRow> predictions;
  TrainResult training;
  CorrelationMatrix z;
};

/// Throws DataError on an empty test set; DivergenceError propagates.
BacktestOutcome run_backtest(const DataBundle& bundle, const BacktestConfig& config,
                             const kernels::KernelTable& k = kernels::active());

}  // namespace cmtf
