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

// Quote ingestion: p-change, the 2% movement rule, industry direction and the
// normalized quantitative feature matrix X.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmtf/matrix.hpp"
#include "cmtf/movement.hpp"

namespace cmtf {

struct QuoteRecord {
  std::string day;  // YYYY-MM-DD
  std::string stock;
  double close = 0.0;
  std::optional<double> turnover;
  std::optional<double> pe;
  std::optional<double> pb;
  std::optional<double> pcf;
  double industry_close = 0.0;
};

/// Reads `day,stock,close,turnover,pe,pb,pcf,industry_close`; empty = missing.
std::vector<QuoteRecord> read_quotes_csv(const std::filesystem::path& path);
void write_quotes_csv(const std::filesystem::path& path, std::span<const QuoteRecord> quotes);

/// Inclusive day range on ISO dates.
struct DateRange {
  std::string first;
  std::string last;

  bool contains(const std::string& day) const { return first <= day && day <= last; }
  bool operator==(const DateRange&) const = default;
};

inline constexpr double kMovementThreshold = 0.02;

/// close_t / close_{t-1} - 1 for t >= 1; the result has one fewer element.
std::vector<double> compute_pchange(std::span<const double> closes);

Movement classify_movement(double pchange) noexcept;
std::vector<Movement> label_movements(std::span<const double> pchanges);

/// sign(cur - prev) with a zero change mapped to +1.
int industry_direction(double prev, double cur) noexcept;

struct MovementLabel {
  std::string stock;
  std::string day;
  Movement label = Movement::still;
  double pchange = 0.0;
};

/// One stock's quotes in day order with derived per-day quantities. Index 0
/// has no previous close: pchange is NaN, movement is still and industry_dir 0.
struct StockSeries {
  std::string stock;
  std::vector<std::string> days;
  std::vector<double> close;
  std::vector<double> industry_close;
  std::vector<double> pchange;
  std::vector<Movement> movement;
  std::vector<int> industry_dir;
};

struct MarketPanel {
  std::vector<std::string> stocks;  // sorted ids; index = stock index
  std::vector<StockSeries> series;
  std::vector<std::string> calendar;  // sorted union of all days

  std::optional<std::size_t> index_of(const std::string& stock) const;
  std::vector<MovementLabel> labels() const;
};

/// Groups and orders quotes per stock. Throws DataError on a non-positive
/// close or a repeated (stock, day).
MarketPanel build_panel(std::span<const QuoteRecord> quotes);

struct FeatureMatrix {
  std::vector<std::string> stocks;
  std::vector<std::string> features;
  Matrix values;  // stocks x features, each column in [0, 1]
};

inline const std::vector<std::string> kFeatureNames{"turnover", "pe", "pb", "pcf"};

/// Per-stock period means of the four features, median-imputed where a stock
/// has no valid (present, non-negative) value, then min-max normalized per
/// column; constant columns become 0.5.
FeatureMatrix build_feature_matrix(std::span<const QuoteRecord> quotes,
                                   std::span<const std::string> stocks, const DateRange& period);

/// Min-max normalization of one column; constant columns map to 0.5.
std::vector<double> minmax_normalize(std::span<const double> column);

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& x);
FeatureMatrix read_feature_csv(const std::filesystem::path& path);

}  // namespace cmtf
