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

// Stock correlation estimators and the coupled attribute value similarity
// they are built on.
//
// An AttributeTable is an information table: m instances, each carrying one
// categorical value per attribute. For attribute j and value x, g_j(x) is the
// set of instances holding x. The intra-coupled similarity of two values
// compares their frequencies; the inter-coupled similarity compares the
// distributions of the other attributes' values among the instances that
// hold them.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmtf/matrix.hpp"

namespace cmtf {

class AttributeTable {
 public:
  /// rows[instance][attribute]; every row must have the same length.
  explicit AttributeTable(std::vector<std::vector<int>> rows);

  std::size_t instance_count() const noexcept { return rows_.size(); }
  std::size_t attribute_count() const noexcept { return attr_count_; }
  int value(std::size_t instance, std::size_t attr) const { return rows_[instance][attr]; }

  /// Distinct values of an attribute, ascending.
  std::span<const int> values_of(std::size_t attr) const { return values_[attr]; }

  /// |g_attr(x)|, zero when x does not occur.
  std::size_t support(std::size_t attr, int x) const;

  /// |g_j(x) intersect g_k(w)|.
  std::size_t cooccurrence(std::size_t j, int x, std::size_t k, int w) const;

 private:
  std::size_t value_index(std::size_t attr, int x) const;  // npos when absent

  std::size_t attr_count_ = 0;
  std::vector<std::vector<int>> rows_;
  std::vector<std::vector<int>> values_;
  std::vector<std::vector<std::size_t>> support_;
  // counts_[j][k][xi * |V_k| + wi]
  std::vector<std::vector<std::vector<std::size_t>>> counts_;
};

/// Intra-coupled similarity |g(x)||g(y)| / (|g(x)| + |g(y)| + |g(x)||g(y)|).
double iaavs(const AttributeTable& t, std::size_t attr, int x, int y);

/// Information conditional probability P_{k|j}(W | x) = |g_k*(W) n g_j(x)| / |g_j(x)|.
double icp(const AttributeTable& t, std::size_t k, std::size_t j, std::span<const int> w_set, int x);

/// Relative similarity of values x, y of attribute j with respect to attribute k.
double relative_similarity(const AttributeTable& t, std::size_t j, std::size_t k, int x, int y);

/// Inter-coupled similarity: weighted sum of relative similarities over the
/// other attributes. `weights` lists one weight per other attribute in
/// attribute order; empty means uniform 1/(n-1).
double ieavs(const AttributeTable& t, std::size_t attr, int x, int y,
             std::span<const double> weights = {});

/// Coupled similarity of two instances: sum over attributes of iaavs * ieavs.
double coupled_similarity(const AttributeTable& t, std::size_t a, std::size_t b);

// ---------------------------------------------------------------------------
// Stock correlation

/// One stock on one non-still day: price direction and industry-index direction.
struct StockDayStatus {
  std::size_t stock = 0;
  std::string day;
  int price_dir = 1;     // +1 up, -1 down
  int industry_dir = 1;  // +1 up, -1 down
};

/// Table with attributes (price_dir, industry_dir), one instance per status.
AttributeTable status_table(std::span<const StockDayStatus> day);

/// Coupled stock similarity of two statuses within one day's table.
double css_day(const StockDayStatus& si, const StockDayStatus& sj, const AttributeTable& table);

/// Mean css_day over the days on which both stocks have a status.
double css_period(std::span<const StockDayStatus> statuses, std::size_t i, std::size_t j);

/// All pairs at once: raw N x N matrix of period-averaged CSS (diagonal 0).
/// Pairs without a common day get 0.
Matrix css_matrix(std::span<const StockDayStatus> statuses, std::size_t n_stocks);

/// Fraction of common days on which two direction series agree. Series are
/// aligned by index; 0 marks a missing or still day.
double coevolve_direction(std::span<const int> dir_i, std::span<const int> dir_j);

/// Pearson correlation of aligned p-change series; NaN marks a missing day.
double coevolve_pchange(std::span<const double> pchg_i, std::span<const double> pchg_j);

struct Tweet {
  std::string day;
  std::vector<std::string> tickers;
};

struct CooccurrenceCounts {
  Matrix counts;              // N x N, symmetric, zero diagonal
  std::size_t dropped_tickers = 0;  // mentions outside the universe
  std::size_t dropped_tweets = 0;   // tweets over the ticker limit
};

inline constexpr std::size_t kMaxTickersPerTweet = 5;

/// `day,tickers` with ';'-separated tickers.
std::vector<Tweet> read_tweets_csv(const std::filesystem::path& path);
void write_tweets_csv(const std::filesystem::path& path, std::span<const Tweet> tweets);

/// Pairwise co-mention counts; tweets naming more than five distinct tickers
/// are discarded.
CooccurrenceCounts user_perceived(std::span<const Tweet> tweets,
                                  std::span<const std::string> universe);

enum class CorrelationMethod { coupled, direction, pchange, perceived };

std::string_view to_string(CorrelationMethod m) noexcept;
CorrelationMethod parse_correlation_method(std::string_view s);

struct CorrelationMatrix {
  Matrix values;
  CorrelationMethod method = CorrelationMethod::coupled;
  bool degenerate = false;  // raw input had no positive off-diagonal entry
};

/// Symmetrizes, maps Pearson values r to (r+1)/2, scales off-diagonals by
/// their maximum and sets the diagonal to 1. An all-zero input yields the
/// identity with `degenerate` set.
CorrelationMatrix normalize_correlations(const Matrix& raw, CorrelationMethod method);

struct Neighbor {
  std::size_t rank = 0;  // 1-based
  std::size_t stock = 0;
  double correlation = 0.0;
};

/// Top-k most correlated other stocks of `stock`, ties broken by index.
std::vector<Neighbor> top_neighbors(const CorrelationMatrix& z, std::size_t stock, std::size_t k);

}  // namespace cmtf
