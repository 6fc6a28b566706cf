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

#include "cmtf/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

#include "cmtf/csv.hpp"
#include "cmtf/error.hpp"

namespace cmtf {

namespace {
constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
}

AttributeTable::AttributeTable(std::vector<std::vector<int>> rows) : rows_(std::move(rows)) {
  attr_count_ = rows_.empty() ? 0 : rows_.front().size();
  for (const auto& r : rows_)
    if (r.size() != attr_count_) throw DataError("attribute table rows have different lengths");

  values_.resize(attr_count_);
  support_.resize(attr_count_);
  for (std::size_t a = 0; a < attr_count_; ++a) {
    auto& vals = values_[a];
    for (const auto& r : rows_) vals.push_back(r[a]);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    support_[a].assign(vals.size(), 0);
    for (const auto& r : rows_) ++support_[a][value_index(a, r[a])];
  }

  counts_.assign(attr_count_, std::vector<std::vector<std::size_t>>(attr_count_));
  for (std::size_t j = 0; j < attr_count_; ++j)
    for (std::size_t k = 0; k < attr_count_; ++k) {
      auto& c = counts_[j][k];
      const std::size_t vk = values_[k].size();
      c.assign(values_[j].size() * vk, 0);
      for (const auto& r : rows_) ++c[value_index(j, r[j]) * vk + value_index(k, r[k])];
    }
}

std::size_t AttributeTable::value_index(std::size_t attr, int x) const {
  const auto& vals = values_[attr];
  auto it = std::lower_bound(vals.begin(), vals.end(), x);
  if (it == vals.end() || *it != x) return npos;
  return static_cast<std::size_t>(it - vals.begin());
}

std::size_t AttributeTable::support(std::size_t attr, int x) const {
  if (attr >= attr_count_) throw DimensionError("attribute index out of range");
  const std::size_t xi = value_index(attr, x);
  return xi == npos ? 0 : support_[attr][xi];
}

std::size_t AttributeTable::cooccurrence(std::size_t j, int x, std::size_t k, int w) const {
  if (j >= attr_count_ || k >= attr_count_) throw DimensionError("attribute index out of range");
  const std::size_t xi = value_index(j, x);
  const std::size_t wi = value_index(k, w);
  if (xi == npos || wi == npos) return 0;
  return counts_[j][k][xi * values_[k].size() + wi];
}

namespace {

std::size_t require_support(const AttributeTable& t, std::size_t attr, int x) {
  const std::size_t s = t.support(attr, x);
  if (s == 0) {
    throw DataError("value " + std::to_string(x) + " does not occur in attribute " +
                    std::to_string(attr));
  }
  return s;
}

}  // namespace

double iaavs(const AttributeTable& t, std::size_t attr, int x, int y) {
  const double gx = static_cast<double>(require_support(t, attr, x));
  const double gy = static_cast<double>(require_support(t, attr, y));
  return gx * gy / (gx + gy + gx * gy);
}

double icp(const AttributeTable& t, std::size_t k, std::size_t j, std::span<const int> w_set, int x) {
  const std::size_t gx = t.support(j, x);
  if (gx == 0) throw DataError("empty conditioning support in icp");
  std::vector<int> ws(w_set.begin(), w_set.end());
  std::sort(ws.begin(), ws.end());
  ws.erase(std::unique(ws.begin(), ws.end()), ws.end());
  std::size_t hits = 0;
  for (int w : ws) hits += t.cooccurrence(j, x, k, w);
  return static_cast<double>(hits) / static_cast<double>(gx);
}

double relative_similarity(const AttributeTable& t, std::size_t j, std::size_t k, int x, int y) {
  const double gx = static_cast<double>(require_support(t, j, x));
  const double gy = static_cast<double>(require_support(t, j, y));
  double acc = 0.0;
  for (int w : t.values_of(k)) {
    const std::size_t cx = t.cooccurrence(j, x, k, w);
    const std::size_t cy = t.cooccurrence(j, y, k, w);
    if (cx == 0 || cy == 0) continue;
    acc += std::min(static_cast<double>(cx) / gx, static_cast<double>(cy) / gy);
  }
  return acc;
}

double ieavs(const AttributeTable& t, std::size_t attr, int x, int y, std::span<const double> weights) {
  const std::size_t n = t.attribute_count();
  if (attr >= n) throw DimensionError("attribute index out of range");
  require_support(t, attr, x);
  require_support(t, attr, y);
  if (n < 2) return 0.0;
  if (!weights.empty()) {
    if (weights.size() != n - 1) throw ConfigError("ieavs needs one weight per other attribute");
    double total = 0.0;
    for (double a : weights) {
      if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("ieavs weights must lie in [0,1]");
      total += a;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("ieavs weights must sum to 1");
  }
  const double uniform = 1.0 / static_cast<double>(n - 1);
  double acc = 0.0;
  std::size_t slot = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == attr) continue;
    const double alpha = weights.empty() ? uniform : weights[slot];
    ++slot;
    acc += alpha * relative_similarity(t, attr, k, x, y);
  }
  return acc;
}

double coupled_similarity(const AttributeTable& t, std::size_t a, std::size_t b) {
  if (a >= t.instance_count() || b >= t.instance_count()) throw DimensionError("instance index out of range");
  double acc = 0.0;
  for (std::size_t k = 0; k < t.attribute_count(); ++k) {
    const int x = t.value(a, k);
    const int y = t.value(b, k);
    acc += iaavs(t, k, x, y) * ieavs(t, k, x, y);
  }
  return acc;
}

// ---------------------------------------------------------------------------

AttributeTable status_table(std::span<const StockDayStatus> day) {
  std::vector<std::vector<int>> rows;
  rows.reserve(day.size());
  for (const auto& s : day) rows.push_back({s.price_dir, s.industry_dir});
  return AttributeTable(std::move(rows));
}

double css_day(const StockDayStatus& si, const StockDayStatus& sj, const AttributeTable& table) {
  if (table.attribute_count() != 2) throw DataError("status table must have two attributes");
  const int vi[2] = {si.price_dir, si.industry_dir};
  const int vj[2] = {sj.price_dir, sj.industry_dir};
  for (std::size_t k = 0; k < 2; ++k) {
    if (table.support(k, vi[k]) == 0 || table.support(k, vj[k]) == 0) {
      throw DataError("stock status missing from the day's table");
    }
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < 2; ++k) acc += iaavs(table, k, vi[k], vj[k]) * ieavs(table, k, vi[k], vj[k]);
  return acc;
}

namespace {

std::map<std::string, std::vector<StockDayStatus>> by_day(std::span<const StockDayStatus> statuses) {
  std::map<std::string, std::vector<StockDayStatus>> days;
  for (const auto& s : statuses) days[s.day].push_back(s);
  return days;
}

}  // namespace

double css_period(std::span<const StockDayStatus> statuses, std::size_t i, std::size_t j) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& [day, list] : by_day(statuses)) {
    const StockDayStatus* si = nullptr;
    const StockDayStatus* sj = nullptr;
    for (const auto& s : list) {
      if (s.stock == i) si = &s;
      if (s.stock == j) sj = &s;
    }
    if (!si || !sj) continue;
    sum += css_day(*si, *sj, status_table(list));
    ++count;
  }
  if (count == 0) throw DataError("stocks have no common day");
  return sum / static_cast<double>(count);
}

Matrix css_matrix(std::span<const StockDayStatus> statuses, std::size_t n_stocks) {
  Matrix sum(n_stocks, n_stocks);
  Matrix count(n_stocks, n_stocks);
  for (const auto& [day, list] : by_day(statuses)) {
    const AttributeTable table = status_table(list);
    for (std::size_t a = 0; a < list.size(); ++a)
      for (std::size_t b = a + 1; b < list.size(); ++b) {
        const std::size_t i = list[a].stock;
        const std::size_t j = list[b].stock;
        if (i >= n_stocks || j >= n_stocks) throw DimensionError("status stock index out of range");
        const double c = css_day(list[a], list[b], table);
        sum(i, j) += c;
        sum(j, i) += c;
        count(i, j) += 1.0;
        count(j, i) += 1.0;
      }
  }
  Matrix out(n_stocks, n_stocks);
  for (std::size_t i = 0; i < n_stocks; ++i)
    for (std::size_t j = 0; j < n_stocks; ++j)
      if (i != j && count(i, j) > 0.0) out(i, j) = sum(i, j) / count(i, j);
  return out;
}

double coevolve_direction(std::span<const int> dir_i, std::span<const int> dir_j) {
  if (dir_i.size() != dir_j.size()) throw DimensionError("direction series are not aligned");
  std::size_t common = 0;
  std::size_t agree = 0;
  for (std::size_t t = 0; t < dir_i.size(); ++t) {
    if (dir_i[t] == 0 || dir_j[t] == 0) continue;
    ++common;
    if ((dir_i[t] > 0) == (dir_j[t] > 0)) ++agree;
  }
  if (common == 0) throw DataError("direction series have no common day");
  return static_cast<double>(agree) / static_cast<double>(common);
}

double coevolve_pchange(std::span<const double> pchg_i, std::span<const double> pchg_j) {
  if (pchg_i.size() != pchg_j.size()) throw DimensionError("p-change series are not aligned");
  std::vector<double> a, b;
  for (std::size_t t = 0; t < pchg_i.size(); ++t) {
    if (std::isnan(pchg_i[t]) || std::isnan(pchg_j[t])) continue;
    a.push_back(pchg_i[t]);
    b.push_back(pchg_j[t]);
  }
  if (a.size() < 2) throw DataError("Pearson correlation needs at least two common days");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const double da = a[t] - ma;
    const double db = b[t] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw DataError("Pearson correlation undefined for a constant series");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<Tweet> read_tweets_csv(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path);
  const std::size_t c_day = t.column("day"), c_tick = t.column("tickers");
  std::vector<Tweet> out;
  for (const auto& r : t.rows) {
    Tweet tw{r[c_day], {}};
    for (auto& tick : csv::split(r[c_tick], ';'))
      if (!tick.empty()) tw.tickers.push_back(std::move(tick));
    out.push_back(std::move(tw));
  }
  return out;
}

void write_tweets_csv(const std::filesystem::path& path, std::span<const Tweet> tweets) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& tw : tweets) {
    std::string joined;
    for (std::size_t a = 0; a < tw.tickers.size(); ++a) joined += (a ? ";" : "") + tw.tickers[a];
    rows.push_back({tw.day, joined});
  }
  csv::write(path, {"day", "tickers"}, rows);
}

CooccurrenceCounts user_perceived(std::span<const Tweet> tweets, std::span<const std::string> universe) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < universe.size(); ++i) index.emplace(universe[i], i);
  CooccurrenceCounts out{Matrix(universe.size(), universe.size()), 0, 0};
  for (const auto& tw : tweets) {
    std::vector<std::string> distinct;
    for (const auto& t : tw.tickers)
      if (std::find(distinct.begin(), distinct.end(), t) == distinct.end()) distinct.push_back(t);
    if (distinct.size() > kMaxTickersPerTweet) {
      ++out.dropped_tweets;
      continue;
    }
    std::vector<std::size_t> known;
    for (const auto& t : distinct) {
      auto it = index.find(t);
      if (it == index.end()) {
        ++out.dropped_tickers;
      } else {
        known.push_back(it->second);
      }
    }
    for (std::size_t a = 0; a < known.size(); ++a)
      for (std::size_t b = a + 1; b < known.size(); ++b) {
        out.counts(known[a], known[b]) += 1.0;
        out.counts(known[b], known[a]) += 1.0;
      }
  }
  return out;
}

std::string_view to_string(CorrelationMethod m) noexcept {
  switch (m) {
    case CorrelationMethod::coupled:
      return "coupled";
    case CorrelationMethod::direction:
      return "direction";
    case CorrelationMethod::pchange:
      return "pchange";
    case CorrelationMethod::perceived:
      return "perceived";
  }
  return "coupled";
}

CorrelationMethod parse_correlation_method(std::string_view s) {
  for (auto m : {CorrelationMethod::coupled, CorrelationMethod::direction, CorrelationMethod::pchange,
                 CorrelationMethod::perceived})
    if (to_string(m) == s) return m;
  throw ConfigError("unknown correlation method '" + std::string(s) + "'");
}

CorrelationMatrix normalize_correlations(const Matrix& raw, CorrelationMethod method) {
  if (raw.rows() != raw.cols()) throw DimensionError("correlation matrix must be square");
  const std::size_t n = raw.rows();
  Matrix z(n, n);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double v = 0.5 * (raw(i, j) + raw(j, i));
      if (method == CorrelationMethod::pchange) {
        if (!(v >= -1.0 - 1e-12 && v <= 1.0 + 1e-12)) throw DataError("Pearson value outside [-1,1]");
        v = 0.5 * (std::clamp(v, -1.0, 1.0) + 1.0);
      }
      if (!(v >= 0.0) || !std::isfinite(v)) throw DataError("raw correlations must be finite and non-negative");
      z(i, j) = v;
      peak = std::max(peak, v);
    }
  CorrelationMatrix out{Matrix::identity(n), method, false};
  if (peak <= 0.0) {
    out.degenerate = true;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) out.values(i, j) = z(i, j) / peak;
  return out;
}

std::vector<Neighbor> top_neighbors(const CorrelationMatrix& z, std::size_t stock, std::size_t k) {
  const std::size_t n = z.values.rows();
  if (stock >= n) throw DimensionError("stock index out of range");
  std::vector<std::size_t> others;
  for (std::size_t j = 0; j < n; ++j)
    if (j != stock) others.push_back(j);
  std::stable_sort(others.begin(), others.end(), [&](std::size_t a, std::size_t b) {
    return z.values(stock, a) > z.values(stock, b);
  });
  std::vector<Neighbor> out;
  for (std::size_t r = 0; r < std::min(k, others.size()); ++r)
    out.push_back({r + 1, others[r], z.values(stock, others[r])});
  return out;
}

}  // namespace cmtf
