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

#include "cmtf/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "cmtf/csv.hpp"
#include "cmtf/error.hpp"

namespace cmtf {

std::vector<QuoteRecord> read_quotes_csv(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path);
  const std::size_t c_day = t.column("day"), c_stock = t.column("stock"), c_close = t.column("close"),
                    c_turn = t.column("turnover"), c_pe = t.column("pe"), c_pb = t.column("pb"),
                    c_pcf = t.column("pcf"), c_ind = t.column("industry_close");
  std::vector<QuoteRecord> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    if (!csv::is_iso_date(r[c_day])) throw DataError(path.string() + ": bad date '" + r[c_day] + "'");
    QuoteRecord q;
    q.day = r[c_day];
    q.stock = r[c_stock];
    q.close = csv::parse_double(r[c_close], "close");
    q.turnover = csv::parse_optional_double(r[c_turn], "turnover");
    q.pe = csv::parse_optional_double(r[c_pe], "pe");
    q.pb = csv::parse_optional_double(r[c_pb], "pb");
    q.pcf = csv::parse_optional_double(r[c_pcf], "pcf");
    q.industry_close = csv::parse_double(r[c_ind], "industry_close");
    out.push_back(std::move(q));
  }
  return out;
}

void write_quotes_csv(const std::filesystem::path& path, std::span<const QuoteRecord> quotes) {
  auto opt = [](const std::optional<double>& x) { return x ? csv::format(*x) : std::string(); };
  std::vector<std::vector<std::string>> rows;
  rows.reserve(quotes.size());
  for (const auto& q : quotes) {
    rows.push_back({q.day, q.stock, csv::format(q.close), opt(q.turnover), opt(q.pe), opt(q.pb),
                    opt(q.pcf), csv::format(q.industry_close)});
  }
  csv::write(path, {"day", "stock", "close", "turnover", "pe", "pb", "pcf", "industry_close"}, rows);
}

std::vector<double> compute_pchange(std::span<const double> closes) {
  for (double c : closes)
    if (!(c > 0.0)) throw DataError("closing prices must be positive");
  std::vector<double> out;
  for (std::size_t t = 1; t < closes.size(); ++t) out.push_back(closes[t] / closes[t - 1] - 1.0);
  return out;
}

Movement classify_movement(double pchange) noexcept {
  if (pchange > kMovementThreshold) return Movement::up;
  if (pchange < -kMovementThreshold) return Movement::down;
  return Movement::still;
}

std::vector<Movement> label_movements(std::span<const double> pchanges) {
  std::vector<Movement> out;
  out.reserve(pchanges.size());
  for (double p : pchanges) out.push_back(classify_movement(p));
  return out;
}

int industry_direction(double prev, double cur) noexcept { return cur >= prev ? 1 : -1; }

std::optional<std::size_t> MarketPanel::index_of(const std::string& stock) const {
  auto it = std::lower_bound(stocks.begin(), stocks.end(), stock);
  if (it == stocks.end() || *it != stock) return std::nullopt;
  return static_cast<std::size_t>(it - stocks.begin());
}

std::vector<MovementLabel> MarketPanel::labels() const {
  std::vector<MovementLabel> out;
  for (const auto& s : series)
    for (std::size_t t = 1; t < s.days.size(); ++t) out.push_back({s.stock, s.days[t], s.movement[t], s.pchange[t]});
  return out;
}

MarketPanel build_panel(std::span<const QuoteRecord> quotes) {
  std::map<std::string, std::vector<const QuoteRecord*>> grouped;
  for (const auto& q : quotes) {
    if (!(q.close > 0.0) || !(q.industry_close > 0.0)) {
      throw DataError("non-positive price for " + q.stock + " on " + q.day);
    }
    grouped[q.stock].push_back(&q);
  }
  MarketPanel panel;
  for (auto& [stock, rows] : grouped) {
    std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->day < b->day; });
    StockSeries s;
    s.stock = stock;
    for (std::size_t t = 0; t < rows.size(); ++t) {
      if (t > 0 && rows[t]->day == rows[t - 1]->day) {
        throw DataError("duplicate quote for " + stock + " on " + rows[t]->day);
      }
      s.days.push_back(rows[t]->day);
      s.close.push_back(rows[t]->close);
      s.industry_close.push_back(rows[t]->industry_close);
    }
    const auto pch = compute_pchange(s.close);
    s.pchange.assign(1, std::numeric_limits<double>::quiet_NaN());
    s.pchange.insert(s.pchange.end(), pch.begin(), pch.end());
    s.movement.assign(1, Movement::still);
    const auto lab = label_movements(pch);
    s.movement.insert(s.movement.end(), lab.begin(), lab.end());
    s.industry_dir.assign(1, 0);
    for (std::size_t t = 1; t < s.days.size(); ++t)
      s.industry_dir.push_back(industry_direction(s.industry_close[t - 1], s.industry_close[t]));
    panel.stocks.push_back(stock);
    panel.series.push_back(std::move(s));
    for (const auto* r : rows) panel.calendar.push_back(r->day);
  }
  std::sort(panel.calendar.begin(), panel.calendar.end());
  panel.calendar.erase(std::unique(panel.calendar.begin(), panel.calendar.end()), panel.calendar.end());
  return panel;
}

std::vector<double> minmax_normalize(std::span<const double> column) {
  std::vector<double> out(column.size(), 0.5);
  if (column.empty()) return out;
  const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < column.size(); ++i) out[i] = std::clamp((column[i] - *lo) / range, 0.0, 1.0);
  return out;
}

namespace {

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

FeatureMatrix build_feature_matrix(std::span<const QuoteRecord> quotes,
                                   std::span<const std::string> stocks, const DateRange& period) {
  const std::size_t n = stocks.size();
  const std::size_t kf = kFeatureNames.size();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index.emplace(stocks[i], i);

  Matrix sum(n, kf), count(n, kf);
  std::vector<std::size_t> quote_count(n, 0);
  for (const auto& q : quotes) {
    if (!period.contains(q.day)) continue;
    auto it = index.find(q.stock);
    if (it == index.end()) continue;
    const std::size_t i = it->second;
    ++quote_count[i];
    const std::optional<double> fields[] = {q.turnover, q.pe, q.pb, q.pcf};
    for (std::size_t c = 0; c < kf; ++c) {
      if (fields[c] && std::isfinite(*fields[c]) && *fields[c] >= 0.0) {
        sum(i, c) += *fields[c];
        count(i, c) += 1.0;
      }
    }
  }
  if (std::all_of(quote_count.begin(), quote_count.end(), [](std::size_t c) { return c == 0; })) {
    throw DataError("no quotes in feature period " + period.first + ".." + period.last);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (quote_count[i] == 0) throw DataError("stock " + stocks[i] + " has no quote in the feature period");

  FeatureMatrix x{std::vector<std::string>(stocks.begin(), stocks.end()), kFeatureNames, Matrix(n, kf)};
  for (std::size_t c = 0; c < kf; ++c) {
    std::vector<double> means(n, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> valid;
    for (std::size_t i = 0; i < n; ++i)
      if (count(i, c) > 0.0) {
        means[i] = sum(i, c) / count(i, c);
        valid.push_back(means[i]);
      }
    const double fill = valid.empty() ? 0.0 : median(valid);
    for (double& m : means)
      if (std::isnan(m)) m = fill;
    const auto norm = minmax_normalize(means);
    for (std::size_t i = 0; i < n; ++i) x.values(i, c) = norm[i];
  }
  return x;
}

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& x) {
  std::vector<std::string> header{"stock"};
  header.insert(header.end(), x.features.begin(), x.features.end());
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < x.stocks.size(); ++i) {
    std::vector<std::string> r{x.stocks[i]};
    for (std::size_t c = 0; c < x.features.size(); ++c) r.push_back(csv::format(x.values(i, c)));
    rows.push_back(std::move(r));
  }
  csv::write(path, header, rows);
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path);
  if (t.header.empty() || t.header.front() != "stock") throw DataError(path.string() + ": first column must be 'stock'");
  FeatureMatrix x;
  x.features.assign(t.header.begin() + 1, t.header.end());
  x.values = Matrix(t.rows.size(), x.features.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    x.stocks.push_back(t.rows[i][0]);
    for (std::size_t c = 0; c < x.features.size(); ++c)
      x.values(i, c) = csv::parse_double(t.rows[i][c + 1], "feature");
  }
  return x;
}

}  // namespace cmtf
