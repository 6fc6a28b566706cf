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

#include "cmtf/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "cmtf/csv.hpp"
#include "cmtf/error.hpp"

namespace cmtf {

void Confusion::add(Movement predicted, Movement actual) {
  const bool p = predicted == Movement::up;
  const bool a = actual == Movement::up;
  if (p && a) ++tp;
  else if (p) ++fp;
  else if (a) ++fn;
  else ++tn;
}

double accuracy(const Confusion& c) {
  if (c.total() == 0) throw DataError("accuracy of an empty confusion matrix");
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

double mcc(const Confusion& c) {
  const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  const double fn = static_cast<double>(c.fn), tn = static_cast<double>(c.tn);
  const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (den == 0.0) return 0.0;
  return std::clamp((tp * tn - fp * fn) / std::sqrt(den), -1.0, 1.0);
}

std::string_view to_string(Ablation a) noexcept {
  switch (a) {
    case Ablation::full: return "full";
    case Ablation::no_z: return "no_z";
    case Ablation::no_z_no_x: return "no_z_no_x";
  }
  return "full";
}

Ablation parse_ablation(std::string_view s) {
  if (s == "full") return Ablation::full;
  if (s == "no_z") return Ablation::no_z;
  if (s == "no_z_no_x") return Ablation::no_z_no_x;
  throw ConfigError("unknown ablation '" + std::string(s) + "' (expected full, no_z or no_z_no_x)");
}

HyperParams apply_ablation(HyperParams h, Ablation a) {
  if (a != Ablation::full) h.lambda2 = 0.0;
  if (a == Ablation::no_z_no_x) h.lambda1 = 0.0;
  return h;
}

void BacktestConfig::validate() const {
  for (const auto* r : {&train_period, &test_period}) {
    if (!csv::is_iso_date(r->first) || !csv::is_iso_date(r->last)) {
      throw ConfigError("period bounds must be YYYY-MM-DD dates");
    }
    if (r->first > r->last) throw ConfigError("period " + r->first + ".." + r->last + " is reversed");
  }
  if (!(train_period.last < test_period.first)) {
    throw ConfigError("training period must end before the test period starts");
  }
  if (!(sentiment_threshold >= 0.0) || !std::isfinite(sentiment_threshold)) {
    throw ConfigError("sentiment_threshold must be finite and non-negative");
  }
}

std::pair<DateRange, DateRange> split_calendar(std::span<const std::string> calendar,
                                               double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must be in (0, 1)");
  if (calendar.size() < 2) throw DataError("need at least two trading days to split");
  auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(calendar.size())));
  n_train = std::clamp<std::size_t>(n_train, 1, calendar.size() - 1);
  return {DateRange{calendar.front(), calendar[n_train - 1]}, DateRange{calendar[n_train], calendar.back()}};
}

std::size_t event_axis_size(const DataBundle& b, const DateRange& train_period) {
  std::size_t m = std::max<std::size_t>(b.event_categories, 1);
  for (const auto& e : b.events)
    if (train_period.contains(e.day)) m = std::max(m, static_cast<std::size_t>(e.category) + 1);
  return m;
}

CorrelationMatrix stock_correlation(const MarketPanel& panel, CorrelationMethod method,
                                    const DateRange& period,
                                    const std::optional<std::vector<Tweet>>& tweets) {
  const std::size_t n = panel.stocks.size();
  Matrix raw(n, n);

  if (method == CorrelationMethod::perceived) {
    if (!tweets) throw ConfigError("correlation method 'perceived' requires a tweets file");
    std::vector<Tweet> in_period;
    for (const auto& tw : *tweets)
      if (period.contains(tw.day)) in_period.push_back(tw);
    return normalize_correlations(user_perceived(in_period, panel.stocks).counts, method);
  }

  if (method == CorrelationMethod::coupled) {
    std::vector<StockDayStatus> statuses;
    for (std::size_t s = 0; s < n; ++s) {
      const auto& ser = panel.series[s];
      for (std::size_t t = 1; t < ser.days.size(); ++t) {
        if (!period.contains(ser.days[t]) || ser.movement[t] == Movement::still) continue;
        statuses.push_back({s, ser.days[t], ser.movement[t] == Movement::up ? 1 : -1, ser.industry_dir[t]});
      }
    }
    return normalize_correlations(css_matrix(statuses, n), method);
  }

  std::map<std::string, std::size_t> day_index;
  for (const auto& d : panel.calendar)
    if (period.contains(d)) day_index.emplace(d, day_index.size());
  const std::size_t days = day_index.size();
  std::vector<std::vector<int>> dir(n, std::vector<int>(days, 0));
  std::vector<std::vector<double>> pchg(n, std::vector<double>(days, std::numeric_limits<double>::quiet_NaN()));
  for (std::size_t s = 0; s < n; ++s) {
    const auto& ser = panel.series[s];
    for (std::size_t t = 1; t < ser.days.size(); ++t) {
      auto it = day_index.find(ser.days[t]);
      if (it == day_index.end()) continue;
      pchg[s][it->second] = ser.pchange[t];
      if (ser.movement[t] != Movement::still) dir[s][it->second] = ser.movement[t] == Movement::up ? 1 : -1;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = 0.0;
      try {
        v = method == CorrelationMethod::direction ? coevolve_direction(dir[i], dir[j])
                                                   : coevolve_pchange(pchg[i], pchg[j]);
      } catch (const DataError&) {
        v = 0.0;  // no common days or a flat series: treat as uncorrelated
      }
      raw(i, j) = raw(j, i) = v;
    }
  return normalize_correlations(raw, method);
}

std::vector<TestSample> to_test_samples(std::span<const DailySignal> signals) {
  std::vector<TestSample> out;
  out.reserve(signals.size());
  for (const auto& s : signals) {
    out.push_back({s.day, s.stock, static_cast<std::size_t>(s.event), static_cast<std::size_t>(s.sentiment),
                   s.movement});
  }
  return out;
}

TrainingInputs prepare_inputs(const DataBundle& bundle, const BacktestConfig& config) {
  config.validate();
  TrainingInputs in;
  in.panel = build_panel(bundle.quotes);
  if (in.panel.stocks.empty()) throw DataError("no quotes to build a stock universe from");
  in.x = build_feature_matrix(bundle.quotes, in.panel.stocks, config.train_period);
  const Dims3 dims{in.panel.stocks.size(), event_axis_size(bundle, config.train_period), kSentimentAxis};
  const auto train_signals = extract_signals(in.panel, bundle.events, bundle.postings,
                                             config.sentiment_threshold, config.train_period);
  in.a = aggregate_upward_probability(build_daily_observations(train_signals), dims);
  const auto test_signals = extract_signals(in.panel, bundle.events, bundle.postings,
                                            config.sentiment_threshold, config.test_period);
  in.test_samples = to_test_samples(test_signals);
  return in;
}

ScoredPredictions score_predictions(const FactorModel& model, const SparseTensor3& a,
                                    std::span<const TestSample> samples,
                                    std::span<const std::string> stock_ids) {
  std::vector<bool> seen_event(a.dims().n1, false);
  for (const auto& e : a.entries()) seen_event[e.j] = true;

  ScoredPredictions out;
  out.rows.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.stock >= stock_ids.size()) throw DimensionError("test sample stock index out of range");
    PredictionRow row{s.day, stock_ids[s.stock], s.event, s.sentiment, 0.5, Movement::down, s.label, false};
    const bool known_event = s.event < seen_event.size() && seen_event[s.event];
    if (!known_event && !a.contains(s.stock, s.event, s.sentiment)) {
      row.cold = true;
      ++out.metrics.n_cold;
    } else {
      const Prediction p = predict_entry(model, s.stock, s.event, s.sentiment);
      row.prob_up = p.prob_up;
      row.pred = p.label;
    }
    out.metrics.confusion.add(row.pred, row.label);
    out.rows.push_back(std::move(row));
  }
  out.metrics.n_samples = samples.size();
  if (out.metrics.n_samples > 0) {
    out.metrics.acc = accuracy(out.metrics.confusion);
    out.metrics.mcc = mcc(out.metrics.confusion);
  }
  return out;
}

BacktestOutcome run_backtest(const DataBundle& bundle, const BacktestConfig& config,
                             const kernels::KernelTable& k) {
  TrainingInputs in = prepare_inputs(bundle, config);
  if (in.test_samples.empty()) throw DataError("test period has no up/down samples");
  const HyperParams h = apply_ablation(config.hyperparams, config.ablation);
  BacktestOutcome out;
  out.z = h.lambda2 != 0.0
              ? stock_correlation(in.panel, config.correlation_method, config.train_period, bundle.tweets)
              : CorrelationMatrix{Matrix::identity(in.panel.stocks.size()), config.correlation_method, false};
  out.training = train(in.a.tensor, in.x.values, out.z.values, h, k);
  auto scored = score_predictions(out.training.model, in.a.tensor, in.test_samples, in.panel.stocks);
  out.metrics = scored.metrics;
  out.predictions = std::move(scored.rows);
  return out;
}

}  // namespace cmtf
