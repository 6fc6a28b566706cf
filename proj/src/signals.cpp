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

#include "cmtf/signals.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <tuple>

#include <json.hpp>

#include "cmtf/csv.hpp"
#include "cmtf/error.hpp"

namespace cmtf {

EventLexicon::EventLexicon(std::map<std::string, int> tokens, std::size_t category_count)
    : tokens_(std::move(tokens)) {
  int top = 0;
  for (const auto& [tok, cat] : tokens_) {
    if (cat < 1) throw DataError("lexicon token '" + tok + "' maps to reserved or negative category");
    top = std::max(top, cat);
  }
  category_count_ = std::max<std::size_t>(category_count, static_cast<std::size_t>(top) + 1);
}

EventLexicon EventLexicon::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw DataError(path.string() + ": lexicon must be a JSON object");
  std::map<std::string, int> tokens;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number_integer()) throw DataError(path.string() + ": category for '" + it.key() + "' is not an integer");
    tokens.emplace(it.key(), it.value().get<int>());
  }
  return EventLexicon(std::move(tokens));
}

std::optional<int> EventLexicon::lookup(const std::string& token) const {
  auto it = tokens_.find(token);
  if (it == tokens_.end()) return std::nullopt;
  return it->second;
}

int assign_event(std::span<const std::string> tokens, const EventLexicon& lexicon) {
  for (const auto& t : tokens)
    if (auto c = lexicon.lookup(t)) return *c;
  return 0;
}

std::vector<EventRecord> read_events_csv(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path);
  const std::size_t c_day = t.column("day"), c_stock = t.column("stock"), c_cat = t.column("category");
  std::vector<EventRecord> out;
  for (const auto& r : t.rows) {
    const long long cat = csv::parse_int(r[c_cat], "category");
    if (cat < 0) throw DataError(path.string() + ": negative event category");
    out.push_back({r[c_day], r[c_stock], static_cast<int>(cat)});
  }
  return out;
}

void write_events_csv(const std::filesystem::path& path, std::span<const EventRecord> events) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& e : events) rows.push_back({e.day, e.stock, std::to_string(e.category)});
  csv::write(path, {"day", "stock", "category"}, rows);
}

std::vector<EventRecord> read_news_csv(const std::filesystem::path& path, const EventLexicon& lexicon) {
  const csv::Table t = csv::read(path);
  const std::size_t c_day = t.column("day"), c_stock = t.column("stock"), c_tok = t.column("tokens");
  std::vector<EventRecord> out;
  for (const auto& r : t.rows) {
    const auto tokens = csv::split(r[c_tok], ';');
    out.push_back({r[c_day], r[c_stock], assign_event(tokens, lexicon)});
  }
  return out;
}

void write_news_csv(const std::filesystem::path& path, std::span<const NewsItem> news) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& n : news) {
    std::string joined;
    for (std::size_t a = 0; a < n.tokens.size(); ++a) joined += (a ? ";" : "") + n.tokens[a];
    rows.push_back({n.day, n.stock, joined});
  }
  csv::write(path, {"day", "stock", "tokens"}, rows);
}

void write_lexicon_json(const std::filesystem::path& path, const EventLexicon& lexicon) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [tok, cat] : lexicon.tokens()) j[tok] = cat;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

int resolve_daily_event(std::span<const int> categories) {
  int best = 0;
  std::size_t best_count = 0;
  for (std::size_t a = 0; a < categories.size(); ++a) {
    if (categories[a] == 0) continue;
    const auto c = static_cast<std::size_t>(std::count(categories.begin(), categories.end(), categories[a]));
    if (c > best_count) {
      best = categories[a];
      best_count = c;
    }
  }
  return best;
}

std::vector<PostingRecord> read_postings_csv(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path);
  const std::size_t c_day = t.column("day"), c_stock = t.column("stock"), c_pos = t.column("pos_words"),
                    c_neg = t.column("neg_words"), c_sent = t.column("sent_words"),
                    c_click = t.column("clicks"), c_com = t.column("comments");
  std::vector<PostingRecord> out;
  for (const auto& r : t.rows) {
    PostingRecord p{r[c_day],
                    r[c_stock],
                    csv::parse_int(r[c_pos], "pos_words"),
                    csv::parse_int(r[c_neg], "neg_words"),
                    csv::parse_int(r[c_sent], "sent_words"),
                    csv::parse_int(r[c_click], "clicks"),
                    csv::parse_int(r[c_com], "comments")};
    if (p.pos_words < 0 || p.neg_words < 0 || p.clicks < 0 || p.comments < 0 ||
        p.pos_words > p.sent_words || p.neg_words > p.sent_words) {
      throw DataError(path.string() + ": inconsistent word counts for " + p.stock + " on " + p.day);
    }
    out.push_back(std::move(p));
  }
  return out;
}

void write_postings_csv(const std::filesystem::path& path, std::span<const PostingRecord> postings) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : postings) {
    rows.push_back({p.day, p.stock, std::to_string(p.pos_words), std::to_string(p.neg_words),
                    std::to_string(p.sent_words), std::to_string(p.clicks), std::to_string(p.comments)});
  }
  csv::write(path, {"day", "stock", "pos_words", "neg_words", "sent_words", "clicks", "comments"}, rows);
}

std::string_view to_string(Polarity p) noexcept {
  return p == Polarity::positive ? "positive" : "negative";
}

double posting_weight(const PostingRecord& p) {
  return 1.0 + std::log1p(static_cast<double>(p.clicks + p.comments));
}

double sentiment_value(std::span<const PostingRecord> postings, Polarity polarity) {
  double acc = 0.0;
  for (const auto& p : postings) {
    if (p.sent_words <= 0) continue;
    const auto words = polarity == Polarity::positive ? p.pos_words : p.neg_words;
    acc += static_cast<double>(words) / static_cast<double>(p.sent_words) * posting_weight(p);
  }
  return acc;
}

Polarity sentiment_polarity(double pos_value, double neg_value, double threshold) {
  return pos_value - neg_value > threshold ? Polarity::positive : Polarity::negative;
}

std::vector<DailySignal> extract_signals(const MarketPanel& panel, std::span<const EventRecord> events,
                                         std::span<const PostingRecord> postings,
                                         double sentiment_threshold, const DateRange& period) {
  using Key = std::pair<std::string, std::string>;  // (stock, day)
  std::map<Key, std::vector<int>> day_events;
  for (const auto& e : events)
    if (period.contains(e.day)) day_events[{e.stock, e.day}].push_back(e.category);
  std::map<Key, std::vector<PostingRecord>> day_posts;
  for (const auto& p : postings)
    if (period.contains(p.day)) day_posts[{p.stock, p.day}].push_back(p);

  std::vector<DailySignal> out;
  for (std::size_t s = 0; s < panel.series.size(); ++s) {
    const auto& ser = panel.series[s];
    for (std::size_t t = 1; t < ser.days.size(); ++t) {
      if (!period.contains(ser.days[t]) || ser.movement[t] == Movement::still) continue;
      const Key key{ser.stock, ser.days[t]};
      DailySignal sig;
      sig.stock = s;
      sig.day = ser.days[t];
      sig.movement = ser.movement[t];
      if (auto it = day_events.find(key); it != day_events.end()) sig.event = resolve_daily_event(it->second);
      std::span<const PostingRecord> posts;
      if (auto it = day_posts.find(key); it != day_posts.end()) posts = it->second;
      sig.sentiment = sentiment_polarity(sentiment_value(posts, Polarity::positive),
                                         sentiment_value(posts, Polarity::negative), sentiment_threshold);
      out.push_back(std::move(sig));
    }
  }
  return out;
}

std::vector<DailyObservation> build_daily_observations(std::span<const DailySignal> signals) {
  std::set<std::pair<std::size_t, std::string>> seen;
  std::vector<DailyObservation> out;
  out.reserve(signals.size());
  for (const auto& s : signals) {
    if (s.movement == Movement::still) throw DataError("still day reached tensor construction on " + s.day);
    if (s.event < 0) throw DataError("negative event category on " + s.day);
    if (!seen.emplace(s.stock, s.day).second) {
      throw DataError("duplicate signal for stock " + std::to_string(s.stock) + " on " + s.day);
    }
    out.push_back({s.stock, static_cast<std::size_t>(s.event), static_cast<std::size_t>(s.sentiment),
                   s.movement == Movement::up ? 1 : -1});
  }
  return out;
}

UpwardTensor aggregate_upward_probability(std::span<const DailyObservation> observations, Dims3 dims) {
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::pair<std::size_t, std::size_t>> cells;
  for (const auto& o : observations) {
    auto& c = cells[{o.i, o.j, o.k}];
    (o.sign > 0 ? c.first : c.second) += 1;
  }
  std::vector<TensorEntry> entries;
  UpwardTensor out;
  for (const auto& [key, c] : cells) {
    const auto [i, j, k] = key;
    entries.push_back({i, j, k, static_cast<double>(c.first) / static_cast<double>(c.first + c.second)});
    out.counts.push_back({i, j, k, c.first, c.second});
  }
  out.tensor = SparseTensor3(dims, std::move(entries));
  return out;
}

}  // namespace cmtf
