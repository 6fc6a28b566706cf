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

// News and postings to (stock, event, sentiment) observations, aggregated
// over a period into a sparse tensor of upward probabilities.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmtf/market_data.hpp"
#include "cmtf/movement.hpp"
#include "cmtf/tensor.hpp"

namespace cmtf {

/// Token -> event category. Category 0 is reserved for "no event".
class EventLexicon {
 public:
  EventLexicon() = default;
  /// `category_count` of 0 means max id + 1.
  explicit EventLexicon(std::map<std::string, int> tokens, std::size_t category_count = 0);

  /// Reads a JSON object {token: category}.
  static EventLexicon from_json_file(const std::filesystem::path& path);

  std::optional<int> lookup(const std::string& token) const;
  std::size_t category_count() const noexcept { return category_count_; }
  const std::map<std::string, int>& tokens() const noexcept { return tokens_; }

 private:
  std::map<std::string, int> tokens_;
  std::size_t category_count_ = 1;
};

/// Category of the first token found in the lexicon, or 0.
int assign_event(std::span<const std::string> tokens, const EventLexicon& lexicon);

struct EventRecord {
  std::string day;
  std::string stock;
  int category = 0;
};

/// `day,stock,category`
std::vector<EventRecord> read_events_csv(const std::filesystem::path& path);
void write_events_csv(const std::filesystem::path& path, std::span<const EventRecord> events);

struct NewsItem {
  std::string day;
  std::string stock;
  std::vector<std::string> tokens;
};

/// `day,stock,tokens` with ';'-separated tokens, classified through `lexicon`.
std::vector<EventRecord> read_news_csv(const std::filesystem::path& path, const EventLexicon& lexicon);
void write_news_csv(const std::filesystem::path& path, std::span<const NewsItem> news);

/// Writes the lexicon as a JSON object {token: category}.
void write_lexicon_json(const std::filesystem::path& path, const EventLexicon& lexicon);

/// One signal per stock-day: the most frequent non-zero category, ties to the
/// earliest listed; 0 when there is none.
int resolve_daily_event(std::span<const int> categories);

struct PostingRecord {
  std::string day;
  std::string stock;
  long long pos_words = 0;
  long long neg_words = 0;
  long long sent_words = 0;
  long long clicks = 0;
  long long comments = 0;
};

/// `day,stock,pos_words,neg_words,sent_words,clicks,comments`
std::vector<PostingRecord> read_postings_csv(const std::filesystem::path& path);
void write_postings_csv(const std::filesystem::path& path, std::span<const PostingRecord> postings);

enum class Polarity { positive = 0, negative = 1 };

inline constexpr std::size_t kSentimentAxis = 2;

std::string_view to_string(Polarity p) noexcept;

/// Impact weight 1 + ln(1 + clicks + comments).
double posting_weight(const PostingRecord& p);

/// sum over postings of (polarity words / sentiment words) * weight.
double sentiment_value(std::span<const PostingRecord> postings, Polarity polarity);

/// positive iff pos - neg > threshold.
Polarity sentiment_polarity(double pos_value, double neg_value, double threshold);

struct DailySignal {
  std::size_t stock = 0;
  std::string day;
  int event = 0;
  Polarity sentiment = Polarity::negative;
  Movement movement = Movement::up;
};

/// Signals for every non-still stock-day of the panel inside `period`.
std::vector<DailySignal> extract_signals(const MarketPanel& panel, std::span<const EventRecord> events,
                                         std::span<const PostingRecord> postings,
                                         double sentiment_threshold, const DateRange& period);

struct DailyObservation {
  std::size_t i = 0;  // stock
  std::size_t j = 0;  // event category
  std::size_t k = 0;  // sentiment
  int sign = 1;       // +1 up, -1 down

  bool operator==(const DailyObservation&) const = default;
};

/// One +1/-1 cell per signal. Throws DataError on a repeated (stock, day) or
/// a still movement.
std::vector<DailyObservation> build_daily_observations(std::span<const DailySignal> signals);

struct CellCounts {
  std::size_t i = 0, j = 0, k = 0;
  std::size_t up = 0;
  std::size_t down = 0;
};

struct UpwardTensor {
  SparseTensor3 tensor;
  std::vector<CellCounts> counts;  // same order as tensor.entries()
};

/// Per cell, up / (up + down) over all days observing it; unobserved cells
/// stay absent.
UpwardTensor aggregate_upward_probability(std::span<const DailyObservation> observations, Dims3 dims);

}  // namespace cmtf
