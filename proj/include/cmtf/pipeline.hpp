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

// End-to-end pipeline: config loading, the ingest / correlate / train /
// backtest stages communicating through files in the output directory, run
// manifests and failure markers.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cmtf/correlation.hpp"
#include "cmtf/error.hpp"
#include "cmtf/evaluation.hpp"
#include "cmtf/factorizer.hpp"
#include "cmtf/market_data.hpp"

namespace cmtf {

enum class Stage { ingest = 0, correlate = 1, train = 2, backtest = 3 };

std::string_view to_string(Stage s) noexcept;
/// Throws ConfigError on an unknown name.
Stage parse_stage(std::string_view s);

/// Random stream of each stage under the root seed. Only training draws
/// random numbers today.
inline constexpr std::uint64_t kTrainSeedStream = 3;

struct PipelineConfig {
  std::filesystem::path base_dir;  // relative input paths resolve against this
  std::optional<std::filesystem::path> quotes;
  std::optional<std::filesystem::path> events;
  std::optional<std::filesystem::path> news;
  std::optional<std::filesystem::path> lexicon;
  std::optional<std::filesystem::path> postings;
  std::optional<std::filesystem::path> tweets;
  std::size_t event_categories = 0;
  CorrelationMethod method = CorrelationMethod::coupled;
  std::vector<CorrelationMethod> correlate_methods;  // empty: just `method`
  Ablation ablation = Ablation::full;
  std::optional<DateRange> train_period;
  std::optional<DateRange> test_period;
  double train_fraction = 0.75;
  double sentiment_threshold = 0.0;
  HyperParams hyperparams;  // seed is derived from `seed`
  std::uint64_t seed = 0;
  std::size_t top_k = 10;
  std::filesystem::path out_dir = "out";

  /// Checks field values; input file existence is checked by ingest.
  void validate() const;
  std::filesystem::path resolve(const std::filesystem::path& p) const;
  /// Hyperparameters actually used for training: ablation applied and seed derived.
  HyperParams effective_hyperparams() const;
};

/// Throws ConfigError on unknown keys or bad values.
PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);
/// Canonical form used for hashing and echoing.
nlohmann::json config_to_json(const PipelineConfig& c);

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<CorrelationMethod> method;
  std::optional<Ablation> ablation;
  std::optional<std::filesystem::path> out_dir;
};

void apply_overrides(PipelineConfig& c, const ConfigOverrides& o);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// Output file names inside the output directory.
namespace outputs {
inline constexpr const char* kUniverse = "universe.json";
inline constexpr const char* kFeatures = "features.csv";
inline constexpr const char* kTensor = "tensor.csv";
inline constexpr const char* kTestSamples = "test_samples.csv";
inline constexpr const char* kModel = "model.json";
inline constexpr const char* kTrainReport = "train_report.json";
inline constexpr const char* kMetrics = "metrics.json";
inline constexpr const char* kPredictions = "predictions.csv";
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kFailure = "failure.json";
std::string correlation_file(CorrelationMethod m);
std::string neighbors_file(CorrelationMethod m);
}  // namespace outputs

/// Raised by the stage runners after writing the failure marker. `cause`
/// holds the original exception so callers can map its kind.
class StageError : public Error {
 public:
  StageError(Stage stage, const std::string& what, std::exception_ptr cause)
      : Error(std::string(to_string(stage)) + " stage failed: " + what), stage_(stage), cause_(std::move(cause)) {}

  Stage stage() const noexcept { return stage_; }
  [[noreturn]] void rethrow_cause() const { std::rethrow_exception(cause_); }

 private:
  Stage stage_;
  std::exception_ptr cause_;
};

void run_ingest(const PipelineConfig& c);
void run_correlate(const PipelineConfig& c);
void run_train(const PipelineConfig& c);
void run_backtest_stage(const PipelineConfig& c);

/// Runs the stages from `from` onwards. Correlate is skipped when the
/// effective lambda2 is zero.
void run_pipeline(const PipelineConfig& c, Stage from = Stage::ingest);

/// Stage artifacts read back from the output directory.
struct Universe {
  std::vector<std::string> stocks;
  std::size_t event_categories = 0;
  DateRange train_period;
  DateRange test_period;
};

Universe read_universe(const std::filesystem::path& out_dir);
UpwardTensor read_tensor_csv(const std::filesystem::path& path, const Universe& u);
void write_tensor_csv(const std::filesystem::path& path, const UpwardTensor& a, const Universe& u);
std::vector<TestSample> read_test_samples(const std::filesystem::path& path, const Universe& u);
void write_test_samples(const std::filesystem::path& path, std::span<const TestSample> samples,
                        const Universe& u);
CorrelationMatrix read_correlation_csv(const std::filesystem::path& path, CorrelationMethod m,
                                       std::span<const std::string> stocks);
void write_correlation_csv(const std::filesystem::path& path, const CorrelationMatrix& z,
                           std::span<const std::string> stocks);
nlohmann::json metrics_to_json(const MetricsReport& m, const nlohmann::json& config_echo);

}  // namespace cmtf
