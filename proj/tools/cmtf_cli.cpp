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

// cmtf command-line front end.
//
// Exit codes: 0 success, 1 unexpected failure, 2 configuration error,
// 3 data error, 4 numerical divergence.

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmtf/error.hpp"
#include "cmtf/pipeline.hpp"
#include "cmtf/synth.hpp"

namespace {

using namespace cmtf;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string method;
  std::string ablation;
  std::string out;
  std::string from_stage = "ingest";
};

void add_common(CLI::App* cmd, Flags& f, bool config_required) {
  auto* opt = cmd->add_option("--config", f.config, "JSON config file");
  if (config_required) opt->required();
  cmd->add_option("--seed", f.seed, "root seed (overrides the config)");
  cmd->add_option("--out", f.out, "output directory (overrides the config)");
}

void add_model_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--method", f.method, "coupled, direction, pchange or perceived");
  cmd->add_option("--ablation", f.ablation, "full, no_z or no_z_no_x");
}

PipelineConfig pipeline_config(const Flags& f) {
  PipelineConfig c = load_config(f.config);
  ConfigOverrides o;
  o.seed = f.seed;
  if (!f.method.empty()) o.method = parse_correlation_method(f.method);
  if (!f.ablation.empty()) o.ablation = parse_ablation(f.ablation);
  if (!f.out.empty()) o.out_dir = f.out;
  apply_overrides(c, o);
  c.validate();
  return c;
}

void cmd_synth(const Flags& f) {
  SyntheticSpec spec;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw ConfigError("cannot open config " + f.config);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(f.config + ": " + e.what());
    }
    spec = synthetic_spec_from_json(j);
  }
  if (f.seed) spec.seed = *f.seed;
  const std::string out = f.out.empty() ? "synthetic" : f.out;
  const SyntheticBundle b = generate_synthetic(spec);
  write_synthetic(b, out);
  std::fprintf(stderr, "[synth] %zu stocks, %zu event categories, %zu days written to %s\n", spec.n_stocks,
               spec.n_events, spec.n_days, out.c_str());
}

int exit_code_for_current() {
  try {
    throw;
  } catch (const StageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    try {
      e.rethrow_cause();
    } catch (const ConfigError&) {
      return 2;
    } catch (const DataError&) {
      return 3;
    } catch (const DimensionError&) {
      return 3;
    } catch (const DivergenceError&) {
      return 4;
    } catch (...) {
      return 1;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const DimensionError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "divergence: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled matrix-tensor factorization for stock movement prediction"};
  app.require_subcommand(1);
  Flags f;

  auto* synth = app.add_subcommand("synth", "generate a synthetic data bundle");
  add_common(synth, f, false);

  struct StageCmd {
    const char* name;
    const char* help;
    void (*fn)(const PipelineConfig&);
  };
  const StageCmd stages[] = {
      {"ingest", "build features, the training tensor and test samples", run_ingest},
      {"correlate", "estimate stock correlation matrices", run_correlate},
      {"train", "train the factorization", run_train},
      {"backtest", "score test-period predictions", run_backtest_stage},
  };
  std::vector<std::pair<CLI::App*, void (*)(const PipelineConfig&)>> stage_cmds;
  for (const auto& s : stages) {
    auto* cmd = app.add_subcommand(s.name, s.help);
    add_common(cmd, f, true);
    add_model_flags(cmd, f);
    stage_cmds.emplace_back(cmd, s.fn);
  }
  auto* run = app.add_subcommand("run", "run every stage end to end");
  add_common(run, f, true);
  add_model_flags(run, f);
  run->add_option("--from-stage", f.from_stage, "first stage to run: ingest, correlate, train or backtest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (synth->parsed()) {
      cmd_synth(f);
      return 0;
    }
    for (const auto& [cmd, fn] : stage_cmds) {
      if (cmd->parsed()) {
        fn(pipeline_config(f));
        return 0;
      }
    }
    run_pipeline(pipeline_config(f), parse_stage(f.from_stage));
    return 0;
  } catch (...) {
    return exit_code_for_current();
  }
}
