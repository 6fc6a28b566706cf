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

// Model checkpoints as JSON: dims, ranks, factors in row-major order and the
// hyperparameters that produced them.

#include <filesystem>

#include <json.hpp>

#include "cmtf/factorizer.hpp"

namespace cmtf {

struct Checkpoint {
  FactorModel model;
  HyperParams hyperparams;
};

nlohmann::json hyperparams_to_json(const HyperParams& h);
/// Missing keys keep the values of `defaults`; unknown keys throw ConfigError.
HyperParams hyperparams_from_json(const nlohmann::json& j, HyperParams defaults = {});

nlohmann::json checkpoint_to_json(const FactorModel& m, const HyperParams& h);
/// Throws DataError on malformed or inconsistent content.
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const FactorModel& m, const HyperParams& h);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace cmtf
