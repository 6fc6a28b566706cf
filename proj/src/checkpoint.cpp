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

#include "cmtf/checkpoint.hpp"

#include <fstream>
#include <set>

#include "cmtf/error.hpp"

namespace cmtf {
namespace {

using nlohmann::json;

json matrix_json(const Matrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"values", m.values()}};
}

Matrix matrix_from(const json& j, const char* name) {
  try {
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    return Matrix(rows, cols, j.at("values").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint field '") + name + "': " + e.what());
  } catch (const DimensionError& e) {
    throw DataError(std::string("checkpoint field '") + name + "': " + e.what());
  }
}

}  // namespace

json hyperparams_to_json(const HyperParams& h) {
  return json{{"lambda1", h.lambda1},
              {"lambda2", h.lambda2},
              {"lambda3", h.lambda3},
              {"eta", h.eta},
              {"epsilon", h.epsilon},
              {"max_epochs", h.max_epochs},
              {"ranks", {h.ranks.r1, h.ranks.r2, h.ranks.r3}},
              {"seed", h.seed},
              {"init_scale", h.init_scale}};
}

HyperParams hyperparams_from_json(const json& j, HyperParams h) {
  if (!j.is_object()) throw ConfigError("hyperparams must be a JSON object");
  static const std::set<std::string> known{"lambda1", "lambda2", "lambda3", "eta", "epsilon",
                                           "max_epochs", "ranks", "seed", "init_scale"};
  try {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!known.count(it.key())) throw ConfigError("unknown hyperparameter '" + it.key() + "'");
    auto num = [&](const char* key, double& dst) {
      if (j.contains(key)) dst = j.at(key).get<double>();
    };
    num("lambda1", h.lambda1);
    num("lambda2", h.lambda2);
    num("lambda3", h.lambda3);
    num("eta", h.eta);
    num("epsilon", h.epsilon);
    num("init_scale", h.init_scale);
    if (j.contains("max_epochs")) h.max_epochs = j.at("max_epochs").get<std::size_t>();
    if (j.contains("seed")) h.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("ranks")) {
      const auto r = j.at("ranks").get<std::vector<std::size_t>>();
      if (r.size() != 3) throw ConfigError("ranks must list three values");
      h.ranks = {r[0], r[1], r[2]};
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("hyperparams: ") + e.what());
  }
  return h;
}

json checkpoint_to_json(const FactorModel& m, const HyperParams& h) {
  const Dims3 d = m.dims();
  const Ranks r = m.ranks();
  return json{{"format", "cmtf-model-1"},
              {"dims", {d.n0, d.n1, d.n2}},
              {"ranks", {r.r1, r.r2, r.r3}},
              {"features", m.f.cols()},
              {"core", m.core.values()},
              {"U", matrix_json(m.u)},
              {"V", matrix_json(m.v)},
              {"W", matrix_json(m.w)},
              {"F", matrix_json(m.f)},
              {"hyperparams", hyperparams_to_json(h)},
              {"seed", h.seed}};
}

Checkpoint checkpoint_from_json(const json& j) {
  Checkpoint c;
  try {
    if (j.at("format").get<std::string>() != "cmtf-model-1") throw DataError("unsupported checkpoint format");
    const auto r = j.at("ranks").get<std::vector<std::size_t>>();
    if (r.size() != 3) throw DataError("checkpoint ranks must list three values");
    c.model.core = DenseTensor3({r[0], r[1], r[2]}, j.at("core").get<std::vector<double>>());
    c.model.u = matrix_from(j.at("U"), "U");
    c.model.v = matrix_from(j.at("V"), "V");
    c.model.w = matrix_from(j.at("W"), "W");
    c.model.f = matrix_from(j.at("F"), "F");
    c.hyperparams = hyperparams_from_json(j.at("hyperparams"));
    const auto d = j.at("dims").get<std::vector<std::size_t>>();
    if (d.size() != 3 || Dims3{d[0], d[1], d[2]} != c.model.dims()) {
      throw DataError("checkpoint dims disagree with factor shapes");
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  } catch (const DimensionError& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
  try {
    c.model.validate();
  } catch (const DimensionError& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const FactorModel& m, const HyperParams& h) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << checkpoint_to_json(m, h).dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace cmtf
