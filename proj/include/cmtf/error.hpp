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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cmtf {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition on shapes or indices.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (files, records, tables).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or hyperparameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite or exploding objective.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t epoch, double loss)
      : Error("training diverged at epoch " + std::to_string(epoch) +
              " (objective " + std::to_string(loss) + ")"),
        epoch_(epoch),
        loss_(loss) {}

  std::size_t epoch() const noexcept { return epoch_; }
  double loss() const noexcept { return loss_; }

 private:
  std::size_t epoch_;
  double loss_;
};

}  // namespace cmtf
