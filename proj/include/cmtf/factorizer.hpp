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

// Coupled matrix-tensor factorization: the objective
//
//   L = 1/2 sum_obs (a_ijk - core x1 u_i x2 v_j x3 w_k)^2
//     + lambda1/2 ||X - U F||^2
//     + lambda2/2 tr(U^T L_Z U)
//     + lambda3/2 (||U||^2 + ||V||^2 + ||W||^2 + ||core||^2 + ||F||^2)
//
// its per-entry gradients, and an element-wise gradient-descent trainer that
// visits every observed cell once per epoch.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cmtf/kernels.hpp"
#include "cmtf/matrix.hpp"
#include "cmtf/movement.hpp"
#include "cmtf/tensor.hpp"

namespace cmtf {

struct HyperParams {
  double lambda1 = 0.5;  // feature coupling
  double lambda2 = 0.5;  // graph smoothness
  double lambda3 = 0.1;  // ridge
  double eta = 0.01;
  double epsilon = 1e-6;  // stop when |loss_t - loss_{t-1}| <= epsilon
  std::size_t max_epochs = 1000;
  Ranks ranks{10, 10, 2};
  std::uint64_t seed = 0;
  double init_scale = 0.01;  // factors start uniform in [0, init_scale]

  /// Throws ConfigError on invalid values or ranks exceeding `dims`.
  void validate(const Dims3& dims) const;

  bool operator==(const HyperParams&) const = default;
};

/// L_Z = D - Z with D the diagonal of row sums.
struct LaplacianMatrix {
  Matrix values;

  bool empty() const noexcept { return values.empty(); }
};

/// Throws DataError if `z` is not square and symmetric with entries in [0, 1].
LaplacianMatrix build_laplacian(const Matrix& z);

double objective(const SparseTensor3& a, const Matrix& x, const LaplacianMatrix& lap,
                 const FactorModel& m, const HyperParams& h);

struct GradientBundle {
  std::vector<double> u;  // r1, gradient w.r.t. row u_i
  std::vector<double> v;  // r2, gradient w.r.t. row v_j
  std::vector<double> w;  // r3, gradient w.r.t. row w_k
  DenseTensor3 core;
  Matrix f;
};

/// Gradients of the loss terms touched by one observed cell (i, j, k).
/// `x` may be empty when lambda1 == 0 and `lap` empty when lambda2 == 0.
GradientBundle entry_gradients(double a_ijk, std::size_t i, std::size_t j, std::size_t k,
                               const FactorModel& m, const Matrix& x, const LaplacianMatrix& lap,
                               const HyperParams& h);

struct TrainReport {
  /// Objective after each epoch; element 0 is the objective at initialization.
  std::vector<double> loss_trace;
  std::size_t epochs_run = 0;
  bool converged = false;
};

struct TrainResult {
  FactorModel model;
  TrainReport report;
};

/// Seeded initialization: every factor entry uniform in [0, init_scale].
FactorModel initial_model(const Dims3& dims, std::size_t feature_count, const HyperParams& h);

/// Runs element-wise gradient descent over the observed cells of `a`.
/// Throws DivergenceError when the objective becomes non-finite or exceeds 1e12.
TrainResult train(const SparseTensor3& a, const Matrix& x, const Matrix& z, const HyperParams& h,
                  const kernels::KernelTable& k = kernels::active());

/// Same as above but continues from `start` instead of a fresh initialization.
TrainResult train_from(FactorModel start, const SparseTensor3& a, const Matrix& x,
                       const Matrix& z, const HyperParams& h,
                       const kernels::KernelTable& k = kernels::active());

struct Prediction {
  double prob_up = 0.0;
  Movement label = Movement::down;
};

/// Clamps the reconstructed cell to [0, 1]; up iff prob_up > 0.5.
Prediction predict_entry(const FactorModel& m, std::size_t i, std::size_t j, std::size_t k);
Prediction decide(double reconstructed) noexcept;

inline constexpr double kDivergenceLimit = 1e12;

}  // namespace cmtf
