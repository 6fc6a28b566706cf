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

// Third-order tensor algebra: dense and sparse storage, norms, n-mode
// products and Tucker reconstruction.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cmtf/kernels.hpp"
#include "cmtf/matrix.hpp"

namespace cmtf {

struct Dims3 {
  std::size_t n0 = 0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;

  std::size_t size() const noexcept { return n0 * n1 * n2; }
  std::size_t operator[](std::size_t mode) const;
  bool operator==(const Dims3&) const = default;
};

/// Dense tensor stored row-major over (i, j, k).
class DenseTensor3 {
 public:
  DenseTensor3() = default;
  explicit DenseTensor3(Dims3 dims, double fill = 0.0);
  /// Throws DimensionError on a size mismatch and DataError on non-finite values.
  DenseTensor3(Dims3 dims, std::vector<double> values);

  const Dims3& dims() const noexcept { return dims_; }

  std::size_t offset(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return (i * dims_.n1 + j) * dims_.n2 + k;
  }
  double& operator()(std::size_t i, std::size_t j, std::size_t k) { return values_[offset(i, j, k)]; }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return values_[offset(i, j, k)];
  }
  /// Bounds-checked access.
  double at(std::size_t i, std::size_t j, std::size_t k) const;

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool operator==(const DenseTensor3&) const = default;

 private:
  Dims3 dims_;
  std::vector<double> values_;
};

struct TensorEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t k = 0;
  double value = 0.0;

  bool operator==(const TensorEntry&) const = default;
};

/// Observed cells of a tensor of upward probabilities. Presence of an entry
/// means "observed"; a stored 0.0 is an observation, not a missing cell.
/// Entries are kept sorted by (i, j, k).
class SparseTensor3 {
 public:
  SparseTensor3() = default;
  SparseTensor3(Dims3 dims, std::vector<TensorEntry> entries);

  const Dims3& dims() const noexcept { return dims_; }
  std::span<const TensorEntry> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  std::optional<double> find(std::size_t i, std::size_t j, std::size_t k) const;
  bool contains(std::size_t i, std::size_t j, std::size_t k) const { return find(i, j, k).has_value(); }

 private:
  Dims3 dims_;
  std::vector<TensorEntry> entries_;
};

struct Ranks {
  std::size_t r1 = 10;
  std::size_t r2 = 10;
  std::size_t r3 = 2;

  bool operator==(const Ranks&) const = default;
};

/// Tucker model: tensor ~ core x1 U x2 V x3 W, coupled to features by X ~ U F.
struct FactorModel {
  DenseTensor3 core;  // r1 x r2 x r3
  Matrix u;           // N x r1
  Matrix v;           // M x r2
  Matrix w;           // L x r3
  Matrix f;           // r1 x K

  Dims3 dims() const noexcept { return {u.rows(), v.rows(), w.rows()}; }
  Ranks ranks() const noexcept { return {core.dims().n0, core.dims().n1, core.dims().n2}; }

  /// Throws DimensionError when shapes disagree, DataError on non-finite values.
  void validate() const;

  bool operator==(const FactorModel&) const = default;
};

double tensor_norm(const DenseTensor3& t);

/// Contracts `mode` (1, 2 or 3) of `t` against the rows of `m`:
/// out[.., j, ..] = sum_{i_n} t[.., i_n, ..] * m(i_n, j).
DenseTensor3 n_mode_product(const DenseTensor3& t, const Matrix& m, int mode);

/// a_ijk = sum_pqr core_pqr u_ip v_jq w_kr over the full N x M x L grid.
DenseTensor3 tucker_reconstruct(const FactorModel& m);

/// Single reconstructed cell; throws DimensionError on out-of-range indices.
double reconstruct_entry(const FactorModel& m, std::size_t i, std::size_t j, std::size_t k);

/// Partial contractions of the core against one (u, v, w) row triple. These
/// are the building blocks of the entry prediction and its gradients.
struct CoreContraction {
  std::vector<double> vw;      // r2*r3, v_q * w_r
  std::vector<double> core_u;  // r2*r3, core x1 u
  std::vector<double> along_u; // r1, core x2 v x3 w
  std::vector<double> along_v; // r2, core x1 u x3 w
  std::vector<double> along_w; // r3, core x1 u x2 v
  double value = 0.0;          // core x1 u x2 v x3 w

  void resize(const Ranks& r);
};

void contract_core(const kernels::KernelTable& k, const DenseTensor3& core,
                   std::span<const double> u, std::span<const double> v,
                   std::span<const double> w, CoreContraction& out);

}  // namespace cmtf
