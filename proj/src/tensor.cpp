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

#include "cmtf/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "cmtf/error.hpp"

namespace cmtf {

// ---------------------------------------------------------------------------
// Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw DimensionError("matrix value count " + std::to_string(values_.size()) +
                         " does not match " + std::to_string(rows_) + "x" +
                         std::to_string(cols_));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  values_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("ragged matrix initializer");
    values_.insert(values_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
  return t;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("cannot multiply " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " by " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double s = a(i, p);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += s * b(p, j);
    }
  return out;
}

double frobenius_sq(const Matrix& m) {
  double acc = 0.0;
  for (double x : m.values()) acc += x * x;
  return acc;
}

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j)
      if (std::abs(m(i, j) - m(j, i)) > tol) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Dense / sparse tensors

std::size_t Dims3::operator[](std::size_t mode) const {
  switch (mode) {
    case 0:
      return n0;
    case 1:
      return n1;
    case 2:
      return n2;
    default:
      throw DimensionError("mode index " + std::to_string(mode) + " out of range");
  }
}

DenseTensor3::DenseTensor3(Dims3 dims, double fill) : dims_(dims), values_(dims.size(), fill) {}

DenseTensor3::DenseTensor3(Dims3 dims, std::vector<double> values)
    : dims_(dims), values_(std::move(values)) {
  if (values_.size() != dims_.size()) {
    throw DimensionError("tensor value count " + std::to_string(values_.size()) +
                         " does not match dims product " + std::to_string(dims_.size()));
  }
  for (double x : values_)
    if (!std::isfinite(x)) throw DataError("tensor contains a non-finite value");
}

double DenseTensor3::at(std::size_t i, std::size_t j, std::size_t k) const {
  if (i >= dims_.n0 || j >= dims_.n1 || k >= dims_.n2) {
    throw DimensionError("tensor index out of range");
  }
  return (*this)(i, j, k);
}

SparseTensor3::SparseTensor3(Dims3 dims, std::vector<TensorEntry> entries)
    : dims_(dims), entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (e.i >= dims_.n0 || e.j >= dims_.n1 || e.k >= dims_.n2) {
      throw DimensionError("sparse entry (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                           "," + std::to_string(e.k) + ") out of range");
    }
    if (!(e.value >= 0.0 && e.value <= 1.0)) {
      throw DataError("sparse entry value " + std::to_string(e.value) + " outside [0,1]");
    }
  }
  auto key = [](const TensorEntry& e) { return std::tie(e.i, e.j, e.k); };
  std::sort(entries_.begin(), entries_.end(),
            [&](const TensorEntry& a, const TensorEntry& b) { return key(a) < key(b); });
  auto dup = std::adjacent_find(entries_.begin(), entries_.end(),
                                [&](const TensorEntry& a, const TensorEntry& b) { return key(a) == key(b); });
  if (dup != entries_.end()) {
    throw DataError("duplicate sparse entry (" + std::to_string(dup->i) + "," +
                    std::to_string(dup->j) + "," + std::to_string(dup->k) + ")");
  }
}

std::optional<double> SparseTensor3::find(std::size_t i, std::size_t j, std::size_t k) const {
  const auto target = std::tie(i, j, k);
  auto it = std::lower_bound(entries_.begin(), entries_.end(), target,
                             [](const TensorEntry& e, const auto& t) { return std::tie(e.i, e.j, e.k) < t; });
  if (it != entries_.end() && it->i == i && it->j == j && it->k == k) return it->value;
  return std::nullopt;
}

void FactorModel::validate() const {
  const Dims3& c = core.dims();
  if (u.cols() != c.n0 || v.cols() != c.n1 || w.cols() != c.n2) {
    throw DimensionError("factor matrix ranks do not match core dims");
  }
  if (f.rows() != c.n0) throw DimensionError("feature loading F must have r1 rows");
  for (const Matrix* m : {&u, &v, &w, &f})
    for (double x : m->values())
      if (!std::isfinite(x)) throw DataError("factor model contains a non-finite value");
  for (double x : core.values())
    if (!std::isfinite(x)) throw DataError("core tensor contains a non-finite value");
}

// ---------------------------------------------------------------------------
// Operations

double tensor_norm(const DenseTensor3& t) {
  double acc = 0.0;
  for (double x : t.values()) acc += x * x;
  return std::sqrt(acc);
}

DenseTensor3 n_mode_product(const DenseTensor3& t, const Matrix& m, int mode) {
  if (mode < 1 || mode > 3) throw DimensionError("mode must be 1, 2 or 3");
  const Dims3& d = t.dims();
  const std::size_t axis = static_cast<std::size_t>(mode - 1);
  if (m.rows() != d[axis]) {
    throw DimensionError("n-mode product: matrix has " + std::to_string(m.rows()) +
                         " rows but mode " + std::to_string(mode) + " has size " +
                         std::to_string(d[axis]));
  }
  Dims3 od = d;
  if (axis == 0) od.n0 = m.cols();
  if (axis == 1) od.n1 = m.cols();
  if (axis == 2) od.n2 = m.cols();
  DenseTensor3 out(od);
  for (std::size_t i = 0; i < d.n0; ++i)
    for (std::size_t j = 0; j < d.n1; ++j)
      for (std::size_t k = 0; k < d.n2; ++k) {
        const double x = t(i, j, k);
        if (x == 0.0) continue;
        for (std::size_t c = 0; c < m.cols(); ++c) {
          switch (axis) {
            case 0:
              out(c, j, k) += x * m(i, c);
              break;
            case 1:
              out(i, c, k) += x * m(j, c);
              break;
            default:
              out(i, j, c) += x * m(k, c);
              break;
          }
        }
      }
  return out;
}

DenseTensor3 tucker_reconstruct(const FactorModel& m) {
  m.validate();
  // Factors are stored as N x r, so each mode contracts against the transpose.
  DenseTensor3 t = n_mode_product(m.core, transpose(m.u), 1);
  t = n_mode_product(t, transpose(m.v), 2);
  return n_mode_product(t, transpose(m.w), 3);
}

void CoreContraction::resize(const Ranks& r) {
  vw.assign(r.r2 * r.r3, 0.0);
  core_u.assign(r.r2 * r.r3, 0.0);
  along_u.assign(r.r1, 0.0);
  along_v.assign(r.r2, 0.0);
  along_w.assign(r.r3, 0.0);
}

void contract_core(const kernels::KernelTable& k, const DenseTensor3& core,
                   std::span<const double> u, std::span<const double> v,
                   std::span<const double> w, CoreContraction& out) {
  const Dims3& d = core.dims();
  const std::size_t slab = d.n1 * d.n2;
  if (out.vw.size() != slab || out.along_u.size() != d.n0) out.resize({d.n0, d.n1, d.n2});

  for (std::size_t q = 0; q < d.n1; ++q)
    for (std::size_t r = 0; r < d.n2; ++r) out.vw[q * d.n2 + r] = v[q] * w[r];

  std::fill(out.core_u.begin(), out.core_u.end(), 0.0);
  const double* c = core.values().data();
  for (std::size_t p = 0; p < d.n0; ++p) {
    const double* slab_p = c + p * slab;
    out.along_u[p] = k.dot(slab_p, out.vw.data(), slab);
    k.axpy(u[p], slab_p, out.core_u.data(), slab);
  }
  out.value = k.dot(out.core_u.data(), out.vw.data(), slab);
  for (std::size_t q = 0; q < d.n1; ++q) out.along_v[q] = k.dot(out.core_u.data() + q * d.n2, w.data(), d.n2);
  std::fill(out.along_w.begin(), out.along_w.end(), 0.0);
  for (std::size_t q = 0; q < d.n1; ++q) k.axpy(v[q], out.core_u.data() + q * d.n2, out.along_w.data(), d.n2);
}

double reconstruct_entry(const FactorModel& m, std::size_t i, std::size_t j, std::size_t k) {
  if (i >= m.u.rows() || j >= m.v.rows() || k >= m.w.rows()) {
    throw DimensionError("reconstruct_entry index out of range");
  }
  CoreContraction cc;
  contract_core(kernels::active(), m.core, m.u.row(i), m.v.row(j), m.w.row(k), cc);
  return cc.value;
}

}  // namespace cmtf
