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

// Data-parallel double-precision kernels used by the trainer's inner loops.
//
// Every backend implements the same table. The scalar backend is the
// reference; vector backends may reassociate sums, so results agree with it
// to rounding, not bitwise. A process selects one backend on first use and
// keeps it, which keeps repeated runs bit-identical on a given machine.
// Set CMTF_KERNELS=scalar|avx2|neon|auto to override the choice.

#include <cstddef>
#include <span>
#include <string_view>

namespace cmtf::kernels {

enum class Backend { scalar, avx2, neon };

struct KernelTable {
  Backend backend;
  /// sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  /// y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  /// y[i] = a * x[i] + b * y[i]
  void (*axpby)(double a, const double* x, double b, double* y, std::size_t n);
  /// sum_i x[i]^2
  double (*sum_sq)(const double* x, std::size_t n);
};

bool available(Backend b) noexcept;
std::string_view name(Backend b) noexcept;
Backend parse_backend(std::string_view s);

/// Table for a specific backend; throws cmtf::ConfigError when unavailable.
const KernelTable& table(Backend b);

/// Process-wide table chosen from CPU features and CMTF_KERNELS.
const KernelTable& active();

namespace detail {
// Defined only in the translation units built for the matching target.
extern const KernelTable kScalarTable;
extern const KernelTable kAvx2Table;
extern const KernelTable kNeonTable;
bool avx2_supported() noexcept;
}  // namespace detail

inline double dot(const KernelTable& k, std::span<const double> x, std::span<const double> y) {
  return k.dot(x.data(), y.data(), x.size());
}
inline void axpy(const KernelTable& k, double a, std::span<const double> x, std::span<double> y) {
  k.axpy(a, x.data(), y.data(), x.size());
}
inline void axpby(const KernelTable& k, double a, std::span<const double> x, double b,
                  std::span<double> y) {
  k.axpby(a, x.data(), b, y.data(), x.size());
}
inline double sum_sq(const KernelTable& k, std::span<const double> x) {
  return k.sum_sq(x.data(), x.size());
}

}  // namespace cmtf::kernels
