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


#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cmtf/error.hpp"
#include "cmtf/factorizer.hpp"
#include "cmtf/kernels.hpp"
#include "test_util.hpp"

namespace cmtf {
namespace {

using kernels::Backend;

std::vector<Backend> simd_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::avx2, Backend::neon})
    if (kernels::available(b)) out.push_back(b);
  return out;
}

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

TEST(Kernels, ScalarAlwaysAvailable) {
  EXPECT_TRUE(kernels::available(Backend::scalar));
  EXPECT_EQ(kernels::table(Backend::scalar).backend, Backend::scalar);
  EXPECT_EQ(kernels::parse_backend("avx2"), Backend::avx2);
  EXPECT_THROW(kernels::parse_backend("sse9"), ConfigError);
}

TEST(Kernels, ScalarReference) {
  const auto& k = kernels::table(Backend::scalar);
  std::vector<double> x{1, 2, 3}, y{4, 5, 6};
  EXPECT_EQ(k.dot(x.data(), y.data(), 3), 32.0);
  EXPECT_EQ(k.sum_sq(x.data(), 3), 14.0);
  k.axpy(2.0, x.data(), y.data(), 3);
  EXPECT_EQ(y, (std::vector<double>{6, 9, 12}));
  k.axpby(1.0, x.data(), -1.0, y.data(), 3);
  EXPECT_EQ(y, (std::vector<double>{-5, -7, -9}));
}

TEST(Kernels, SimdMatchesScalarOnAllLengths) {
  const auto& ref = kernels::table(Backend::scalar);
  for (Backend b : simd_backends()) {
    const auto& k = kernels::table(b);
    std::mt19937_64 rng(11);
    for (std::size_t n = 0; n <= 67; ++n) {
      auto x = random_vec(rng, n);
      auto y = random_vec(rng, n);
      const double tol = 1e-14 * static_cast<double>(n + 1) * 4.0;
      EXPECT_NEAR(k.dot(x.data(), y.data(), n), ref.dot(x.data(), y.data(), n), tol);
      EXPECT_NEAR(k.sum_sq(x.data(), n), ref.sum_sq(x.data(), n), tol);

      auto y1 = y, y2 = y;
      k.axpy(0.37, x.data(), y1.data(), n);
      ref.axpy(0.37, x.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-15);

      y1 = y;
      y2 = y;
      k.axpby(-1.5, x.data(), 0.25, y1.data(), n);
      ref.axpby(-1.5, x.data(), 0.25, y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-14);
    }
  }
}

TEST(Kernels, SimdHandlesUnalignedViews) {
  const auto& ref = kernels::table(Backend::scalar);
  for (Backend b : simd_backends()) {
    const auto& k = kernels::table(b);
    std::mt19937_64 rng(12);
    auto x = random_vec(rng, 40);
    auto y = random_vec(rng, 40);
    for (std::size_t off = 1; off < 4; ++off)
      EXPECT_NEAR(k.dot(x.data() + off, y.data() + off, 33),
                  ref.dot(x.data() + off, y.data() + off, 33), 1e-12);
  }
}

TEST(Kernels, TrainingAgreesAcrossBackends) {
  std::mt19937_64 rng(13);
  const Dims3 d{8, 6, 2};
  auto a = testing::random_observed(rng, d, 0.5);
  auto x = testing::random_matrix(rng, 8, 4, 0.0, 1.0);
  auto z = testing::random_correlation(rng, 8);
  HyperParams h;
  h.ranks = {3, 3, 2};
  h.max_epochs = 60;
  h.epsilon = 1e-12;
  h.eta = 0.05;
  h.init_scale = 0.3;
  h.seed = 99;
  auto ref = train(a, x, z, h, kernels::table(Backend::scalar));
  for (Backend b : simd_backends()) {
    auto got = train(a, x, z, h, kernels::table(b));
    ASSERT_EQ(got.report.loss_trace.size(), ref.report.loss_trace.size());
    for (std::size_t e = 0; e < ref.report.loss_trace.size(); ++e)
      EXPECT_NEAR(got.report.loss_trace[e], ref.report.loss_trace[e],
                  1e-9 * std::max(1.0, ref.report.loss_trace[e]));
    for (std::size_t i = 0; i < ref.model.u.size(); ++i)
      EXPECT_NEAR(got.model.u.values()[i], ref.model.u.values()[i], 1e-9);
  }
}

}  // namespace
}  // namespace cmtf
