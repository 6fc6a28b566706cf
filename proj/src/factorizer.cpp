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

#include "cmtf/factorizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "cmtf/error.hpp"

namespace cmtf {

void HyperParams::validate(const Dims3& dims) const {
  auto finite_nonneg = [](double x) { return std::isfinite(x) && x >= 0.0; };
  if (!finite_nonneg(lambda1) || !finite_nonneg(lambda2) || !finite_nonneg(lambda3)) {
    throw ConfigError("lambda1, lambda2, lambda3 must be finite and non-negative");
  }
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be positive");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be positive");
  if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
  if (!(init_scale > 0.0) || !std::isfinite(init_scale)) throw ConfigError("init_scale must be positive");
  if (ranks.r1 == 0 || ranks.r2 == 0 || ranks.r3 == 0) throw ConfigError("ranks must be at least 1");
  if (ranks.r1 > dims.n0 || ranks.r2 > dims.n1 || ranks.r3 > dims.n2) {
    throw ConfigError("ranks (" + std::to_string(ranks.r1) + "," + std::to_string(ranks.r2) + "," +
                      std::to_string(ranks.r3) + ") exceed tensor dims (" + std::to_string(dims.n0) +
                      "," + std::to_string(dims.n1) + "," + std::to_string(dims.n2) + ")");
  }
}

LaplacianMatrix build_laplacian(const Matrix& z) {
  if (z.rows() != z.cols()) throw DataError("correlation matrix must be square");
  for (double x : z.values())
    if (!(x >= 0.0 && x <= 1.0)) throw DataError("correlation entries must lie in [0,1]");
  if (!is_symmetric(z, 1e-12)) throw DataError("correlation matrix is not symmetric");
  const std::size_t n = z.rows();
  LaplacianMatrix lap{Matrix(n, n)};
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < n; ++j) d += z(i, j);
    for (std::size_t j = 0; j < n; ++j) lap.values(i, j) = -z(i, j);
    lap.values(i, i) += d;
  }
  return lap;
}

namespace {

void check_inputs(const SparseTensor3& a, const Matrix& x, const LaplacianMatrix& lap,
                  const FactorModel& m, const HyperParams& h) {
  m.validate();
  if (!(a.dims() == m.dims())) throw DimensionError("tensor dims do not match the factor model");
  if (h.lambda1 != 0.0 && (x.rows() != m.u.rows() || x.cols() != m.f.cols())) {
    throw DimensionError("feature matrix must be N x K matching U and F");
  }
  if (h.lambda2 != 0.0 && (lap.values.rows() != m.u.rows() || lap.values.cols() != m.u.rows())) {
    throw DimensionError("Laplacian must be N x N");
  }
}

// (L_Z U)_{i:}
void laplacian_row(const kernels::KernelTable& k, const LaplacianMatrix& lap, const Matrix& u,
                   std::size_t i, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const auto row = lap.values.row(i);
  for (std::size_t n = 0; n < row.size(); ++n) {
    if (row[n] != 0.0) k.axpy(row[n], u.row(n).data(), out.data(), out.size());
  }
}

// u_i F - x_i
void feature_residual(const kernels::KernelTable& k, const Matrix& f, std::span<const double> ui,
                      std::span<const double> xi, std::span<double> out) {
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = -xi[c];
  for (std::size_t p = 0; p < ui.size(); ++p) k.axpy(ui[p], f.row(p).data(), out.data(), out.size());
}

double objective_impl(const kernels::KernelTable& k, const SparseTensor3& a, const Matrix& x,
                      const LaplacianMatrix& lap, const FactorModel& m, const HyperParams& h) {
  const Ranks r = m.ranks();
  CoreContraction cc;
  cc.resize(r);
  double fit = 0.0;
  for (const auto& e : a.entries()) {
    contract_core(k, m.core, m.u.row(e.i), m.v.row(e.j), m.w.row(e.k), cc);
    const double d = e.value - cc.value;
    fit += d * d;
  }
  double total = 0.5 * fit;

  if (h.lambda1 != 0.0) {
    std::vector<double> resid(m.f.cols());
    double xs = 0.0;
    for (std::size_t i = 0; i < m.u.rows(); ++i) {
      feature_residual(k, m.f, m.u.row(i), x.row(i), resid);
      xs += k.sum_sq(resid.data(), resid.size());
    }
    total += 0.5 * h.lambda1 * xs;
  }
  if (h.lambda2 != 0.0) {
    std::vector<double> lu(r.r1);
    double tr = 0.0;
    for (std::size_t i = 0; i < m.u.rows(); ++i) {
      laplacian_row(k, lap, m.u, i, lu);
      tr += k.dot(m.u.row(i).data(), lu.data(), r.r1);
    }
    total += 0.5 * h.lambda2 * tr;
  }
  if (h.lambda3 != 0.0) {
    double ridge = 0.0;
    for (const Matrix* mat : {&m.u, &m.v, &m.w, &m.f}) ridge += k.sum_sq(mat->values().data(), mat->size());
    ridge += k.sum_sq(m.core.values().data(), m.core.values().size());
    total += 0.5 * h.lambda3 * ridge;
  }
  return total;
}

}  // namespace

double objective(const SparseTensor3& a, const Matrix& x, const LaplacianMatrix& lap,
                 const FactorModel& m, const HyperParams& h) {
  check_inputs(a, x, lap, m, h);
  return objective_impl(kernels::active(), a, x, lap, m, h);
}

GradientBundle entry_gradients(double a_ijk, std::size_t i, std::size_t j, std::size_t k,
                               const FactorModel& m, const Matrix& x, const LaplacianMatrix& lap,
                               const HyperParams& h) {
  m.validate();
  if (i >= m.u.rows() || j >= m.v.rows() || k >= m.w.rows()) {
    throw DimensionError("entry_gradients index out of range");
  }
  if (h.lambda1 != 0.0 && (x.rows() != m.u.rows() || x.cols() != m.f.cols())) {
    throw DimensionError("feature matrix must be N x K matching U and F");
  }
  if (h.lambda2 != 0.0 && lap.values.rows() != m.u.rows()) {
    throw DimensionError("Laplacian must be N x N");
  }
  const auto& kt = kernels::active();
  const Ranks r = m.ranks();
  const auto ui = m.u.row(i);
  const auto vj = m.v.row(j);
  const auto wk = m.w.row(k);

  CoreContraction cc;
  contract_core(kt, m.core, ui, vj, wk, cc);
  const double resid = cc.value - a_ijk;

  GradientBundle g;
  g.u.resize(r.r1);
  g.v.resize(r.r2);
  g.w.resize(r.r3);
  for (std::size_t p = 0; p < r.r1; ++p) g.u[p] = resid * cc.along_u[p] + h.lambda3 * ui[p];
  for (std::size_t q = 0; q < r.r2; ++q) g.v[q] = resid * cc.along_v[q] + h.lambda3 * vj[q];
  for (std::size_t s = 0; s < r.r3; ++s) g.w[s] = resid * cc.along_w[s] + h.lambda3 * wk[s];

  g.core = DenseTensor3({r.r1, r.r2, r.r3});
  for (std::size_t p = 0; p < r.r1; ++p)
    for (std::size_t q = 0; q < r.r2; ++q)
      for (std::size_t s = 0; s < r.r3; ++s)
        g.core(p, q, s) = resid * ui[p] * vj[q] * wk[s] + h.lambda3 * m.core(p, q, s);

  const std::size_t kf = m.f.cols();
  g.f = Matrix(r.r1, kf);
  for (std::size_t p = 0; p < r.r1; ++p)
    for (std::size_t c = 0; c < kf; ++c) g.f(p, c) = h.lambda3 * m.f(p, c);

  if (h.lambda1 != 0.0) {
    std::vector<double> e(kf);
    feature_residual(kt, m.f, ui, x.row(i), e);
    for (std::size_t p = 0; p < r.r1; ++p) {
      g.u[p] += h.lambda1 * kt.dot(m.f.row(p).data(), e.data(), kf);
      for (std::size_t c = 0; c < kf; ++c) g.f(p, c) += h.lambda1 * ui[p] * e[c];
    }
  }
  if (h.lambda2 != 0.0) {
    std::vector<double> lu(r.r1);
    laplacian_row(kt, lap, m.u, i, lu);
    for (std::size_t p = 0; p < r.r1; ++p) g.u[p] += h.lambda2 * lu[p];
  }
  return g;
}

FactorModel initial_model(const Dims3& dims, std::size_t feature_count, const HyperParams& h) {
  h.validate(dims);
  std::mt19937_64 rng(h.seed);
  std::uniform_real_distribution<double> unif(0.0, h.init_scale);
  auto fill = [&](std::span<double> xs) {
    for (double& x : xs) x = unif(rng);
  };
  FactorModel m{DenseTensor3({h.ranks.r1, h.ranks.r2, h.ranks.r3}), Matrix(dims.n0, h.ranks.r1),
                Matrix(dims.n1, h.ranks.r2), Matrix(dims.n2, h.ranks.r3),
                Matrix(h.ranks.r1, feature_count)};
  fill(m.core.values());
  fill(m.u.values());
  fill(m.v.values());
  fill(m.w.values());
  fill(m.f.values());
  return m;
}

namespace {

// Scratch buffers reused across entry visits.
struct Workspace {
  CoreContraction cc;
  std::vector<double> gu, gv, gw, feat_resid, lu;

  Workspace(const Ranks& r, std::size_t k)
      : gu(r.r1), gv(r.r2), gw(r.r3), feat_resid(k), lu(r.r1) {
    cc.resize(r);
  }
};

void visit_entry(const kernels::KernelTable& k, const TensorEntry& e, FactorModel& m,
                 const Matrix& x, const LaplacianMatrix& lap, const HyperParams& h,
                 Workspace& ws) {
  auto ui = m.u.row(e.i);
  auto vj = m.v.row(e.j);
  auto wk = m.w.row(e.k);
  const Ranks r = m.ranks();
  const std::size_t slab = r.r2 * r.r3;
  const std::size_t kf = m.f.cols();

  contract_core(k, m.core, ui, vj, wk, ws.cc);
  const double resid = ws.cc.value - e.value;

  // All gradients are taken at the current point before any block moves.
  for (std::size_t p = 0; p < r.r1; ++p) ws.gu[p] = resid * ws.cc.along_u[p] + h.lambda3 * ui[p];
  for (std::size_t q = 0; q < r.r2; ++q) ws.gv[q] = resid * ws.cc.along_v[q] + h.lambda3 * vj[q];
  for (std::size_t s = 0; s < r.r3; ++s) ws.gw[s] = resid * ws.cc.along_w[s] + h.lambda3 * wk[s];

  if (h.lambda1 != 0.0) {
    feature_residual(k, m.f, ui, x.row(e.i), ws.feat_resid);
    for (std::size_t p = 0; p < r.r1; ++p)
      ws.gu[p] += h.lambda1 * k.dot(m.f.row(p).data(), ws.feat_resid.data(), kf);
  }
  if (h.lambda2 != 0.0) {
    laplacian_row(k, lap, m.u, e.i, ws.lu);
    k.axpy(h.lambda2, ws.lu.data(), ws.gu.data(), r.r1);
  }

  const double decay = 1.0 - h.eta * h.lambda3;
  double* core = m.core.values().data();
  for (std::size_t p = 0; p < r.r1; ++p) {
    k.axpby(-h.eta * resid * ui[p], ws.cc.vw.data(), decay, core + p * slab, slab);
  }
  for (std::size_t p = 0; p < r.r1; ++p) {
    auto fp = m.f.row(p);
    if (h.lambda1 != 0.0) {
      k.axpby(-h.eta * h.lambda1 * ui[p], ws.feat_resid.data(), decay, fp.data(), kf);
    } else {
      for (double& v : fp) v *= decay;
    }
  }
  k.axpy(-h.eta, ws.gu.data(), ui.data(), r.r1);
  k.axpy(-h.eta, ws.gv.data(), vj.data(), r.r2);
  k.axpy(-h.eta, ws.gw.data(), wk.data(), r.r3);
}

}  // namespace

TrainResult train_from(FactorModel start, const SparseTensor3& a, const Matrix& x,
                       const Matrix& z, const HyperParams& h, const kernels::KernelTable& k) {
  h.validate(a.dims());
  LaplacianMatrix lap;
  if (h.lambda2 != 0.0) lap = build_laplacian(z);
  check_inputs(a, x, lap, start, h);

  TrainResult out{std::move(start), {}};
  FactorModel& m = out.model;
  TrainReport& rep = out.report;

  // The shuffle stream is independent of the initialization stream.
  std::mt19937_64 rng(h.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(a.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Workspace ws(m.ranks(), m.f.cols());
  const auto entries = a.entries();

  auto checked = [](double loss, std::size_t epoch) {
    if (!std::isfinite(loss) || loss > kDivergenceLimit) throw DivergenceError(epoch, loss);
    return loss;
  };
  rep.loss_trace.push_back(checked(objective_impl(k, a, x, lap, m, h), 0));

  for (std::size_t epoch = 1; epoch <= h.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) visit_entry(k, entries[idx], m, x, lap, h, ws);
    const double loss = checked(objective_impl(k, a, x, lap, m, h), epoch);
    const double prev = rep.loss_trace.back();
    rep.loss_trace.push_back(loss);
    rep.epochs_run = epoch;
    if (std::abs(loss - prev) <= h.epsilon) {
      rep.converged = true;
      break;
    }
  }
  return out;
}

TrainResult train(const SparseTensor3& a, const Matrix& x, const Matrix& z, const HyperParams& h,
                  const kernels::KernelTable& k) {
  const std::size_t kf = x.empty() ? 0 : x.cols();
  return train_from(initial_model(a.dims(), kf, h), a, x, z, h, k);
}

Prediction decide(double reconstructed) noexcept {
  const double p = std::clamp(reconstructed, 0.0, 1.0);
  return {p, p > 0.5 ? Movement::up : Movement::down};
}

Prediction predict_entry(const FactorModel& m, std::size_t i, std::size_t j, std::size_t k) {
  return decide(reconstruct_entry(m, i, j, k));
}

}  // namespace cmtf
