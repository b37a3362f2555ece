// Copyright 2026 The mrank Authors. All Rights Reserved.
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

// Recovery solvers: low-M-rank completion and robust recovery on a square
// unfolding, the low-n-rank baselines over mode unfoldings, and
// super-symmetric completion.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mrank/error.hpp"
#include "mrank/linalg.hpp"
#include "mrank/ranks.hpp"
#include "mrank/synth.hpp"
#include "mrank/tensor.hpp"

namespace mrank {

struct SolverConfig {
  int max_iters = 5000;
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  double rho = 1.0;                 // multiplier on the data-scaled ADMM penalty
  std::optional<double> lambda;     // default 1/sqrt(n1 n2)
  double mu_init = 0.25;            // continuation start, times sigma_max
  double mu_shrink = 0.25;
  double mu_floor = 1e-8;           // times sigma_max
  double stage_tol = 1e-6;          // relative change ending a continuation stage
  double step = 1.5;                // gradient step of the completion iteration
  double gap_ratio = 5.0;           // singular-value gap that truncates the rank
  double rank_tol = kDefaultRankTol;
  std::uint64_t seed = 0;
  bool keep_trace = true;

  void validate() const {
    require(max_iters > 0, "max_iters must be positive");
    require(abs_tol >= 0.0 && rel_tol >= 0.0, "tolerances must be nonnegative");
    require(abs_tol > 0.0 || rel_tol > 0.0, "at least one tolerance must be positive");
    require(rho > 0.0, "rho must be positive");
    require(!lambda || *lambda > 0.0, "lambda must be positive");
    require(mu_init > 0.0 && mu_floor > 0.0 && mu_floor <= mu_init, "bad mu schedule");
    require(mu_shrink > 0.0 && mu_shrink < 1.0, "mu_shrink must lie in (0, 1)");
    require(stage_tol > 0.0, "stage_tol must be positive");
    require(step > 0.0 && step < 2.0, "step must lie in (0, 2)");
    require(gap_ratio > 1.0, "gap_ratio must exceed 1");
    require(rank_tol > 0.0, "rank_tol must be positive");
  }
};

struct SolveResult {
  Tensor recovered;
  std::optional<Tensor> sparse;
  int iters = 0;
  std::optional<double> rel_err_vs_truth;
  std::optional<double> rel_err_all;
  RankReport rank_report;
  bool converged = false;
  std::vector<double> residual_trace;
};

/// 1/sqrt(n1 n2).
inline double default_lambda(const Dims& dims) {
  require(dims.size() >= 2, "lambda default needs at least two dims");
  return 1.0 / std::sqrt(static_cast<double>(dims[0] * dims[1]));
}

/// Sets rel_err_vs_truth; for robust recovery the truth is the low-rank part.
inline SolveResult& attach_truth(SolveResult& res, const Tensor& truth) {
  res.rel_err_vs_truth = relative_error(res.recovered, truth);
  return res;
}

namespace detail {

inline void check_observations(const Observations& obs) {
  const auto& dims = obs.dims();
  require(dims.size() % 2 == 0, "recovery needs an even-order tensor");
  for (auto n : dims) require(n >= 1, "dims must be positive");
  require(!obs.mask.observed.empty(), "mask is empty: nothing observed");
  require(obs.values.size() == obs.mask.observed.size(),
          "observed values do not match the mask");
  const auto total = dims_product(dims);
  for (std::size_t i = 0; i < obs.mask.observed.size(); ++i) {
    require(obs.mask.observed[i] < total, "mask index out of range");
    require(i == 0 || obs.mask.observed[i - 1] < obs.mask.observed[i],
            "mask indices must be sorted and distinct");
  }
  for (const auto& v : obs.values)
    require(std::isfinite(v.real()) && std::isfinite(v.imag()), "observed values must be finite");
}

inline SolveResult trivial_result(Tensor t, const SolverConfig& cfg) {
  SolveResult res;
  res.rank_report = m_ranks(t, cfg.rank_tol);
  res.recovered = std::move(t);
  res.converged = true;
  return res;
}

inline bool admm_done(double primal, double dual, double scale, const SolverConfig& cfg) {
  const double tol = cfg.abs_tol + cfg.rel_tol * scale;
  return primal <= tol && dual <= tol;
}

// Data-scaled penalty N / (4 ||data||_1), times the configured multiplier.
inline double effective_rho(double rho, std::size_t n, double l1) {
  return l1 > 0.0 ? rho * static_cast<double>(n) / (4.0 * l1) : rho;
}

// svt whose kept rank is further cut at the largest ratio between
// consecutive surviving singular values when that ratio reaches `gap`.
inline Matrix svt_gap(const Matrix& m, double tau, double gap) {
  const SvdResult f = svd(m);
  Eigen::Index k = (f.S.array() > tau).count();
  if (k >= 2) {
    Eigen::Index best = 0;
    double best_ratio = 0.0;
    for (Eigen::Index i = 0; i + 1 < k; ++i) {
      const double ratio = f.S(i) / f.S(i + 1);
      if (ratio > best_ratio) {
        best_ratio = ratio;
        best = i;
      }
    }
    if (best_ratio >= gap) k = best + 1;
  }
  if (k == 0) return Matrix::Zero(m.rows(), m.cols());
  const Eigen::VectorXd shrunk = (f.S.head(k).array() - tau).matrix();
  return f.U.leftCols(k) * shrunk.cast<Complex>().asDiagonal() * f.V.leftCols(k).adjoint();
}

inline double sq(double x) { return x * x; }

}  // namespace detail

/// Low-M-rank completion on the square unfolding for `pr`: fixed-point
/// continuation X <- S_{step mu}(X - step P(X - B)) with mu shrinking from
/// mu_init sigma_max to the floor, rank truncated at singular-value gaps,
/// then a final stage at mu = 0 run to rel_tol.
inline SolveResult complete_m(const Observations& obs, const Pairing& pr,
                              const SolverConfig& cfg = {}) {
  cfg.validate();
  detail::check_observations(obs);
  const auto& dims = obs.dims();
  require(pr.is_valid_for(dims.size()), "pairing does not match the tensor order");
  if (obs.mask.full()) return detail::trivial_result(obs.zero_filled(), cfg);

  Tensor ind(dims);
  for (auto k : obs.mask.observed) ind[k] = 1.0;
  const Eigen::ArrayXXd w = square_unfold(ind, pr).real().array();
  const Matrix b = square_unfold(obs.zero_filled(), pr);
  const double b_norm = b.norm();

  SolveResult res;
  Matrix x = Matrix::Zero(b.rows(), b.cols());
  const double s_max = b_norm > 0.0 ? singular_values(b)(0) : 0.0;
  if (s_max == 0.0) {
    res.recovered = Tensor(dims);
    res.rank_report = m_ranks(res.recovered, cfg.rank_tol);
    res.converged = true;
    return res;
  }
  double mu = cfg.mu_init * s_max;
  const double floor = cfg.mu_floor * s_max;
  bool final_stage = false;
  while (res.iters < cfg.max_iters) {
    const Matrix residual = (w * (x - b).array()).matrix();
    const Matrix g = x - cfg.step * residual;
    Matrix next = detail::svt_gap(g, cfg.step * mu, cfg.gap_ratio);
    const double change = (next - x).norm() / std::max(1.0, x.norm());
    x = std::move(next);
    ++res.iters;
    const double fit = (w * (x - b).array()).matrix().norm();
    if (cfg.keep_trace) res.residual_trace.push_back(fit / b_norm);
    if (!final_stage) {
      if (change < cfg.stage_tol) {
        if (mu <= floor) {
          final_stage = true;
          mu = 0.0;
        } else {
          mu = std::max(mu * cfg.mu_shrink, floor);
        }
      }
    } else if (change <= cfg.rel_tol && fit <= cfg.abs_tol + cfg.rel_tol * b_norm) {
      res.converged = true;
      break;
    }
  }
  res.recovered = square_fold(x, dims, pr);
  res.rank_report = m_ranks(res.recovered, cfg.rank_tol);
  return res;
}

/// Low-n-rank completion baseline: ADMM over d mode-unfolding copies
/// Y_j = X with the data constraint kept on X.
inline SolveResult complete_n(const Observations& obs, const SolverConfig& cfg = {}) {
  cfg.validate();
  detail::check_observations(obs);
  const auto& dims = obs.dims();
  if (obs.mask.full()) return detail::trivial_result(obs.zero_filled(), cfg);

  const std::size_t d = dims.size();
  const Tensor b = obs.zero_filled();
  const double b_norm = b.norm();
  double l1 = 0.0;
  for (const auto& v : obs.values) l1 += std::abs(v);
  const double rho = detail::effective_rho(cfg.rho, obs.values.size(), l1);
  const double tau = 1.0 / (static_cast<double>(d) * rho);

  auto impose = [&](Tensor& t) {
    for (std::size_t i = 0; i < obs.values.size(); ++i) t[obs.mask.observed[i]] = obs.values[i];
  };

  SolveResult res;
  Tensor x = b;
  std::vector<Tensor> u(d, Tensor(dims));
  std::vector<Tensor> y(d);
  while (res.iters < cfg.max_iters) {
    for (std::size_t j = 0; j < d; ++j)
      y[j] = mode_n_fold(svt(mode_n_unfold(x + u[j], j), tau), dims, j);
    Tensor next(dims);
    for (std::size_t j = 0; j < d; ++j) next += y[j] - u[j];
    next *= Complex{1.0 / static_cast<double>(d)};
    impose(next);
    double primal = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const Tensor gap = next - y[j];
      u[j] += gap;
      primal += detail::sq(gap.norm());
    }
    primal = std::sqrt(primal);
    const double dual = rho * std::sqrt(static_cast<double>(d)) * (next - x).norm();
    x = std::move(next);
    ++res.iters;
    if (cfg.keep_trace) res.residual_trace.push_back(primal / b_norm);
    if (detail::admm_done(primal, dual, b_norm, cfg)) {
      res.converged = true;
      break;
    }
  }
  res.rank_report = m_ranks(x, cfg.rank_tol);
  res.recovered = std::move(x);
  return res;
}

/// Low-M-rank robust recovery F = Y + Z by ADMM on the square unfolding:
/// Y <- svt, Z <- complex soft threshold, scaled dual on Y + Z = F.
inline SolveResult rpca_m(const Tensor& f, const Pairing& pr, const SolverConfig& cfg = {}) {
  cfg.validate();
  require(f.order() % 2 == 0, "robust recovery needs an even-order tensor");
  require(pr.is_valid_for(f.order()), "pairing does not match the tensor order");
  const double lambda = cfg.lambda.value_or(default_lambda(f.dims()));
  const Matrix fm = square_unfold(f, pr);
  require(fm.allFinite(), "input has non-finite entries");
  const double f_norm = fm.norm();

  SolveResult res;
  if (f_norm == 0.0) {
    res.recovered = Tensor(f.dims());
    res.sparse = Tensor(f.dims());
    res.rel_err_all = 0.0;
    res.rank_report = m_ranks(res.recovered, cfg.rank_tol);
    res.converged = true;
    return res;
  }
  const double rho = detail::effective_rho(cfg.rho, f.size(), l1_norm(fm));
  Matrix y = Matrix::Zero(fm.rows(), fm.cols());
  Matrix z = y;
  Matrix u = y;
  while (res.iters < cfg.max_iters) {
    y = svt(fm - z - u, 1.0 / rho);
    Matrix zn = complex_soft_threshold(fm - y - u, lambda / rho);
    const Matrix gap = y + zn - fm;
    u += gap;
    const double primal = gap.norm();
    const double dual = rho * (zn - z).norm();
    z = std::move(zn);
    ++res.iters;
    if (cfg.keep_trace) res.residual_trace.push_back(primal / f_norm);
    if (detail::admm_done(primal, dual, f_norm, cfg)) {
      res.converged = true;
      break;
    }
  }
  res.recovered = square_fold(y, f.dims(), pr);
  res.sparse = square_fold(z, f.dims(), pr);
  res.rel_err_all = (y + z - fm).norm() / f_norm;
  res.rank_report = m_ranks(res.recovered, cfg.rank_tol);
  return res;
}

/// Low-n-rank robust recovery baseline: X_j copies of Y per mode unfolding,
/// joint (Y, Z) block solved in closed form.
inline SolveResult rpca_n(const Tensor& f, const SolverConfig& cfg = {}) {
  cfg.validate();
  require(f.order() % 2 == 0, "robust recovery needs an even-order tensor");
  const auto& dims = f.dims();
  const std::size_t d = dims.size();
  const double dd = static_cast<double>(d);
  const double lambda = cfg.lambda.value_or(default_lambda(dims));
  const double f_norm = f.norm();
  require(std::isfinite(f_norm), "input has non-finite entries");

  SolveResult res;
  if (f_norm == 0.0) {
    res.recovered = Tensor(dims);
    res.sparse = Tensor(dims);
    res.rel_err_all = 0.0;
    res.rank_report = m_ranks(res.recovered, cfg.rank_tol);
    res.converged = true;
    return res;
  }
  const double rho = detail::effective_rho(cfg.rho, f.size(), l1_norm(f));
  Tensor y(dims), z(dims), v(dims);
  std::vector<Tensor> u(d, Tensor(dims));
  std::vector<Tensor> x(d);
  const double soft_tau = lambda * (dd + 1.0) / (dd * rho);
  while (res.iters < cfg.max_iters) {
    Tensor avg(dims);
    for (std::size_t j = 0; j < d; ++j) {
      x[j] = mode_n_fold(svt(mode_n_unfold(y - u[j], j), 1.0 / (dd * rho)), dims, j);
      avg += x[j] + u[j];
    }
    avg *= Complex{1.0 / dd};
    const Tensor dz = f - v - avg;
    const Matrix zs = complex_soft_threshold(
        Eigen::Map<const Matrix>(dz.data().data(), static_cast<Eigen::Index>(dz.size()), 1),
        soft_tau);
    z = Tensor(dims, std::vector<Complex>(zs.data(), zs.data() + zs.size()));
    Tensor yn = (dd * avg + f - z - v) * Complex{1.0 / (dd + 1.0)};
    double primal = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const Tensor gap = x[j] - yn;
      u[j] += gap;
      primal += detail::sq(gap.norm());
    }
    const Tensor split = yn + z - f;
    v += split;
    primal = std::sqrt(primal + detail::sq(split.norm()));
    const double dual = rho * (yn - y).norm();
    y = std::move(yn);
    ++res.iters;
    if (cfg.keep_trace) res.residual_trace.push_back(primal / f_norm);
    if (detail::admm_done(primal, dual, f_norm, cfg)) {
      res.converged = true;
      break;
    }
  }
  res.rel_err_all = (y + z - f).norm() / f_norm;
  res.rank_report = m_ranks(y, cfg.rank_tol);
  res.recovered = std::move(y);
  res.sparse = std::move(z);
  return res;
}

/// Orbit of every entry of an n^D tensor under index permutations.
struct SymmetryOrbits {
  std::vector<std::size_t> orbit_of;  // per flat offset
  std::vector<std::size_t> size;      // per orbit
};

inline SymmetryOrbits symmetry_orbits(const Dims& dims) {
  SymmetryOrbits out;
  const std::size_t total = dims_product(dims);
  out.orbit_of.resize(total);
  std::map<Dims, std::size_t> ids;
  Dims idx(dims.size(), 0);
  for (std::size_t k = 0; k < total; ++k) {
    Dims key = idx;
    std::sort(key.begin(), key.end());
    auto [it, fresh] = ids.try_emplace(std::move(key), out.size.size());
    if (fresh) out.size.push_back(0);
    out.orbit_of[k] = it->second;
    ++out.size[it->second];
    for (std::size_t j = 0; j < dims.size(); ++j) {
      if (++idx[j] < dims[j]) break;
      idx[j] = 0;
    }
  }
  return out;
}

/// Super-symmetric completion by ADMM on the split X = Y: X <- svt of the
/// leading square unfolding, Y <- projection onto super-symmetric tensors
/// agreeing with the observations. The projection is exact: an orbit with an
/// observed entry takes that value, a free orbit takes its mean.
inline SolveResult complete_supersym(const Observations& obs, const SolverConfig& cfg = {}) {
  cfg.validate();
  detail::check_observations(obs);
  const auto& dims = obs.dims();
  require(std::all_of(dims.begin(), dims.end(), [&](auto n) { return n == dims.front(); }),
          "super-symmetric completion needs equal dims");

  const SymmetryOrbits orbits = symmetry_orbits(dims);
  const std::size_t n_orbits = orbits.size.size();
  std::vector<Complex> fixed(n_orbits);
  std::vector<bool> has_obs(n_orbits, false);
  double b_max = 0.0;
  for (const auto& v : obs.values) b_max = std::max(b_max, std::abs(v));
  const double clash_tol = 1e-10 * std::max(1.0, b_max);
  for (std::size_t i = 0; i < obs.values.size(); ++i) {
    const auto o = orbits.orbit_of[obs.mask.observed[i]];
    if (has_obs[o]) {
      if (std::abs(fixed[o] - obs.values[i]) > clash_tol)
        throw Error(ErrorKind::infeasible,
                    "observations are inconsistent under index symmetry at entry " +
                        std::to_string(obs.mask.observed[i]));
    } else {
      fixed[o] = obs.values[i];
      has_obs[o] = true;
    }
  }

  auto project = [&](const Tensor& t) {
    std::vector<Complex> sum(n_orbits);
    for (std::size_t k = 0; k < t.size(); ++k) sum[orbits.orbit_of[k]] += t[k];
    for (std::size_t o = 0; o < n_orbits; ++o)
      sum[o] = has_obs[o] ? fixed[o] : sum[o] / static_cast<double>(orbits.size[o]);
    Tensor out(dims);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = sum[orbits.orbit_of[k]];
    return out;
  };

  const bool determined = std::all_of(has_obs.begin(), has_obs.end(), [](bool b) { return b; });
  if (determined) return detail::trivial_result(project(Tensor(dims)), cfg);

  const Pairing pr = Pairing::leading(dims.size());
  double l1 = 0.0, b_norm = 0.0;
  for (const auto& v : obs.values) {
    l1 += std::abs(v);
    b_norm += std::norm(v);
  }
  b_norm = std::sqrt(b_norm);
  const double rho = detail::effective_rho(cfg.rho, obs.values.size(), l1);

  SolveResult res;
  Tensor y = project(Tensor(dims));
  Tensor u(dims);
  while (res.iters < cfg.max_iters) {
    const Tensor x = square_fold(svt(square_unfold(y - u, pr), 1.0 / rho), dims, pr);
    Tensor yn = project(x + u);
    const Tensor gap = x - yn;
    u += gap;
    const double primal = gap.norm();
    const double dual = rho * (yn - y).norm();
    y = std::move(yn);
    ++res.iters;
    if (cfg.keep_trace) res.residual_trace.push_back(b_norm > 0.0 ? primal / b_norm : primal);
    if (detail::admm_done(primal, dual, b_norm, cfg)) {
      res.converged = true;
      break;
    }
  }
  res.rank_report = m_ranks(y, cfg.rank_tol);
  res.recovered = std::move(y);
  return res;
}

}  // namespace mrank
