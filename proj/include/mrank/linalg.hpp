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

// Dense complex matrix kernels: SVD, numerical rank, Takagi factorization
// and the two proximal maps used by the recovery solvers.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "mrank/error.hpp"
#include "mrank/tensor.hpp"

namespace mrank {

/// Relative threshold (against the largest singular value) behind every
/// reported rank.
inline constexpr double kDefaultRankTol = 1e-8;

struct SvdResult {
  Matrix U;
  Eigen::VectorXd S;  // nonincreasing
  Matrix V;           // M = U diag(S) V^H
};

struct TakagiResult {
  Matrix W;
  Eigen::VectorXd S;  // nonincreasing; M = W diag(S) W^T
};

/// Thin SVD.
inline SvdResult svd(const Matrix& m) {
  require(m.allFinite(), "svd input has non-finite entries");
  if (m.size() == 0) return {Matrix(m.rows(), 0), Eigen::VectorXd(0), Matrix(m.cols(), 0)};
  Eigen::BDCSVD<Matrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::convergence, "SVD failed to converge on a " +
                                            std::to_string(m.rows()) + "x" +
                                            std::to_string(m.cols()) + " matrix");
  return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

inline Eigen::VectorXd singular_values(const Matrix& m) {
  require(m.allFinite(), "svd input has non-finite entries");
  if (m.size() == 0) return Eigen::VectorXd(0);
  Eigen::BDCSVD<Matrix> solver(m);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::convergence, "SVD failed to converge");
  return solver.singularValues();
}

inline int numerical_rank(const Eigen::VectorXd& s, double rel_tol = kDefaultRankTol) {
  require(rel_tol > 0.0, "rank tolerance must be positive");
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  const double cut = rel_tol * s(0);
  return static_cast<int>((s.array() > cut).count());
}

inline int numerical_rank(const Matrix& m, double rel_tol = kDefaultRankTol) {
  return numerical_rank(singular_values(m), rel_tol);
}

inline double nuclear_norm(const Matrix& m) { return singular_values(m).sum(); }

/// Sum of entry moduli.
inline double l1_norm(const Matrix& m) { return m.cwiseAbs().sum(); }

inline double l1_norm(const Tensor& t) {
  double s = 0.0;
  for (const auto& z : t.data()) s += std::abs(z);
  return s;
}

inline Matrix reconstruct(const SvdResult& r) {
  return r.U * r.S.cast<Complex>().asDiagonal() * r.V.adjoint();
}

inline Matrix reconstruct(const TakagiResult& r) {
  return r.W * r.S.cast<Complex>().asDiagonal() * r.W.transpose();
}

namespace detail {

// Takagi factorization of a small complex symmetric K = A + iB through the
// real symmetric matrix [[A, B], [B, -A]]: an eigenpair (s, [x; y]) with
// s > 0 gives K conj(w) = s w for w = x + iy, and distinct positive
// eigenvectors give orthonormal w. Values at or below null_cut cannot be
// paired reliably (s and -s meet at zero); their columns are replaced by an
// orthonormal completion and their values by zero.
inline TakagiResult small_takagi(const Matrix& k, double null_cut) {
  const auto n = k.rows();
  const Eigen::MatrixXd a = k.real();
  const Eigen::MatrixXd b = k.imag();
  Eigen::MatrixXd h(2 * n, 2 * n);
  h << a, b, b, -a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success)
    throw Error(ErrorKind::convergence, "Takagi block eigensolver failed");
  TakagiResult out{Matrix(n, n), Eigen::VectorXd::Zero(n)};
  Eigen::Index good = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto col = 2 * n - 1 - j;  // eigenvalues ascend
    const double s = es.eigenvalues()(col);
    if (s <= null_cut) break;
    out.S(j) = s;
    const auto v = es.eigenvectors().col(col);
    for (Eigen::Index i = 0; i < n; ++i) out.W(i, j) = Complex(v(i), v(n + i));
    ++good;
  }
  if (good < n) {
    Matrix q = Matrix::Identity(n, n);
    if (good > 0) {
      Eigen::HouseholderQR<Matrix> qr(out.W.leftCols(good));
      q = qr.householderQ();
    }
    out.W.rightCols(n - good) = q.rightCols(n - good);
  }
  return out;
}

}  // namespace detail

/// Takagi factorization M = W diag(S) W^T of a complex symmetric matrix.
///
/// Starts from the SVD. Singular values are grouped into clusters that are
/// well separated (relative gap above 1e-6 of the largest); on each cluster
/// the compressed matrix K = U_c^H M conj(U_c) is complex symmetric and small,
/// and its own Takagi factorization rotates U_c into W_c. Singletons reduce
/// to the usual half-phase correction, degenerate clusters to a block
/// re-diagonalization. Numerically null values become exact zeros.
inline TakagiResult takagi(const Matrix& m) {
  require(m.rows() == m.cols(), "takagi needs a square matrix");
  const double scale = std::max(1.0, m.norm());
  require((m - m.transpose()).norm() <= 1e-10 * scale,
          "takagi input is not complex symmetric");
  const Matrix sym = 0.5 * (m + m.transpose());
  const auto n = sym.rows();
  if (n == 0) return {Matrix(0, 0), Eigen::VectorXd(0)};

  const SvdResult f = svd(sym);
  const double smax = f.S(0);
  TakagiResult out{Matrix::Zero(n, n), Eigen::VectorXd::Zero(n)};
  if (smax == 0.0) {
    out.W = Matrix::Identity(n, n);
    return out;
  }
  const double cluster_gap = 1e-6 * smax;
  const double null_cut = 1e-13 * smax * static_cast<double>(n);

  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && f.S(end - 1) - f.S(end) <= cluster_gap) ++end;
    const auto len = end - start;
    const Matrix uc = f.U.middleCols(start, len);
    Matrix kc = uc.adjoint() * sym * uc.conjugate();
    kc = 0.5 * (kc + kc.transpose());
    const TakagiResult small = detail::small_takagi(kc, null_cut);
    out.W.middleCols(start, len) = uc * small.W;
    out.S.segment(start, len) = small.S;
    start = end;
  }

  // Clusters come out in SVD order but Takagi values inside a cluster may
  // have been reordered; restore a global nonincreasing order.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](auto i, auto j) { return out.S(i) > out.S(j); });
  TakagiResult sorted{Matrix(n, n), Eigen::VectorXd(n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    sorted.W.col(j) = out.W.col(order[static_cast<std::size_t>(j)]);
    sorted.S(j) = out.S(order[static_cast<std::size_t>(j)]);
  }
  return sorted;
}

/// Proximal map of tau * nuclear norm.
inline Matrix svt(const Matrix& m, double tau) {
  require(tau >= 0.0, "svt threshold must be nonnegative");
  if (m.size() == 0) return m;
  const SvdResult f = svd(m);
  const Eigen::Index k = (f.S.array() > tau).count();
  if (k == 0) return Matrix::Zero(m.rows(), m.cols());
  const Eigen::VectorXd shrunk = (f.S.head(k).array() - tau).matrix();
  return f.U.leftCols(k) * shrunk.cast<Complex>().asDiagonal() * f.V.leftCols(k).adjoint();
}

/// Proximal map of tau * (sum of entry moduli): z -> z max(1 - tau/|z|, 0).
inline Matrix complex_soft_threshold(const Matrix& m, double tau) {
  require(tau >= 0.0, "soft threshold must be nonnegative");
  return m.unaryExpr([tau](const Complex& z) -> Complex {
    const double a = std::abs(z);
    return a > tau ? z * (1.0 - tau / a) : Complex{};
  });
}

}  // namespace mrank
