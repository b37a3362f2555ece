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

// M-ranks, Tucker rank, M-decompositions and CP-rank bound certificates
// for even-order tensors.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "mrank/error.hpp"
#include "mrank/linalg.hpp"
#include "mrank/tensor.hpp"

namespace mrank {

struct PairingRank {
  Pairing pairing;
  int rank = 0;
  friend bool operator==(const PairingRank&, const PairingRank&) = default;
};

struct RankReport {
  int m_plus = 0;
  int m_minus = 0;
  std::vector<int> tucker;
  std::vector<PairingRank> pairing_ranks;  // canonical pairing order
  long long cp_lower = 0;
  long long cp_upper = 0;

  friend bool operator==(const RankReport&, const RankReport&) = default;
};

inline std::vector<int> tucker_rank(const Tensor& t, double rel_tol = kDefaultRankTol) {
  std::vector<int> out;
  for (std::size_t n = 0; n < t.order(); ++n)
    out.push_back(numerical_rank(mode_n_unfold(t, n), rel_tol));
  return out;
}

/// Largest CP-rank a single M-decomposition term can carry, over all
/// pairings: each half is an order-d tensor whose CP-rank is at most the
/// product of its dimensions without the largest one. For order 4 with
/// sorted dims n1 <= n2 <= n3 <= n4 this is n1 * n3.
inline long long cp_term_factor(const Dims& dims) {
  long long best = 0;
  for (const auto& pr : canonical_pairings(dims.size())) {
    auto half = [&](const std::vector<std::size_t>& group) {
      long long prod = 1;
      std::size_t largest = 0;
      for (auto j : group) {
        prod *= static_cast<long long>(dims[j]);
        largest = std::max(largest, dims[j]);
      }
      return prod / static_cast<long long>(largest);
    };
    best = std::max(best, half(pr.rows) * half(pr.cols));
  }
  return best;
}

/// Ranks of every canonical square unfolding, the Tucker rank and the
/// CP-rank interval [M+, factor * M-].
inline RankReport m_ranks(const Tensor& t, double rel_tol = kDefaultRankTol) {
  require(t.order() % 2 == 0, "M-ranks need an even-order tensor, got order " +
                                  std::to_string(t.order()));
  RankReport rep;
  for (const auto& pr : canonical_pairings(t.order()))
    rep.pairing_ranks.push_back({pr, numerical_rank(square_unfold(t, pr), rel_tol)});
  const auto [lo, hi] = std::minmax_element(
      rep.pairing_ranks.begin(), rep.pairing_ranks.end(),
      [](const auto& a, const auto& b) { return a.rank < b.rank; });
  rep.m_minus = lo->rank;
  rep.m_plus = hi->rank;
  rep.tucker = tucker_rank(t, rel_tol);
  rep.cp_lower = rep.m_plus;
  rep.cp_upper = cp_term_factor(t.dims()) * rep.m_minus;
  return rep;
}

enum class DecompositionKind { asymmetric, symmetric, strongly_symmetric };

inline const char* to_string(DecompositionKind k) {
  switch (k) {
    case DecompositionKind::asymmetric: return "asymmetric";
    case DecompositionKind::symmetric: return "symmetric";
    case DecompositionKind::strongly_symmetric: return "strongly_symmetric";
  }
  return "?";
}

struct MTerm {
  Tensor a;  // row-group factor
  Tensor b;  // column-group factor; equals a for the symmetric kinds
};

/// F_pi = sum_i a_i (x) b_i, where F_pi has the row group of `pairing` first.
struct MDecomposition {
  Pairing pairing;
  DecompositionKind kind = DecompositionKind::asymmetric;
  Dims dims;  // dims of the source tensor
  std::vector<MTerm> terms;

  std::size_t size() const noexcept { return terms.size(); }
};

inline Tensor reconstruct(const MDecomposition& dec) {
  Dims pdims;
  for (auto j : dec.pairing.rows) pdims.push_back(dec.dims[j]);
  for (auto j : dec.pairing.cols) pdims.push_back(dec.dims[j]);
  Tensor acc(pdims);
  for (const auto& term : dec.terms) acc += outer(term.a, term.b);
  return permute(acc, dec.pairing.to_permutation().inverse());
}

namespace detail {

inline Dims group_dims(const Dims& dims, const std::vector<std::size_t>& group) {
  Dims out;
  for (auto j : group) out.push_back(dims[j]);
  return out;
}

inline Tensor fold_column(const Eigen::VectorXcd& v, Dims dims) {
  return Tensor(std::move(dims), std::vector<Complex>(v.data(), v.data() + v.size()));
}

}  // namespace detail

/// Rank-one decomposition of the square unfolding: a_i = fold(s_i u_i),
/// b_i = fold(conj(v_i)); the term count is the numerical rank.
inline MDecomposition m_decompose(const Tensor& t, const Pairing& pr,
                                  double rel_tol = kDefaultRankTol) {
  const Matrix m = square_unfold(t, pr);
  const SvdResult f = svd(m);
  const int r = numerical_rank(f.S, rel_tol);
  MDecomposition dec{pr, DecompositionKind::asymmetric, t.dims(), {}};
  const Dims rdims = detail::group_dims(t.dims(), pr.rows);
  const Dims cdims = detail::group_dims(t.dims(), pr.cols);
  for (int i = 0; i < r; ++i) {
    dec.terms.push_back({detail::fold_column(f.S(i) * f.U.col(i), rdims),
                         detail::fold_column(f.V.col(i).conjugate(), cdims)});
  }
  return dec;
}

inline constexpr double kSymmetryTol = 1e-10;

/// F = sum_i B_i (x) B_i from the Takagi factorization of matr(F):
/// B_i = fold(sqrt(s_i) w_i). The term count is rank(matr(F)).
inline MDecomposition symmetric_m_decompose(const Tensor& t,
                                            double rel_tol = kDefaultRankTol) {
  require(t.order() % 2 == 0, "symmetric M-decomposition needs an even order");
  require(is_super_symmetric(t, kSymmetryTol), "tensor is not super-symmetric");
  const auto pr = Pairing::leading(t.order());
  const TakagiResult f = takagi(square_unfold(t, pr));
  const int r = numerical_rank(f.S, rel_tol);
  MDecomposition dec{pr, DecompositionKind::symmetric, t.dims(), {}};
  const Dims half(t.order() / 2, t.dims().front());
  for (int i = 0; i < r; ++i) {
    auto b = detail::fold_column(std::sqrt(f.S(i)) * f.W.col(i), half);
    dec.terms.push_back({b, b});
  }
  return dec;
}

/// Turns a symmetric M-decomposition of a super-symmetric tensor into one
/// whose factors are themselves super-symmetric, keeping the term count.
///
/// Stage m (1 <= m < d) takes factors partially symmetric in their first m
/// indices. With swaps P_j exchanging index j and m+1 (1-based),
///   A_i   = (B_i + sum_j P_j B_i) / (m + 1)   partial symmetric in 1..m+1,
///   C_i,j = (B_i - P_j B_i) / (m + 1),        B_i = A_i + sum_j C_i,j,
/// and the parts C_i,1, ..., C_i,m are removed one at a time. Each removal
/// keeps sum_i B_i (x) B_i = F only because F is super-symmetric, so the
/// reconstruction is re-checked after every removal and drift beyond 1e-6
/// (relative) aborts.
inline MDecomposition strongly_symmetrize(const MDecomposition& dec, const Tensor& t) {
  require(dec.kind != DecompositionKind::asymmetric,
          "strongly_symmetrize needs a symmetric M-decomposition");
  require(t.order() % 2 == 0 && dec.dims == t.dims(),
          "decomposition does not match the tensor");
  const std::size_t d = t.order() / 2;
  const double scale = std::max(t.norm(), 1e-300);
  auto drift = [&](const std::vector<Tensor>& factors) {
    Tensor acc(t.dims());
    for (const auto& f : factors) acc += outer(f, f);
    return (acc - t).norm() / scale;
  };

  std::vector<Tensor> factors;
  for (const auto& term : dec.terms) factors.push_back(term.a);
  if (!factors.empty()) {
    const double d0 = drift(factors);
    if (d0 > 1e-6)
      throw Error(ErrorKind::invalid_argument,
                  "decomposition does not reconstruct the tensor (relative error " +
                      std::to_string(d0) + ")");
  }

  for (std::size_t m = 1; m < d && !factors.empty(); ++m) {
    const double inv = 1.0 / static_cast<double>(m + 1);
    // parts[i][j-1] = C_i,j for j = 1..m
    std::vector<std::vector<Tensor>> parts(factors.size());
    for (std::size_t i = 0; i < factors.size(); ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const auto swap = Permutation::transposition(d, j, m);
        parts[i].push_back(Complex(inv) * (factors[i] - permute(factors[i], swap)));
      }
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < factors.size(); ++i) factors[i] -= parts[i][j];
      const double e = drift(factors);
      if (e > 1e-6)
        throw Error(ErrorKind::invalid_argument,
                    "symmetrization drifted (relative error " + std::to_string(e) +
                        " at stage " + std::to_string(m) + ", step " +
                        std::to_string(j + 1) + "); is the tensor super-symmetric?");
    }
  }

  MDecomposition out{dec.pairing, DecompositionKind::strongly_symmetric, dec.dims, {}};
  for (auto& f : factors) out.terms.push_back({f, f});
  return out;
}

namespace detail {

// Rotates b by a 2d-th root of unity so that its largest-modulus entry has
// phase in (-pi/(2d), pi/(2d)], the closest reachable to zero.
inline void normalize_root_phase(Tensor& b, std::size_t two_d) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < b.size(); ++k)
    if (std::abs(b[k]) > std::abs(b[best])) best = k;
  if (b[best] == Complex{}) return;
  const double step = 2.0 * std::numbers::pi / static_cast<double>(two_d);
  const double phase = std::arg(b[best]);
  const double turns = std::round(phase / step);
  b *= std::polar(1.0, -turns * step);
}

inline Tensor rank_one_root(const Tensor& t, double rel_tol) {
  const std::size_t d = t.order() / 2;
  const TakagiResult f = takagi(square_unfold(t, Pairing::leading(t.order())));
  const int r = numerical_rank(f.S, rel_tol);
  if (r == 0) return Tensor(Dims{t.dims().front()});
  if (r > 1)
    throw Error(ErrorKind::invalid_argument,
                "rank_one_factorize needs M-rank 1, got " + std::to_string(r));
  // t = A (x) A with A super-symmetric of order d.
  Tensor a = fold_column(std::sqrt(f.S(0)) * f.W.col(0), Dims(d, t.dims().front()));
  if (d == 1) return a;
  if (d % 2 == 0) return rank_one_root(a, rel_tol);
  // Odd d: A = c a^(x)d. Any nonzero mode-1 fiber is proportional to a.
  const Matrix unf = mode_n_unfold(a, 0);  // rows: other indices, cols: mode 0
  Eigen::Index row = 0;
  unf.rowwise().norm().maxCoeff(&row);
  Tensor v = from_vector(unf.row(row).transpose());
  Tensor vp = v;
  for (std::size_t k = 1; k < d; ++k) vp = outer(vp, v);
  Complex num{}, den{};
  for (std::size_t k = 0; k < vp.size(); ++k) {
    num += std::conj(vp[k]) * a[k];
    den += std::norm(vp[k]);
  }
  const Complex c = num / den;
  return std::pow(c, 1.0 / static_cast<double>(d)) * v;
}

}  // namespace detail

/// For a super-symmetric tensor of M-rank one, returns b with
/// b^(x)2d = t (Takagi of the unfolding, then of the folded factor).
/// b is unique up to a 2d-th root of unity; the returned representative
/// has its largest-modulus entry rotated as close to zero phase as that
/// freedom allows.
inline Tensor rank_one_factorize(const Tensor& t, double rel_tol = kDefaultRankTol) {
  require(t.order() % 2 == 0, "rank_one_factorize needs an even order");
  require(is_super_symmetric(t, kSymmetryTol), "tensor is not super-symmetric");
  Tensor b = detail::rank_one_root(t, rel_tol);
  detail::normalize_root_phase(b, t.order());
  return b;
}

/// b (x) b (x) ... (x) b, `times` factors.
inline Tensor outer_power(const Tensor& b, std::size_t times) {
  require(times >= 1, "outer power needs at least one factor");
  Tensor acc = b;
  for (std::size_t k = 1; k < times; ++k) acc = outer(acc, b);
  return acc;
}

/// F = A^1 (x) A^2 (x) ... (x) A^d for matrices A^i.
inline Tensor kron_tensor(const std::vector<Matrix>& factors) {
  require(!factors.empty(), "kron_tensor needs at least one factor");
  Tensor acc = from_matrix(factors.front());
  for (std::size_t i = 1; i < factors.size(); ++i) acc = outer(acc, from_matrix(factors[i]));
  return acc;
}

/// Exact CP-rank (= M+ rank) of A^1 (x) ... (x) A^d: the product of the
/// factor ranks.
inline long long cp_exact_for_kron(const std::vector<Matrix>& factors,
                                   double rel_tol = kDefaultRankTol) {
  long long prod = 1;
  for (const auto& a : factors) prod *= numerical_rank(a, rel_tol);
  return prod;
}

/// [rank_M, (n + 4n^2) rank_M] brackets the symmetric CP-rank of an
/// order-4 super-symmetric tensor.
inline std::pair<long long, long long> scp_bound_interval(
    const Tensor& t, double rel_tol = kDefaultRankTol) {
  require(t.order() == 4, "scp_bound_interval needs an order-4 tensor");
  require(is_super_symmetric(t, kSymmetryTol), "tensor is not super-symmetric");
  const long long n = static_cast<long long>(t.dims().front());
  const long long rm = numerical_rank(square_unfold(t, Pairing::leading(4)), rel_tol);
  return {rm, (n + 4 * n * n) * rm};
}

}  // namespace mrank
