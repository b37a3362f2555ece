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

#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "mrank/ranks.hpp"
#include "mrank/synth.hpp"
#include "support.hpp"

namespace mrank {
namespace {

using test::random_matrix;
using test::random_tensor;
using test::random_vector;

Matrix rank_r_matrix(Eigen::Index n, Eigen::Index r, std::uint64_t seed) {
  return random_matrix(n, r, seed) * random_matrix(r, n, seed + 1000);
}

Tensor vec(const Eigen::VectorXcd& v) { return from_vector(v); }

// Complex orthogonal Q (Q^T Q = I) as a product of complex reflections
// I - 2 v v^T / (v^T v).
Matrix complex_orthogonal(Eigen::Index n, std::uint64_t seed) {
  Matrix q = Matrix::Identity(n, n);
  for (int k = 0; k < 3; ++k) {
    const Eigen::VectorXcd v = random_vector(n, seed + static_cast<std::uint64_t>(k));
    const Complex vtv = (v.transpose() * v)(0, 0);
    q = (Matrix::Identity(n, n) - 2.0 * v * v.transpose() / vtv) * q;
  }
  return q;
}

// A symmetric but non-minimal decomposition of `t`: the minimal factors plus
// a cancelling pair K, iK (K (x) K + iK (x) iK = 0), all mixed by a complex
// orthogonal matrix, which leaves sum_i B_i (x) B_i unchanged while
// destroying the factors' own symmetry.
MDecomposition scrambled_decomposition(const Tensor& t, std::uint64_t seed) {
  MDecomposition dec = symmetric_m_decompose(t);
  const Dims half(t.order() / 2, t.dim(0));
  const Tensor k = random_tensor(half, seed);
  dec.terms.push_back({k, k});
  const Tensor ik = Complex(0.0, 1.0) * k;
  dec.terms.push_back({ik, ik});
  const auto r = static_cast<Eigen::Index>(dec.terms.size());
  const Matrix q = complex_orthogonal(r, seed + 1);
  std::vector<MTerm> mixed;
  for (Eigen::Index i = 0; i < r; ++i) {
    Tensor b(half);
    for (Eigen::Index j = 0; j < r; ++j) b += q(i, j) * dec.terms[static_cast<std::size_t>(j)].a;
    mixed.push_back({b, b});
  }
  dec.terms = std::move(mixed);
  return dec;
}

TEST(MRanks, KronProductOfRanksTwoAndThree) {
  const Tensor f = outer(from_matrix(rank_r_matrix(6, 2, 1)), from_matrix(rank_r_matrix(6, 3, 2)));
  const RankReport rep = m_ranks(f);
  EXPECT_EQ(rep.m_plus, 6);
  EXPECT_EQ(rep.m_minus, 1);
  EXPECT_EQ(rep.tucker, (std::vector<int>{2, 2, 3, 3}));
}

TEST(MRanks, RandomCpFormTenToTheFour) {
  const Tensor t = gen_cp({{10, 10, 10, 10}, 12, 0, InstanceForm::cp, 3}).first;
  const RankReport rep = m_ranks(t);
  EXPECT_EQ(rep.m_plus, 12);
  EXPECT_EQ(rep.m_minus, 12);
  EXPECT_EQ(rep.tucker, (std::vector<int>{10, 10, 10, 10}));
}

TEST(MRanks, ZeroTensor) {
  const RankReport rep = m_ranks(Tensor({3, 3, 3, 3}));
  EXPECT_EQ(rep.m_plus, 0);
  EXPECT_EQ(rep.m_minus, 0);
  EXPECT_EQ(rep.tucker, (std::vector<int>{0, 0, 0, 0}));
  EXPECT_EQ(rep.cp_lower, 0);
  EXPECT_EQ(rep.cp_upper, 0);
}

TEST(MRanks, RejectsOddOrder) { EXPECT_THROW(m_ranks(Tensor({2, 2, 2})), Error); }

TEST(MRanks, CpUpperUsesSortedDims) {
  // sorted dims (2,3,4,5): n1 n3 = 8.
  const Tensor t = gen_cp({{5, 3, 4, 2}, 1, 0, InstanceForm::cp, 4}).first;
  const RankReport rep = m_ranks(t);
  EXPECT_EQ(rep.m_minus, 1);
  EXPECT_EQ(rep.cp_lower, 1);
  EXPECT_EQ(rep.cp_upper, 8);
}

TEST(MRanks, ReportInvariants) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Tensor t = gen_kron({{4, 5, 4, 6}, 2, 2, InstanceForm::kron, s}).first;
    const RankReport rep = m_ranks(t);
    int lo = rep.pairing_ranks.front().rank, hi = lo;
    for (const auto& p : rep.pairing_ranks) {
      lo = std::min(lo, p.rank);
      hi = std::max(hi, p.rank);
    }
    EXPECT_EQ(rep.m_minus, lo);
    EXPECT_EQ(rep.m_plus, hi);
    EXPECT_EQ(rep.cp_lower, rep.m_plus);
    EXPECT_LE(rep.cp_lower, rep.cp_upper);
    for (int t_n : rep.tucker) EXPECT_LE(t_n, rep.cp_upper);
  }
}

TEST(MDecompose, RankOneGivesOneTermProportionalToHalves) {
  const Tensor a = vec(random_vector(3, 1)), b = vec(random_vector(4, 2));
  const Tensor c = vec(random_vector(2, 3)), d = vec(random_vector(5, 4));
  const Tensor ab = outer(a, b), cd = outer(c, d);
  const MDecomposition dec = m_decompose(outer(ab, cd), Pairing::leading(4));
  ASSERT_EQ(dec.size(), 1u);
  auto parallel = [](const Tensor& x, const Tensor& y) {
    Complex ip{};
    for (std::size_t k = 0; k < x.size(); ++k) ip += std::conj(x[k]) * y[k];
    return std::abs(ip) / (x.norm() * y.norm());
  };
  EXPECT_NEAR(parallel(dec.terms[0].a, ab), 1.0, 1e-12);
  EXPECT_NEAR(parallel(dec.terms[0].b, cd), 1.0, 1e-12);
}

TEST(MDecompose, RandomReconstructionEveryPairing) {
  const Tensor t = random_tensor({2, 3, 3, 2}, 5);
  for (const auto& pr : canonical_pairings(4)) {
    const MDecomposition dec = m_decompose(t, pr);
    EXPECT_LE(relative_error(reconstruct(dec), t), 1e-10) << pr.to_string();
    EXPECT_EQ(static_cast<int>(dec.size()), numerical_rank(square_unfold(t, pr)));
  }
}

TEST(MDecompose, KronFormIsOneTerm) {
  const Tensor f = outer(from_matrix(rank_r_matrix(5, 2, 6)), from_matrix(rank_r_matrix(5, 3, 7)));
  EXPECT_EQ(m_decompose(f, Pairing::leading(4)).size(), 1u);
}

TEST(SymmetricMDecompose, RankOne) {
  const Tensor b = vec(random_vector(3, 8));
  const MDecomposition dec = symmetric_m_decompose(outer_power(b, 4));
  ASSERT_EQ(dec.size(), 1u);
  const Tensor bb = outer(b, b);
  Complex ip{};
  for (std::size_t k = 0; k < bb.size(); ++k) ip += std::conj(bb[k]) * dec.terms[0].a[k];
  EXPECT_NEAR(std::abs(ip) / (bb.norm() * dec.terms[0].a.norm()), 1.0, 1e-12);
}

TEST(SymmetricMDecompose, TwoSymmetricFactors) {
  // A_i = v_i (x) v_i keeps sum A_i (x) A_i super-symmetric.
  const Tensor v1 = vec(random_vector(4, 9)), v2 = vec(random_vector(4, 10));
  const Tensor t = outer_power(v1, 4) + outer_power(v2, 4);
  const MDecomposition dec = symmetric_m_decompose(t);
  EXPECT_EQ(dec.size(), 2u);
  EXPECT_EQ(dec.kind, DecompositionKind::symmetric);
  EXPECT_LE(relative_error(reconstruct(dec), t), 1e-9);
}

TEST(SymmetricMDecompose, ZeroAndAsymmetric) {
  EXPECT_EQ(symmetric_m_decompose(Tensor({3, 3, 3, 3})).size(), 0u);
  EXPECT_THROW(symmetric_m_decompose(random_tensor({3, 3, 3, 3}, 11)), Error);
}

TEST(StronglySymmetrize, SymmetricFactorsAreAFixedPoint) {
  const Tensor t = gen_supersym({{4, 4, 4, 4}, 3, 0, InstanceForm::supersym, 12});
  const MDecomposition dec = symmetric_m_decompose(t);
  const MDecomposition out = strongly_symmetrize(dec, t);
  ASSERT_EQ(out.size(), dec.size());
  EXPECT_EQ(out.kind, DecompositionKind::strongly_symmetric);
  for (std::size_t i = 0; i < dec.size(); ++i)
    EXPECT_LE((out.terms[i].a - dec.terms[i].a).norm(), 1e-12 * dec.terms[i].a.norm());
}

TEST(StronglySymmetrize, NonSymmetricFactorsBecomeSymmetric) {
  const Tensor t = gen_supersym({{4, 4, 4, 4}, 3, 0, InstanceForm::supersym, 13});
  const MDecomposition dec = scrambled_decomposition(t, 14);
  ASSERT_EQ(dec.size(), 5u);
  ASSERT_LE(relative_error(reconstruct(dec), t), 1e-10);
  std::size_t asymmetric = 0;
  for (const auto& term : dec.terms) asymmetric += !is_super_symmetric(term.a, 1e-8);
  ASSERT_GT(asymmetric, 0u);

  const MDecomposition out = strongly_symmetrize(dec, t);
  EXPECT_EQ(out.size(), dec.size());
  for (const auto& term : out.terms) EXPECT_TRUE(is_super_symmetric(term.a, 1e-8));
  EXPECT_LE(relative_error(reconstruct(out), t), 1e-7);
}

TEST(StronglySymmetrize, OrderSixThroughAllStages) {
  const Tensor t = gen_supersym({{3, 3, 3, 3, 3, 3}, 2, 0, InstanceForm::supersym, 15});
  const MDecomposition dec = scrambled_decomposition(t, 16);
  ASSERT_EQ(dec.size(), 4u);
  for (const auto& term : dec.terms) ASSERT_FALSE(is_super_symmetric(term.a, 1e-8));
  const MDecomposition out = strongly_symmetrize(dec, t);
  EXPECT_EQ(out.size(), 4u);
  for (const auto& term : out.terms) EXPECT_TRUE(is_super_symmetric(term.a, 1e-8));
  EXPECT_LE(relative_error(reconstruct(out), t), 1e-7);
}

TEST(StronglySymmetrize, DetectsNonSuperSymmetricInput) {
  // F = B (x) B with B a random (asymmetric) matrix is symmetric under the
  // group swap only; the first removal step breaks the reconstruction.
  const Tensor b = random_tensor({3, 3}, 17);
  const Tensor t = outer(b, b);
  MDecomposition dec{Pairing::leading(4), DecompositionKind::symmetric, t.dims(), {{b, b}}};
  EXPECT_THROW(strongly_symmetrize(dec, t), Error);
}

TEST(RankOneFactorize, RoundTripOfKnownVector) {
  Eigen::VectorXcd b0(2);
  b0 << Complex(1.0), Complex(0.0, 2.0);
  const Tensor t = outer_power(vec(b0), 4);
  const Tensor b = rank_one_factorize(t);
  EXPECT_LE((outer_power(b, 4) - t).norm(), 1e-10 * t.norm());
}

TEST(RankOneFactorize, BasisVectorUpToRootOfUnity) {
  Eigen::VectorXcd e1 = Eigen::VectorXcd::Zero(3);
  e1(0) = 1.0;
  const Tensor b = rank_one_factorize(outer_power(vec(e1), 4));
  EXPECT_NEAR(std::abs(b[0]), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(b[1]) + std::abs(b[2]), 0.0, 1e-12);
  const Complex z4 = std::pow(b[0], 4);
  EXPECT_NEAR(std::abs(z4 - Complex(1.0)), 0.0, 1e-12);
}

TEST(RankOneFactorize, PhaseNormalizedRepresentative) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Tensor t = outer_power(vec(random_vector(5, 20 + s)), 4);
    const Tensor b = rank_one_factorize(t);
    std::size_t big = 0;
    for (std::size_t k = 1; k < b.size(); ++k)
      if (std::abs(b[k]) > std::abs(b[big])) big = k;
    const double phase = std::arg(b[big]);
    EXPECT_GT(phase, -std::numbers::pi / 4 - 1e-12);
    EXPECT_LE(phase, std::numbers::pi / 4 + 1e-12);
    EXPECT_EQ(rank_one_factorize(t), b);  // deterministic
  }
}

TEST(RankOneFactorize, HigherOrders) {
  for (std::size_t order : {2u, 6u, 8u}) {
    const Tensor t = outer_power(vec(random_vector(3, 30 + order)), order);
    const Tensor b = rank_one_factorize(t);
    EXPECT_LE((outer_power(b, order) - t).norm(), 1e-9 * t.norm()) << "order " << order;
  }
}

TEST(RankOneFactorize, RejectsRankTwo) {
  const Tensor t = gen_supersym({{3, 3, 3, 3}, 2, 0, InstanceForm::supersym, 40});
  EXPECT_THROW(rank_one_factorize(t), Error);
}

TEST(CpExactForKron, Examples) {
  EXPECT_EQ(cp_exact_for_kron({rank_r_matrix(5, 2, 50), rank_r_matrix(5, 3, 51)}), 6);
  EXPECT_EQ(cp_exact_for_kron({rank_r_matrix(5, 2, 52), Matrix::Zero(5, 5)}), 0);
  const std::vector<Matrix> f{rank_r_matrix(3, 2, 53), rank_r_matrix(3, 2, 54),
                              rank_r_matrix(3, 2, 55)};
  EXPECT_EQ(cp_exact_for_kron(f), 8);
  EXPECT_EQ(m_ranks(kron_tensor(f)).m_plus, 8);
}

TEST(ScpBoundInterval, Examples) {
  const Tensor b = vec(random_vector(3, 60));
  EXPECT_EQ(scp_bound_interval(outer_power(b, 4)), (std::pair<long long, long long>{1, 39}));
  EXPECT_EQ(scp_bound_interval(Tensor({3, 3, 3, 3})), (std::pair<long long, long long>{0, 0}));
  const Tensor v1 = vec(random_vector(4, 61)), v2 = vec(random_vector(4, 62));
  const Tensor t = symmetrize(outer_power(v1, 4) + outer_power(v2, 4));
  EXPECT_EQ(scp_bound_interval(t), (std::pair<long long, long long>{2, 136}));
  EXPECT_THROW(scp_bound_interval(random_tensor({3, 3, 3, 3}, 63)), Error);
  EXPECT_THROW(scp_bound_interval(outer_power(b, 6)), Error);
}

// ---------------------------------------------------------------- properties

TEST(RanksProperty, PairingRanksBoundedByGeneratingTerms) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> dim(2, 7);
  std::uniform_int_distribution<int> rank(0, 10);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Dims dims{dim(rng), dim(rng), dim(rng), dim(rng)};
    const int r = rank(rng);
    const RankReport rep = m_ranks(gen_cp({dims, r, 0, InstanceForm::cp, s}).first);
    for (const auto& p : rep.pairing_ranks) EXPECT_LE(p.rank, r);
    EXPECT_LE(rep.m_minus, rep.m_plus);
  }
}

TEST(RanksProperty, SuperSymmetricPairingRanksAgree) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Tensor t = gen_supersym({{5, 5, 5, 5}, 1 + static_cast<int>(s), 0,
                                   InstanceForm::supersym, s});
    const RankReport rep = m_ranks(t);
    EXPECT_EQ(rep.m_plus, rep.m_minus);
  }
}

TEST(RanksProperty, PermutationInvariantMultiset) {
  const Tensor t = gen_kron({{3, 4, 5, 3}, 2, 2, InstanceForm::kron, 70}).first;
  auto sorted = [](const RankReport& r) {
    std::vector<int> v;
    for (const auto& p : r.pairing_ranks) v.push_back(p.rank);
    std::sort(v.begin(), v.end());
    return v;
  };
  const auto base = sorted(m_ranks(t));
  for (const auto& p : {Permutation{{1, 0, 3, 2}}, Permutation{{2, 0, 1, 3}}, Permutation{{3, 2, 1, 0}}})
    EXPECT_EQ(sorted(m_ranks(permute(t, p))), base);
}

}  // namespace
}  // namespace mrank
