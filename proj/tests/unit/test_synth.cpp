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

#include <set>

#include "mrank/io.hpp"
#include "mrank/ranks.hpp"
#include "mrank/synth.hpp"

namespace mrank {
namespace {

const Dims kTen{10, 10, 10, 10};

TEST(GenCp, ZeroTermsGiveZeroTensor) {
  const auto [t, r] = gen_cp({{3, 4, 3, 4}, 0, 0, InstanceForm::cp, 1});
  EXPECT_TRUE(t.is_zero());
  EXPECT_EQ(r, 0);
}

TEST(GenCp, Deterministic) {
  const InstanceSpec spec{{4, 5, 4, 5}, 3, 0, InstanceForm::cp, 9};
  EXPECT_EQ(gen_cp(spec).first, gen_cp(spec).first);
  InstanceSpec other = spec;
  other.seed = 10;
  EXPECT_NE(gen_cp(spec).first, gen_cp(other).first);
}

TEST(GenCp, TableOneSetting) {
  const auto [t, r] = gen_cp({kTen, 12, 0, InstanceForm::cp, 5});
  EXPECT_EQ(r, 12);
  const RankReport rep = m_ranks(t);
  EXPECT_EQ(rep.m_plus, 12);
  EXPECT_EQ(rep.m_minus, 12);
}

TEST(GenCp, GeneralEvenOrder) {
  const auto [t, r] = gen_cp({{3, 3, 3, 3, 3, 3}, 2, 0, InstanceForm::cp, 6});
  EXPECT_EQ(t.order(), 6u);
  for (const auto& p : m_ranks(t).pairing_ranks) EXPECT_EQ(p.rank, 2);
}

TEST(GenKron, TableTwoSetting) {
  const auto [t, bound] = gen_kron({kTen, 2, 2, InstanceForm::kron, 7});
  EXPECT_EQ(bound, 8);
  const RankReport rep = m_ranks(t);
  EXPECT_EQ(rep.m_plus, 8);
  EXPECT_EQ(rep.m_minus, 2);
  EXPECT_EQ(rep.tucker, (std::vector<int>{4, 4, 4, 4}));
}

TEST(GenKron, SingleTermGivesOneKronTerm) {
  const auto [t, bound] = gen_kron({{6, 6, 6, 6}, 1, 3, InstanceForm::kron, 8});
  EXPECT_EQ(bound, 9);
  const RankReport rep = m_ranks(t);
  EXPECT_EQ(rep.m_plus, 9);
  EXPECT_EQ(rep.m_minus, 1);
}

TEST(GenKron, FactorRankOneIsCpForm) {
  const auto [t, bound] = gen_kron({{5, 5, 5, 5}, 3, 1, InstanceForm::kron, 9});
  EXPECT_EQ(bound, 3);
  const RankReport rep = m_ranks(t);
  EXPECT_EQ(rep.m_plus, 3);
  EXPECT_EQ(rep.m_minus, 3);
}

TEST(GenKron, TuckerIsClippedProduct) {
  for (std::uint64_t s = 0; s < 3; ++s) {
    const Dims dims{4, 9, 7, 12};
    const auto [t, bound] = gen_kron({dims, 2, 3, InstanceForm::kron, s});
    const RankReport rep = m_ranks(t);
    for (std::size_t j = 0; j < 4; ++j)
      EXPECT_EQ(rep.tucker[j], std::min(6, static_cast<int>(dims[j])));
  }
}

TEST(GenKron, ValidatesSpec) {
  EXPECT_THROW(gen_kron({{4, 4, 4}, 1, 1, InstanceForm::kron, 0}), Error);
  EXPECT_THROW(gen_kron({{4, 4, 4, 4}, 1, 0, InstanceForm::kron, 0}), Error);
  EXPECT_THROW(gen_cp({{4, 4, 4, 4}, -1, 0, InstanceForm::cp, 0}), Error);
}

TEST(GenSupersym, RankOneAndTableFourSetting) {
  const Tensor one = gen_supersym({{4, 4, 4, 4}, 1, 0, InstanceForm::supersym, 10});
  EXPECT_TRUE(is_super_symmetric(one, 1e-12));
  EXPECT_EQ(m_ranks(one).m_plus, 1);
  const Tensor eight = gen_supersym({kTen, 8, 0, InstanceForm::supersym, 11});
  EXPECT_TRUE(is_super_symmetric(eight, 1e-12));
  const RankReport rep = m_ranks(eight);
  EXPECT_EQ(rep.m_plus, 8);
  EXPECT_EQ(rep.m_minus, 8);
}

TEST(GenSupersym, DeterministicAndValidated) {
  const InstanceSpec spec{{3, 3, 3, 3}, 2, 0, InstanceForm::supersym, 12};
  EXPECT_EQ(gen_supersym(spec), gen_supersym(spec));
  EXPECT_THROW(gen_supersym({{3, 4, 3, 4}, 2, 0, InstanceForm::supersym, 12}), Error);
}

TEST(GenMask, Cardinality) {
  const Mask full = gen_mask({3, 4}, 1.0, 1);
  EXPECT_EQ(full.observed.size(), 12u);
  EXPECT_TRUE(full.full());
  const Mask m = gen_mask(kTen, 0.3, 2);
  EXPECT_EQ(m.observed.size(), 3000u);
  EXPECT_TRUE(std::is_sorted(m.observed.begin(), m.observed.end()));
  EXPECT_EQ(std::set<std::size_t>(m.observed.begin(), m.observed.end()).size(), 3000u);
  EXPECT_LT(m.observed.back(), 10000u);
  EXPECT_THROW(gen_mask({3}, 0.0, 1), Error);
  EXPECT_THROW(gen_mask({3}, 1.5, 1), Error);
}

TEST(GenMask, SeedsDiffer) {
  EXPECT_EQ(gen_mask(kTen, 0.3, 5), gen_mask(kTen, 0.3, 5));
  EXPECT_NE(gen_mask(kTen, 0.3, 5), gen_mask(kTen, 0.3, 6));
}

TEST(GenSparseNoise, Cardinality) {
  EXPECT_TRUE(gen_sparse_noise(kTen, 0.0, 1).is_zero());
  const Tensor z = gen_sparse_noise(kTen, 0.05, 2);
  EXPECT_EQ(count_nonzeros(z), 500u);
  EXPECT_EQ(count_nonzeros(gen_sparse_noise({7, 9}, 0.33, 3)), 21u);  // round(20.79)
  EXPECT_EQ(gen_sparse_noise(kTen, 0.05, 2), z);
  EXPECT_THROW(gen_sparse_noise(kTen, -0.1, 2), Error);
}

TEST(DeriveSeed, StreamsAreDistinct) {
  EXPECT_NE(derive_seed(1, Stream::mask), derive_seed(1, Stream::noise));
  EXPECT_NE(derive_seed(1, Stream::mask), derive_seed(2, Stream::mask));
  EXPECT_EQ(derive_seed(1, Stream::mask), derive_seed(1, Stream::mask));
}

TEST(InstanceSpec, JsonRoundTrip) {
  const InstanceSpec spec{{10, 10, 15, 15}, 3, 2, InstanceForm::kron, 1234567890123ull};
  const json j = spec;
  EXPECT_EQ(j.get<InstanceSpec>(), spec);
  EXPECT_EQ(json::parse(j.dump()).get<InstanceSpec>(), spec);
}

TEST(Observations, SampleAndZeroFill) {
  const Tensor t = gen_cp({{3, 3, 3, 3}, 2, 0, InstanceForm::cp, 13}).first;
  const Observations obs = Observations::sample(t, gen_mask(t.dims(), 0.5, 14));
  const Tensor z = obs.zero_filled();
  const auto on = obs.mask.indicator();
  for (std::size_t k = 0; k < t.size(); ++k) EXPECT_EQ(z[k], on[k] ? t[k] : Complex{});
}

}  // namespace
}  // namespace mrank
