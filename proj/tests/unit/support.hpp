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

// Shared helpers for the unit tests.

#pragma once

#include <cstdint>
#include <random>

#include "mrank/tensor.hpp"

namespace mrank::test {

inline Tensor random_tensor(const Dims& dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Tensor t(dims);
  for (auto& z : t.data()) z = {g(rng), g(rng)};
  return t;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = {g(rng), g(rng)};
  return m;
}

inline Eigen::VectorXcd random_vector(Eigen::Index n, std::uint64_t seed) {
  return random_matrix(n, 1, seed).col(0);
}

}  // namespace mrank::test
