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

// Seeded generators for synthetic instances: CP-form, Kronecker-form and
// super-symmetric tensors, observation masks and sparse corruption.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mrank/error.hpp"
#include "mrank/linalg.hpp"
#include "mrank/tensor.hpp"

namespace mrank {

enum class InstanceForm { cp, kron, supersym };

inline const char* to_string(InstanceForm f) {
  switch (f) {
    case InstanceForm::cp: return "cp";
    case InstanceForm::kron: return "kron";
    case InstanceForm::supersym: return "supersym";
  }
  return "?";
}

inline InstanceForm parse_form(std::string_view s) {
  if (s == "cp") return InstanceForm::cp;
  if (s == "kron") return InstanceForm::kron;
  if (s == "supersym") return InstanceForm::supersym;
  throw Error(ErrorKind::invalid_argument, "unknown instance form: " + std::string(s));
}

struct InstanceSpec {
  Dims dims;
  int r = 0;
  int k = 0;  // factor rank for kron, 0 otherwise
  InstanceForm form = InstanceForm::cp;
  std::uint64_t seed = 0;

  void validate() const {
    require(!dims.empty(), "instance dims must be nonempty");
    for (auto n : dims) require(n >= 1, "instance dims must be positive");
    require(r >= 0, "instance r must be nonnegative");
    if (form == InstanceForm::kron) {
      require(dims.size() % 2 == 0, "kron instances need an even order");
      require(k >= 1, "kron instances need k >= 1");
    }
  }

  friend bool operator==(const InstanceSpec&, const InstanceSpec&) = default;
};

/// Labels of the independent random streams derived from one master seed.
enum class Stream : std::uint32_t { factors = 1, mask = 2, noise = 3 };

/// Independent sub-seed for a labelled stream of a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, Stream label) {
  std::seed_seq seq{static_cast<std::uint32_t>(master),
                    static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(label)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

class ComplexNormal {
 public:
  explicit ComplexNormal(std::uint64_t seed) : rng_(seed) {}

  /// Real and imaginary parts independent N(0, 1).
  Complex operator()() {
    const double re = dist_(rng_);
    const double im = dist_(rng_);
    return {re, im};
  }

  Eigen::VectorXcd vector(std::size_t n) {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(n));
    for (auto& z : v) z = (*this)();
    return v;
  }

  Matrix matrix(std::size_t rows, std::size_t cols) {
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = (*this)();
    return m;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

/// sum_{i<r} a_i^1 (x) ... (x) a_i^D with complex Gaussian factor vectors.
/// Returns the tensor and r, an upper bound on its CP-rank.
inline std::pair<Tensor, long long> gen_cp(const InstanceSpec& spec) {
  spec.validate();
  require(spec.form == InstanceForm::cp, "gen_cp needs form = cp");
  ComplexNormal rng(derive_seed(spec.seed, Stream::factors));
  Tensor acc(spec.dims);
  for (int i = 0; i < spec.r; ++i) {
    Tensor term = from_vector(rng.vector(spec.dims[0]));
    for (std::size_t j = 1; j < spec.dims.size(); ++j)
      term = outer(term, from_vector(rng.vector(spec.dims[j])));
    acc += term;
  }
  return {std::move(acc), spec.r};
}

/// sum_{i<r} M_i^1 (x) ... (x) M_i^d where M_i^j is a rank-k complex
/// Gaussian product (n x k)(k x n') over the dimension pair (2j-1, 2j).
/// For order 4 this is sum A_i (x) B_i; the CP-rank bound is r k^d.
inline std::pair<Tensor, long long> gen_kron(const InstanceSpec& spec) {
  spec.validate();
  require(spec.form == InstanceForm::kron, "gen_kron needs form = kron");
  ComplexNormal rng(derive_seed(spec.seed, Stream::factors));
  const std::size_t d = spec.dims.size() / 2;
  const auto k = static_cast<std::size_t>(spec.k);
  Tensor acc(spec.dims);
  for (int i = 0; i < spec.r; ++i) {
    std::vector<Matrix> factors;
    for (std::size_t j = 0; j < d; ++j) {
      const auto rows = spec.dims[2 * j];
      const auto cols = spec.dims[2 * j + 1];
      const Matrix left = rng.matrix(rows, k);
      const Matrix right = rng.matrix(k, cols);
      factors.push_back(left * right);
    }
    Tensor term = from_matrix(factors.front());
    for (std::size_t j = 1; j < d; ++j) term = outer(term, from_matrix(factors[j]));
    acc += term;
  }
  long long bound = spec.r;
  for (std::size_t j = 0; j < d; ++j) bound *= spec.k;
  return {std::move(acc), bound};
}

/// sum_{i<r} v_i^(x)D with complex Gaussian v_i; super-symmetric with
/// symmetric CP-rank at most r.
inline Tensor gen_supersym(const InstanceSpec& spec) {
  spec.validate();
  require(spec.form == InstanceForm::supersym, "gen_supersym needs form = supersym");
  require(std::all_of(spec.dims.begin(), spec.dims.end(),
                      [&](auto n) { return n == spec.dims.front(); }),
          "super-symmetric instances need equal dims");
  ComplexNormal rng(derive_seed(spec.seed, Stream::factors));
  Tensor acc(spec.dims);
  for (int i = 0; i < spec.r; ++i) {
    const Tensor v = from_vector(rng.vector(spec.dims.front()));
    Tensor term = v;
    for (std::size_t j = 1; j < spec.dims.size(); ++j) term = outer(term, v);
    acc += term;
  }
  return acc;
}

/// Generates the instance described by `spec` with its CP-rank bound
/// (symmetric CP-rank bound for supersym).
inline std::pair<Tensor, long long> generate(const InstanceSpec& spec) {
  switch (spec.form) {
    case InstanceForm::cp: return gen_cp(spec);
    case InstanceForm::kron: return gen_kron(spec);
    case InstanceForm::supersym: return {gen_supersym(spec), spec.r};
  }
  throw Error(ErrorKind::invalid_argument, "unknown instance form");
}

/// Observed entries as sorted flat offsets (first-index-fastest).
struct Mask {
  Dims dims;
  std::vector<std::size_t> observed;
  double ratio = 1.0;

  std::size_t total() const { return dims_product(dims); }
  bool full() const { return observed.size() == total(); }

  std::vector<bool> indicator() const {
    std::vector<bool> on(total(), false);
    for (auto k : observed) on[k] = true;
    return on;
  }

  friend bool operator==(const Mask&, const Mask&) = default;
};

inline std::size_t rounded_count(double fraction, std::size_t total) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
}

/// Uniform sample without replacement of round(ratio * N) entries.
inline Mask gen_mask(const Dims& dims, double ratio, std::uint64_t seed) {
  require(ratio > 0.0 && ratio <= 1.0, "mask ratio must lie in (0, 1]");
  const std::size_t total = dims_product(dims);
  const std::size_t count = std::min(total, rounded_count(ratio, total));
  std::vector<std::size_t> all(total);
  std::iota(all.begin(), all.end(), std::size_t{0});
  Mask m{dims, {}, ratio};
  m.observed.reserve(count);
  std::mt19937_64 rng(seed);
  std::sample(all.begin(), all.end(), std::back_inserter(m.observed), count, rng);
  return m;
}

/// Exactly round(density * N) complex Gaussian nonzeros at uniform positions.
inline Tensor gen_sparse_noise(const Dims& dims, double density, std::uint64_t seed) {
  require(density >= 0.0 && density <= 1.0, "noise density must lie in [0, 1]");
  const std::size_t total = dims_product(dims);
  const std::size_t count = rounded_count(density, total);
  ComplexNormal rng(seed);
  std::vector<std::size_t> all(total);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> pos;
  pos.reserve(count);
  std::sample(all.begin(), all.end(), std::back_inserter(pos), count, rng.engine());
  Tensor z(dims);
  for (auto k : pos) {
    Complex v = rng();
    while (v == Complex{}) v = rng();
    z[k] = v;
  }
  return z;
}

inline std::size_t count_nonzeros(const Tensor& t) {
  return static_cast<std::size_t>(std::count_if(
      t.data().begin(), t.data().end(), [](const Complex& z) { return z != Complex{}; }));
}

/// Observed values of a tensor under a mask.
struct Observations {
  Mask mask;
  std::vector<Complex> values;  // aligned with mask.observed

  const Dims& dims() const { return mask.dims; }

  static Observations sample(const Tensor& t, Mask mask) {
    require(mask.dims == t.dims(), "mask dims do not match tensor dims");
    Observations obs{std::move(mask), {}};
    obs.values.reserve(obs.mask.observed.size());
    for (auto k : obs.mask.observed) obs.values.push_back(t[k]);
    return obs;
  }

  /// Observed values in place, zeros elsewhere.
  Tensor zero_filled() const {
    Tensor t(mask.dims);
    for (std::size_t i = 0; i < values.size(); ++i) t[mask.observed[i]] = values[i];
    return t;
  }
};

}  // namespace mrank
