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

// Dense complex tensors stored first-index-fastest, plus the index
// bookkeeping (permutations, pairings, unfoldings) the rank and recovery
// code is built on. All indices in this API are 0-based; pairings print
// 1-based ("{1,2|3,4}") because that is how they are usually written.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mrank/error.hpp"

namespace mrank {

using Complex = std::complex<double>;
using Dims = std::vector<std::size_t>;
using Matrix = Eigen::MatrixXcd;

inline std::size_t dims_product(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         std::multiplies<>());
}

inline std::string dims_to_string(std::span<const std::size_t> dims) {
  std::ostringstream os;
  for (std::size_t j = 0; j < dims.size(); ++j) os << (j ? "x" : "") << dims[j];
  return os.str();
}

class Tensor {
 public:
  /// A 1-element order-1 zero tensor.
  Tensor() : dims_{1}, data_(1) {}

  explicit Tensor(Dims dims) : dims_(std::move(dims)) {
    check_dims();
    data_.assign(dims_product(dims_), Complex{});
  }

  Tensor(Dims dims, std::vector<Complex> data)
      : dims_(std::move(dims)), data_(std::move(data)) {
    check_dims();
    require(data_.size() == dims_product(dims_),
            "tensor data length " + std::to_string(data_.size()) +
                " does not match dims " + dims_to_string(dims_));
  }

  const Dims& dims() const noexcept { return dims_; }
  std::size_t dim(std::size_t j) const { return dims_.at(j); }
  std::size_t order() const noexcept { return dims_.size(); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const Complex> data() const noexcept { return data_; }
  std::span<Complex> data() noexcept { return data_; }
  const std::vector<Complex>& values() const noexcept { return data_; }

  Complex& operator[](std::size_t k) { return data_[k]; }
  const Complex& operator[](std::size_t k) const { return data_[k]; }

  std::size_t offset(std::span<const std::size_t> idx) const {
    require(idx.size() == order(), "multi-index has wrong length");
    std::size_t k = 0;
    std::size_t stride = 1;
    for (std::size_t j = 0; j < idx.size(); ++j) {
      require(idx[j] < dims_[j], "multi-index out of range");
      k += idx[j] * stride;
      stride *= dims_[j];
    }
    return k;
  }

  Dims multi_index(std::size_t k) const {
    Dims idx(order());
    for (std::size_t j = 0; j < order(); ++j) {
      idx[j] = k % dims_[j];
      k /= dims_[j];
    }
    return idx;
  }

  Complex& at(std::initializer_list<std::size_t> idx) {
    return data_[offset(std::span(idx.begin(), idx.size()))];
  }
  const Complex& at(std::initializer_list<std::size_t> idx) const {
    return data_[offset(std::span(idx.begin(), idx.size()))];
  }

  double norm() const {
    double s = 0.0;
    for (const auto& z : data_) s += std::norm(z);
    return std::sqrt(s);
  }

  bool is_zero() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](const Complex& z) { return z == Complex{}; });
  }

  Tensor& operator+=(const Tensor& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Tensor& operator-=(const Tensor& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Tensor& operator*=(Complex s) {
    for (auto& z : data_) z *= s;
    return *this;
  }

  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  friend Tensor operator*(Complex s, Tensor a) { return a *= s; }
  friend Tensor operator*(Tensor a, Complex s) { return a *= s; }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  void check_dims() const {
    require(!dims_.empty(), "tensor order must be at least 1");
    for (auto n : dims_) require(n >= 1, "tensor dimensions must be positive");
  }
  void check_same_shape(const Tensor& o) const {
    require(dims_ == o.dims_, "tensor shape mismatch: " +
                                  dims_to_string(dims_) + " vs " +
                                  dims_to_string(o.dims_));
  }

  Dims dims_;
  std::vector<Complex> data_;
};

inline double relative_error(const Tensor& x, const Tensor& ref) {
  const double denom = ref.norm();
  const double num = (x - ref).norm();
  return denom > 0.0 ? num / denom : num;
}

inline Tensor from_vector(const Eigen::VectorXcd& v) {
  return Tensor({static_cast<std::size_t>(v.size())},
                std::vector<Complex>(v.data(), v.data() + v.size()));
}

inline Tensor from_matrix(const Matrix& m) {
  return Tensor({static_cast<std::size_t>(m.rows()),
                 static_cast<std::size_t>(m.cols())},
                std::vector<Complex>(m.data(), m.data() + m.size()));
}

/// Position j of the source moves to position image[j] of the result.
struct Permutation {
  std::vector<std::size_t> image;

  static Permutation identity(std::size_t n) {
    Permutation p;
    p.image.resize(n);
    std::iota(p.image.begin(), p.image.end(), std::size_t{0});
    return p;
  }

  static Permutation transposition(std::size_t n, std::size_t i, std::size_t j) {
    auto p = identity(n);
    std::swap(p.image.at(i), p.image.at(j));
    return p;
  }

  std::size_t size() const noexcept { return image.size(); }

  bool is_valid() const {
    std::vector<bool> seen(image.size(), false);
    for (auto v : image) {
      if (v >= image.size() || seen[v]) return false;
      seen[v] = true;
    }
    return true;
  }

  Permutation inverse() const {
    Permutation q;
    q.image.resize(image.size());
    for (std::size_t j = 0; j < image.size(); ++j) q.image[image[j]] = j;
    return q;
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;
};

/// Result entry at the permuted multi-index equals the source entry at the
/// original one: result(i') = t(i) with i'[p.image[j]] = i[j].
inline Tensor permute(const Tensor& t, const Permutation& p) {
  require(p.size() == t.order(), "permutation length " +
                                     std::to_string(p.size()) +
                                     " does not match tensor order " +
                                     std::to_string(t.order()));
  require(p.is_valid(), "permutation is not a bijection");
  const std::size_t D = t.order();
  Dims out_dims(D);
  for (std::size_t j = 0; j < D; ++j) out_dims[p.image[j]] = t.dims()[j];

  std::vector<std::size_t> out_strides(D);
  std::size_t s = 1;
  for (std::size_t j = 0; j < D; ++j) {
    out_strides[j] = s;
    s *= out_dims[j];
  }
  // Stride in the result for a unit step along source axis j.
  std::vector<std::size_t> step(D);
  for (std::size_t j = 0; j < D; ++j) step[j] = out_strides[p.image[j]];

  std::vector<Complex> out(t.size());
  std::vector<std::size_t> idx(D, 0);
  std::size_t dst = 0;
  const auto& dims = t.dims();
  for (std::size_t k = 0; k < t.size(); ++k) {
    out[dst] = t[k];
    for (std::size_t j = 0; j < D; ++j) {
      if (++idx[j] < dims[j]) {
        dst += step[j];
        break;
      }
      dst -= step[j] * (dims[j] - 1);
      idx[j] = 0;
    }
  }
  return Tensor(std::move(out_dims), std::move(out));
}

/// (a ⊗ b) with the indices of a first.
inline Tensor outer(const Tensor& a, const Tensor& b) {
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  std::vector<Complex> out(a.size() * b.size());
  for (std::size_t kb = 0; kb < b.size(); ++kb) {
    const Complex bv = b[kb];
    Complex* dst = out.data() + kb * a.size();
    for (std::size_t ka = 0; ka < a.size(); ++ka) dst[ka] = a[ka] * bv;
  }
  return Tensor(std::move(dims), std::move(out));
}

/// Split of the 2d index positions into row and column groups of size d.
struct Pairing {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;

  /// {0..d-1 | d..2d-1}: first half as rows.
  static Pairing leading(std::size_t order) {
    require(order % 2 == 0 && order > 0, "pairings need an even order");
    Pairing pr;
    for (std::size_t j = 0; j < order; ++j)
      (j < order / 2 ? pr.rows : pr.cols).push_back(j);
    return pr;
  }

  std::size_t order() const noexcept { return rows.size() + cols.size(); }

  bool is_valid_for(std::size_t order_) const {
    if (order_ % 2 != 0 || rows.size() != order_ / 2 ||
        cols.size() != order_ / 2)
      return false;
    std::vector<bool> seen(order_, false);
    for (auto group : {&rows, &cols})
      for (auto j : *group) {
        if (j >= order_ || seen[j]) return false;
        seen[j] = true;
      }
    return true;
  }

  /// Position 0 in the row group, both groups ascending. Swapping the groups
  /// transposes the unfolding, so the rank is unchanged.
  Pairing canonical() const {
    Pairing pr = *this;
    std::sort(pr.rows.begin(), pr.rows.end());
    std::sort(pr.cols.begin(), pr.cols.end());
    if (!pr.cols.empty() && !pr.rows.empty() && pr.cols.front() < pr.rows.front())
      std::swap(pr.rows, pr.cols);
    return pr;
  }

  /// Moves the row group to the leading positions.
  Permutation to_permutation() const {
    Permutation p;
    p.image.resize(order());
    for (std::size_t k = 0; k < rows.size(); ++k) p.image[rows[k]] = k;
    for (std::size_t k = 0; k < cols.size(); ++k)
      p.image[cols[k]] = rows.size() + k;
    return p;
  }

  std::string to_string() const {
    std::ostringstream os;
    os << '{';
    for (std::size_t k = 0; k < rows.size(); ++k) os << (k ? "," : "") << rows[k] + 1;
    os << '|';
    for (std::size_t k = 0; k < cols.size(); ++k) os << (k ? "," : "") << cols[k] + 1;
    os << '}';
    return os.str();
  }

  /// Accepts "{1,2|3,4}", "1,2|3,4" or "12|34" (single-digit positions).
  static Pairing parse(std::string_view text) {
    Pairing pr;
    auto bar = text.find('|');
    require(bar != std::string_view::npos, "pairing needs a '|': " + std::string(text));
    auto parse_group = [&](std::string_view g, std::vector<std::size_t>& out) {
      const bool has_comma = g.find(',') != std::string_view::npos;
      std::string num;
      auto flush = [&] {
        if (num.empty()) return;
        const auto v = std::stoul(num);
        require(v >= 1, "pairing positions are 1-based");
        out.push_back(v - 1);
        num.clear();
      };
      for (char c : g) {
        if (c >= '0' && c <= '9') {
          num.push_back(c);
          if (!has_comma) flush();
        } else if (c == ',') {
          flush();
        } else if (c != '{' && c != '}' && c != ' ') {
          throw Error(ErrorKind::invalid_argument,
                      "bad character in pairing: " + std::string(text));
        }
      }
      flush();
    };
    parse_group(text.substr(0, bar), pr.rows);
    parse_group(text.substr(bar + 1), pr.cols);
    require(pr.is_valid_for(pr.order()), "invalid pairing: " + std::string(text));
    return pr;
  }

  friend bool operator==(const Pairing&, const Pairing&) = default;
};

/// The C(2d,d)/2 pairings with position 0 pinned to the row group, in
/// lexicographic order of the row group. For order 4: {1,2|3,4},
/// {1,3|2,4}, {1,4|2,3}.
inline std::vector<Pairing> canonical_pairings(std::size_t order) {
  require(order % 2 == 0 && order > 0, "pairings need an even order");
  const std::size_t d = order / 2;
  std::vector<Pairing> out;
  // Choose d-1 companions for position 0 out of positions 1..order-1.
  std::vector<bool> pick(order - 1, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(d - 1), true);
  do {
    Pairing pr;
    pr.rows.push_back(0);
    for (std::size_t j = 0; j + 1 < order; ++j)
      (pick[j] ? pr.rows : pr.cols).push_back(j + 1);
    out.push_back(std::move(pr));
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return out;
}

inline Matrix square_unfold(const Tensor& t, const Pairing& pr) {
  require(t.order() % 2 == 0, "square unfolding needs an even-order tensor, got order " +
                                  std::to_string(t.order()));
  require(pr.is_valid_for(t.order()), "pairing " + pr.to_string() +
                                          " is invalid for order " +
                                          std::to_string(t.order()));
  const Tensor p = permute(t, pr.to_permutation());
  const auto d = t.order() / 2;
  const auto rows = dims_product(std::span(p.dims()).first(d));
  const auto cols = dims_product(std::span(p.dims()).last(d));
  return Eigen::Map<const Matrix>(p.data().data(), static_cast<Eigen::Index>(rows),
                                  static_cast<Eigen::Index>(cols));
}

inline Tensor square_fold(const Matrix& m, const Dims& dims, const Pairing& pr) {
  require(dims.size() % 2 == 0 && pr.is_valid_for(dims.size()),
          "square_fold needs an even order and a valid pairing");
  Dims pdims;
  for (auto j : pr.rows) pdims.push_back(dims[j]);
  for (auto j : pr.cols) pdims.push_back(dims[j]);
  const auto d = dims.size() / 2;
  require(static_cast<std::size_t>(m.rows()) == dims_product(std::span(pdims).first(d)) &&
              static_cast<std::size_t>(m.cols()) == dims_product(std::span(pdims).last(d)),
          "matrix shape does not match dims " + dims_to_string(dims) +
              " under pairing " + pr.to_string());
  Tensor p(std::move(pdims), std::vector<Complex>(m.data(), m.data() + m.size()));
  return permute(p, pr.to_permutation().inverse());
}

inline Permutation mode_to_last(std::size_t order, std::size_t n) {
  Permutation p;
  p.image.resize(order);
  for (std::size_t j = 0, k = 0; j < order; ++j) {
    if (j == n) continue;
    p.image[j] = k++;
  }
  p.image[n] = order - 1;
  return p;
}

/// Mode-n matricization: mode n becomes the column index, the remaining
/// indices merge first-index-fastest into the row index.
inline Matrix mode_n_unfold(const Tensor& t, std::size_t n) {
  require(n < t.order(), "mode " + std::to_string(n) + " out of range for order " +
                             std::to_string(t.order()));
  const Tensor p = permute(t, mode_to_last(t.order(), n));
  const auto cols = t.dims()[n];
  return Eigen::Map<const Matrix>(p.data().data(),
                                  static_cast<Eigen::Index>(t.size() / cols),
                                  static_cast<Eigen::Index>(cols));
}

inline Tensor mode_n_fold(const Matrix& m, const Dims& dims, std::size_t n) {
  require(n < dims.size(), "mode out of range");
  const auto N = dims_product(dims);
  require(static_cast<std::size_t>(m.cols()) == dims[n] &&
              static_cast<std::size_t>(m.size()) == N,
          "matrix shape does not match mode unfolding of " + dims_to_string(dims));
  const auto p = mode_to_last(dims.size(), n);
  Dims pdims(dims.size());
  for (std::size_t j = 0; j < dims.size(); ++j) pdims[p.image[j]] = dims[j];
  Tensor pt(std::move(pdims), std::vector<Complex>(m.data(), m.data() + m.size()));
  return permute(pt, p.inverse());
}

inline bool has_equal_dims(const Tensor& t) {
  return std::all_of(t.dims().begin(), t.dims().end(),
                     [&](std::size_t n) { return n == t.dims().front(); });
}

/// Average of t over all D! index permutations.
inline Tensor symmetrize(const Tensor& t) {
  require(has_equal_dims(t), "symmetrize needs equal dimensions, got " +
                                 dims_to_string(t.dims()));
  auto p = Permutation::identity(t.order());
  Tensor acc(t.dims());
  std::size_t count = 0;
  do {
    acc += permute(t, p);
    ++count;
  } while (std::next_permutation(p.image.begin(), p.image.end()));
  acc *= Complex(1.0 / static_cast<double>(count));
  return acc;
}

/// Adjacent transpositions generate the symmetric group, so checking them
/// is enough.
inline bool is_super_symmetric(const Tensor& t, double tol) {
  if (!has_equal_dims(t)) return false;
  const double scale = std::max(1.0, t.norm());
  for (std::size_t j = 0; j + 1 < t.order(); ++j) {
    const auto swapped = permute(t, Permutation::transposition(t.order(), j, j + 1));
    if ((t - swapped).norm() > tol * scale) return false;
  }
  return true;
}

}  // namespace mrank
