/*
 * Copyright 2026 The fdsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FDSIM_DENSE_LU_HPP_
#define FDSIM_DENSE_LU_HPP_

// Dense LU factorization with scaled partial pivoting, for the small
// (dim <= ~50) real and complex MNA systems assembled by this library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace fdsim {

template <typename T>
class DenseMatrix {
 public:
  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t n) : n_(n), data_(n * n, T{}) {}

  std::size_t size() const { return n_; }

  T& operator()(std::size_t row, std::size_t col) {
    return data_[row * n_ + col];
  }
  const T& operator()(std::size_t row, std::size_t col) const {
    return data_[row * n_ + col];
  }

  void fill(const T& value) { std::fill(data_.begin(), data_.end(), value); }

  std::vector<T> multiply(std::span<const T> x) const {
    std::vector<T> y(n_, T{});
    for (std::size_t i = 0; i < n_; ++i) {
      T acc{};
      for (std::size_t j = 0; j < n_; ++j) acc += (*this)(i, j) * x[j];
      y[i] = acc;
    }
    return y;
  }

  // Max-row-sum norm.
  double norm_inf() const {
    double best = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n_; ++j) row += std::abs((*this)(i, j));
      best = std::max(best, row);
    }
    return best;
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<T> data_;
};

template <typename T>
double norm_inf(std::span<const T> v) {
  double best = 0.0;
  for (const T& x : v) best = std::max(best, static_cast<double>(std::abs(x)));
  return best;
}

// Pivots whose scaled magnitude falls below this are treated as zero.
inline constexpr double kSingularPivot = 1e-300;

template <typename T>
class LuFactorization {
 public:
  // Factors `a` in place. On failure, singular_row() names the first row
  // position that could not be pivoted (an all-zero row is reported as
  // itself; otherwise the elimination step k).
  explicit LuFactorization(DenseMatrix<T> a) : lu_(std::move(a)) {
    const std::size_t n = lu_.size();
    perm_.resize(n);
    std::vector<double> scale(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      perm_[i] = i;
      double big = 0.0;
      for (std::size_t j = 0; j < n; ++j) big = std::max(big, abs_(lu_(i, j)));
      if (big == 0.0) {
        singular_row_ = i;
        return;
      }
      scale[i] = 1.0 / big;
    }

    for (std::size_t k = 0; k < n; ++k) {
      std::size_t pivot = k;
      double best = -1.0;
      for (std::size_t i = k; i < n; ++i) {
        const double mag = abs_(lu_(i, k)) * scale[i];
        if (mag > best) {
          best = mag;
          pivot = i;
        }
      }
      if (!(best >= kSingularPivot)) {
        singular_row_ = perm_[k];
        return;
      }
      if (pivot != k) {
        for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(pivot, j));
        std::swap(scale[k], scale[pivot]);
        std::swap(perm_[k], perm_[pivot]);
      }
      const T inv = T{1} / lu_(k, k);
      for (std::size_t i = k + 1; i < n; ++i) {
        const T factor = lu_(i, k) * inv;
        lu_(i, k) = factor;
        if (factor == T{}) continue;
        for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= factor * lu_(k, j);
      }
    }
  }

  bool ok() const { return !singular_row_.has_value(); }
  std::optional<std::size_t> singular_row() const { return singular_row_; }

  // Requires ok().
  std::vector<T> solve(std::span<const T> b) const {
    const std::size_t n = lu_.size();
    std::vector<T> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      T acc = b[perm_[i]];
      for (std::size_t j = 0; j < i; ++j) acc -= lu_(i, j) * x[j];
      x[i] = acc;
    }
    for (std::size_t i = n; i-- > 0;) {
      T acc = x[i];
      for (std::size_t j = i + 1; j < n; ++j) acc -= lu_(i, j) * x[j];
      x[i] = acc / lu_(i, i);
    }
    return x;
  }

 private:
  static double abs_(const T& v) { return static_cast<double>(std::abs(v)); }

  DenseMatrix<T> lu_;
  std::vector<std::size_t> perm_;
  std::optional<std::size_t> singular_row_;
};

}  // namespace fdsim

#endif  // FDSIM_DENSE_LU_HPP_
