// Copyright 2026 The emfluct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace emfluct {

using Vector = std::vector<double>;

// Dense square matrix, row-major.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}
  Matrix(std::size_t n, std::initializer_list<double> row_major);

  static Matrix identity(std::size_t n, double scale = 1.0);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  std::span<const double> data() const noexcept { return a_; }

  bool is_diagonal() const noexcept;
  double determinant() const;
  Matrix transpose() const;
  // this * other^T
  Matrix times_transpose(const Matrix& other) const;
  double trace() const noexcept;
  double frobenius_squared() const noexcept;

  // out = this * x, summing over columns in ascending order.
  void apply(std::span<const double> x, std::span<double> out) const noexcept;
  // out = this^T * x.
  void apply_transpose(std::span<const double> x, std::span<double> out) const noexcept;

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_squared(std::span<const double> a) noexcept { return dot(a, a); }
inline double norm(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

inline bool all_finite(std::span<const double> a) noexcept {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

// Hilbert-Schmidt pairing sum_ij A_ij u_i v_j for a flat row-major d x d A.
inline double hs_outer(std::span<const double> a, std::span<const double> u,
                       std::span<const double> v) noexcept {
  const std::size_t d = u.size();
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) s += a[i * d + j] * u[i] * v[j];
  return s;
}

// sum_ijk T_ijk u_i v_j w_k for a flat d x d x d tensor.
inline double contract3(std::span<const double> t, std::span<const double> u,
                        std::span<const double> v, std::span<const double> w) noexcept {
  const std::size_t d = u.size();
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t k = 0; k < d; ++k) s += t[(i * d + j) * d + k] * u[i] * v[j] * w[k];
  return s;
}

}  // namespace emfluct
