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

#include "emfluct/linalg.hpp"

#include <algorithm>
#include <utility>

#include "emfluct/error.hpp"
#include "emfluct/executor.hpp"

namespace emfluct {

const Executor& serial_executor() noexcept {
  static const SerialExecutor instance;
  return instance;
}

Matrix::Matrix(std::size_t n, std::initializer_list<double> row_major)
    : n_(n), a_(row_major) {
  require(a_.size() == n * n, "Matrix: initializer size must be n*n");
}

Matrix Matrix::identity(std::size_t n, double scale) {
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = scale;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

bool Matrix::is_diagonal() const noexcept {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      if (i != j && (*this)(i, j) != 0.0) return false;
  return true;
}

double Matrix::determinant() const {
  // LU with partial pivoting on a copy.
  std::vector<double> lu = a_;
  double det = 1.0;
  for (std::size_t col = 0; col < n_; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n_; ++r)
      if (std::abs(lu[r * n_ + col]) > std::abs(lu[pivot * n_ + col])) pivot = r;
    if (lu[pivot * n_ + col] == 0.0) return 0.0;
    if (pivot != col) {
      for (std::size_t c = 0; c < n_; ++c) std::swap(lu[col * n_ + c], lu[pivot * n_ + c]);
      det = -det;
    }
    const double p = lu[col * n_ + col];
    det *= p;
    for (std::size_t r = col + 1; r < n_; ++r) {
      const double f = lu[r * n_ + col] / p;
      for (std::size_t c = col; c < n_; ++c) lu[r * n_ + c] -= f * lu[col * n_ + c];
    }
  }
  return det;
}

Matrix Matrix::transpose() const {
  Matrix t(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::times_transpose(const Matrix& other) const {
  Matrix out(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n_; ++k) s += (*this)(i, k) * other(j, k);
      out(i, j) = s;
    }
  return out;
}

double Matrix::trace() const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) s += (*this)(i, i);
  return s;
}

double Matrix::frobenius_squared() const noexcept {
  double s = 0.0;
  for (double v : a_) s += v * v;
  return s;
}

void Matrix::apply(std::span<const double> x, std::span<double> out) const noexcept {
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += a_[i * n_ + j] * x[j];
    out[i] = s;
  }
}

void Matrix::apply_transpose(std::span<const double> x, std::span<double> out) const noexcept {
  for (std::size_t j = 0; j < n_; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += a_[i * n_ + j] * x[i];
    out[j] = s;
  }
}

}  // namespace emfluct
