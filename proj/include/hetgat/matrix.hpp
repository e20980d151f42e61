// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "hetgat/common.hpp"

namespace hetgat {

// Dense row-major matrix of 64-bit reals. The whole pipeline runs in double
// precision so analytic gradients can be checked against finite differences.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, 0.0) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative shape");
  }

  static Matrix filled(int rows, int cols, double v) {
    Matrix m(rows, cols);
    for (double& x : m.data_) x = v;
    return m;
  }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  long size() const { return static_cast<long>(data_.size()); }

  double& at(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double at(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  bool all_finite() const {
    for (double x : data_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  bool operator==(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

inline void ensure_finite(const Matrix& m, const char* where) {
  if (!m.all_finite()) throw NumericalError(std::string("non-finite values in ") + where);
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double d = 0.0;
  for (long i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a.data()[i] - b.data()[i]));
  return d;
}

}  // namespace hetgat
