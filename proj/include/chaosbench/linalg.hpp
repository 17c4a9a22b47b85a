#pragma once

// Small dense row-major matrices for Jacobians and tangent frames. Sized at
// runtime; the systems here are 2- or 3-dimensional, so nothing is blocked.

#include <cstddef>
#include <vector>

#include "chaosbench/errors.hpp"
#include "chaosbench/real.hpp"

namespace chaosbench {

template <class Real>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, Real(0.0)) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = Real(1.0);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Real& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Real& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  Real trace() const {
    Real t(0.0);
    for (std::size_t i = 0; i < rows_ && i < cols_; ++i) t += (*this)(i, i);
    return t;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Real> data_;
};

/// Modified Gram-Schmidt on the columns of `frame`, in place. Returns the norms
/// removed from each column (the diagonal of R in frame = Q R).
template <class Real>
std::vector<Real> orthonormalize_columns(Matrix<Real>& frame) {
  const std::size_t n = frame.rows();
  const std::size_t k = frame.cols();
  std::vector<Real> norms(k, Real(0.0));
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      Real dot(0.0);
      for (std::size_t r = 0; r < n; ++r) mul_add(dot, frame(r, i), frame(r, j));
      for (std::size_t r = 0; r < n; ++r) frame(r, j) -= dot * frame(r, i);
    }
    Real sq(0.0);
    for (std::size_t r = 0; r < n; ++r) mul_add(sq, frame(r, j), frame(r, j));
    using std::sqrt;
    norms[j] = sqrt(sq);
    if (!(norms[j] > Real(0.0))) throw InvalidInput("tangent frame collapsed during orthonormalization");
    for (std::size_t r = 0; r < n; ++r) frame(r, j) /= norms[j];
  }
  return norms;
}

}  // namespace chaosbench
