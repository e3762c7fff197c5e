#pragma once

#include <cstddef>
#include <span>
#include <type_traits>
#include <vector>

#include "tnss/error.hpp"

namespace tnss {

/// Dense row-major matrix over an arbitrary scalar (BigInt, Rational, ...).
/// Lattice bases are stored column-wise: column j is basis vector b_j.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, const T& fill = T())
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n, T(0));
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<T> col(std::size_t c) const {
    std::vector<T> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  void swap_cols(std::size_t a, std::size_t b) {
    for (std::size_t r = 0; r < rows_; ++r) std::swap((*this)(r, a), (*this)(r, b));
  }

  /// col(dst) -= factor * col(src)
  template <typename F>
  void sub_col_multiple(std::size_t dst, std::size_t src, const F& factor) {
    for (std::size_t r = 0; r < rows_; ++r) (*this)(r, dst) -= factor * (*this)(r, src);
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <typename T>
Matrix<T> operator*(const Matrix<T>& a, const Matrix<T>& b) {
  require(a.cols() == b.rows(), ErrorKind::kInvalidArgument, "matrix product dimension mismatch");
  Matrix<T> out(a.rows(), b.cols(), T(0));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      if (a(i, k) == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += a(i, k) * b(k, j);
    }
  return out;
}

template <typename T>
std::vector<T> mat_vec(const Matrix<T>& a, std::type_identity_t<std::span<const T>> x) {
  require(a.cols() == x.size(), ErrorKind::kInvalidArgument, "matrix-vector dimension mismatch");
  std::vector<T> out(a.rows(), T(0));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a(i, j) * x[j];
  return out;
}

}  // namespace tnss
