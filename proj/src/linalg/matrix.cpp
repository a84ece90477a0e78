#include "ami/linalg/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "ami/core/error.hpp"

namespace ami {

Matrix::Matrix(std::size_t rows, std::size_t cols, const std::vector<double>& values)
    : Matrix(rows, cols) {
  if (values.size() != rows * cols) throw ContractError("Matrix: value count does not match shape");
  std::copy(values.begin(), values.end(), buf_.get());
}

void Matrix::copy_from(const Matrix& o) {
  if (o.size() != 0) std::memcpy(buf_.get(), o.buf_.get(), o.size() * sizeof(double));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  constexpr std::size_t B = 32;
  for (std::size_t i0 = 0; i0 < rows_; i0 += B)
    for (std::size_t j0 = 0; j0 < cols_; j0 += B) {
      std::size_t i1 = std::min(rows_, i0 + B), j1 = std::min(cols_, j0 + B);
      for (std::size_t i = i0; i < i1; ++i)
        for (std::size_t j = j0; j < j1; ++j) t(j, i) = (*this)(i, j);
    }
  return t;
}

Matrix Matrix::block(std::size_t i0, std::size_t j0, std::size_t r, std::size_t c) const {
  if (i0 + r > rows_ || j0 + c > cols_) throw ContractError("Matrix::block out of range");
  return to_matrix(view().block(i0, j0, r, c));
}

Matrix to_matrix(ConstView v) {
  Matrix m(v.rows, v.cols);
  for (std::size_t i = 0; i < v.rows; ++i)
    std::memcpy(m.row(i), v.data + i * v.ld, v.cols * sizeof(double));
  return m;
}

double max_abs(ConstView v) {
  double m = 0.0;
  for (std::size_t i = 0; i < v.rows; ++i)
    for (std::size_t j = 0; j < v.cols; ++j) m = std::max(m, std::abs(v(i, j)));
  return m;
}

double max_abs_diff(ConstView a, ConstView b) {
  if (a.rows != b.rows || a.cols != b.cols) throw ContractError("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

double frobenius(ConstView v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.rows; ++i)
    for (std::size_t j = 0; j < v.cols; ++j) s += v(i, j) * v(i, j);
  return std::sqrt(s);
}

}  // namespace ami
