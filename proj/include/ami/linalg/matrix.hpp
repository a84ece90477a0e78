#pragma once

#include <cstddef>
#include <cstdlib>
#include <memory>
#include <new>
#include <vector>

namespace ami {

// Non-owning strided views over row-major storage.
struct ConstView {
  const double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t ld = 0;

  const double& operator()(std::size_t i, std::size_t j) const { return data[i * ld + j]; }
  ConstView block(std::size_t i0, std::size_t j0, std::size_t r, std::size_t c) const {
    return {data + i0 * ld + j0, r, c, ld};
  }
};

struct View {
  double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t ld = 0;

  double& operator()(std::size_t i, std::size_t j) const { return data[i * ld + j]; }
  View block(std::size_t i0, std::size_t j0, std::size_t r, std::size_t c) const {
    return {data + i0 * ld + j0, r, c, ld};
  }
  operator ConstView() const { return {data, rows, cols, ld}; }
};

// Dense row-major matrix of doubles. Storage comes from calloc so large
// zero matrices (gradients that stay mostly zero) cost no page writes.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), buf_(alloc(rows * cols)) {}
  Matrix(std::size_t rows, std::size_t cols, double fill) : Matrix(rows, cols) {
    if (fill != 0.0)
      for (std::size_t i = 0; i < size(); ++i) buf_[i] = fill;
  }
  Matrix(std::size_t rows, std::size_t cols, const std::vector<double>& values);

  Matrix(const Matrix& o) : Matrix(o.rows_, o.cols_) { copy_from(o); }
  Matrix& operator=(const Matrix& o) {
    if (this != &o) {
      Matrix t(o);
      *this = std::move(t);
    }
    return *this;
  }
  Matrix(Matrix&& o) noexcept : rows_(o.rows_), cols_(o.cols_), buf_(std::move(o.buf_)) {
    o.rows_ = o.cols_ = 0;
  }
  Matrix& operator=(Matrix&& o) noexcept {
    rows_ = o.rows_;
    cols_ = o.cols_;
    buf_ = std::move(o.buf_);
    o.rows_ = o.cols_ = 0;
    return *this;
  }

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return rows_ * cols_; }
  bool empty() const { return size() == 0; }

  double* data() { return buf_.get(); }
  const double* data() const { return buf_.get(); }
  double* row(std::size_t i) { return buf_.get() + i * cols_; }
  const double* row(std::size_t i) const { return buf_.get() + i * cols_; }

  double& operator()(std::size_t i, std::size_t j) { return buf_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return buf_[i * cols_ + j]; }

  View view() { return {data(), rows_, cols_, cols_}; }
  ConstView view() const { return {data(), rows_, cols_, cols_}; }
  operator ConstView() const { return view(); }

  Matrix transpose() const;
  Matrix block(std::size_t i0, std::size_t j0, std::size_t r, std::size_t c) const;

 private:
  struct FreeDeleter {
    void operator()(double* p) const { std::free(p); }
  };
  static std::unique_ptr<double[], FreeDeleter> alloc(std::size_t n) {
    if (n == 0) return nullptr;
    auto* p = static_cast<double*>(std::calloc(n, sizeof(double)));
    if (p == nullptr) throw std::bad_alloc();
    return std::unique_ptr<double[], FreeDeleter>(p);
  }
  void copy_from(const Matrix& o);

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::unique_ptr<double[], FreeDeleter> buf_;
};

Matrix to_matrix(ConstView v);

double max_abs(ConstView v);
double max_abs_diff(ConstView a, ConstView b);
double frobenius(ConstView v);

}  // namespace ami
