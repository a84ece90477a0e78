#include "ami/nn/softmax.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace ami {

void softmax_cols_inplace(View m) {
  std::vector<double> mx(m.cols, -std::numeric_limits<double>::infinity()), sum(m.cols, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) mx[j] = std::max(mx[j], m(i, j));
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) {
      m(i, j) = std::exp(m(i, j) - mx[j]);
      sum[j] += m(i, j);
    }
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) m(i, j) /= sum[j];
}

Matrix softmax_cols(const Matrix& m) {
  Matrix out = m;
  softmax_cols_inplace(out.view());
  return out;
}

}  // namespace ami
