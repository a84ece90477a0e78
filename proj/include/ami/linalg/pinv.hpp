#pragma once

#include <vector>

#include "ami/linalg/matrix.hpp"

namespace ami {

struct Svd {
  Matrix U;  // m x r
  std::vector<double> sigma;
  Matrix V;  // n x r
};

// One-sided Jacobi SVD, thin (r = min(m, n)). Slow but robust; used for
// rank-deficient inputs and as an independent check.
Svd jacobi_svd(const Matrix& a);

// Moore-Penrose pseudo-inverse. Full-rank inputs go through a Householder QR
// of the tall orientation; anything whose R diagonal looks close to singular
// is redone with the SVD, dropping singular values below 1e-12 * sigma_max.
Matrix pseudo_inverse(const Matrix& a);
Matrix pseudo_inverse_svd(const Matrix& a);

// Inverse of an upper-triangular matrix with nonzero diagonal.
Matrix upper_triangular_inverse(const Matrix& r);

}  // namespace ami
