#pragma once

#include <vector>

#include "ami/linalg/matrix.hpp"

namespace ami {

// Compact Householder factorization A = Q R. `factors` holds R on and above
// the diagonal and the reflector vectors (unit leading entry implied) below.
struct HouseholderQR {
  Matrix factors;
  std::vector<double> tau;
  // Triangular block-reflector factors, one per panel, for the blocked form.
  std::vector<Matrix> t_blocks;
  std::size_t panel = 0;

  std::size_t rows() const { return factors.rows(); }
  std::size_t cols() const { return factors.cols(); }
};

// Unblocked serial reference.
HouseholderQR householder_qr_reference(const Matrix& a);
// Blocked (compact WY) version; trailing updates run through gemm.
HouseholderQR householder_qr(const Matrix& a, std::size_t panel = 32);

// First `ncols` columns of Q (ncols <= rows). Works for either factorization.
Matrix form_q(const HouseholderQR& qr, std::size_t ncols);
Matrix form_q_reference(const HouseholderQR& qr, std::size_t ncols);
// Upper-triangular R, min(rows, cols) x cols.
Matrix r_factor(const HouseholderQR& qr);

struct QrResult {
  Matrix Q;
  Matrix R;
};

// Square full-rank QR with orthonormal Q. Throws NumericError when some
// |R_ii| falls below 1e-12 times the largest column norm of W; the caller is
// expected to redraw W.
QrResult qr_orthonormal(const Matrix& w);

}  // namespace ami
