#include "ami/linalg/qr.hpp"

#include <algorithm>
#include <cmath>

#include "ami/core/error.hpp"
#include "ami/linalg/gemm.hpp"

namespace ami {
namespace {

// Generates the reflector for column c of `a` (rows c..m-1) in place and
// returns tau. On exit a(c,c) = beta and a(c+1.., c) holds v without its
// leading 1.
double make_reflector(Matrix& a, std::size_t c) {
  const std::size_t m = a.rows();
  double alpha = a(c, c);
  double xnorm = 0.0;
  for (std::size_t i = c + 1; i < m; ++i) xnorm = std::hypot(xnorm, a(i, c));
  if (xnorm == 0.0) return 0.0;
  double beta = -std::copysign(std::hypot(alpha, xnorm), alpha);
  double tau = (beta - alpha) / beta;
  double scale = 1.0 / (alpha - beta);
  for (std::size_t i = c + 1; i < m; ++i) a(i, c) *= scale;
  a(c, c) = beta;
  return tau;
}

// Applies (I - tau v v^T) from the left to columns [j0, j1) of `a`, where v
// is reflector c stored in `a` itself.
void apply_reflector(Matrix& a, std::size_t c, double tau, std::size_t j0, std::size_t j1) {
  if (tau == 0.0 || j0 >= j1) return;
  const std::size_t m = a.rows();
  std::vector<double> w(j1 - j0);
  for (std::size_t j = j0; j < j1; ++j) w[j - j0] = a(c, j);
  for (std::size_t i = c + 1; i < m; ++i) {
    const double vi = a(i, c);
    const double* r = a.row(i);
    for (std::size_t j = j0; j < j1; ++j) w[j - j0] += vi * r[j];
  }
  for (std::size_t j = j0; j < j1; ++j) a(c, j) -= tau * w[j - j0];
  for (std::size_t i = c + 1; i < m; ++i) {
    const double s = tau * a(i, c);
    double* r = a.row(i);
    for (std::size_t j = j0; j < j1; ++j) r[j] -= s * w[j - j0];
  }
}

// Unit lower-trapezoidal V for the panel at (j0, j0) of width jb.
Matrix panel_v(const Matrix& f, std::size_t j0, std::size_t jb) {
  const std::size_t mv = f.rows() - j0;
  Matrix v(mv, jb);
  for (std::size_t i = 0; i < mv; ++i)
    for (std::size_t j = 0; j < jb; ++j) {
      if (i == j)
        v(i, j) = 1.0;
      else if (i > j)
        v(i, j) = f(j0 + i, j0 + j);
    }
  return v;
}

Matrix panel_t(const Matrix& v, const double* tau, std::size_t jb) {
  Matrix t(jb, jb);
  Matrix vtv = matmul(v.view(), v.view(), Op::T, Op::N);
  for (std::size_t i = 0; i < jb; ++i) {
    t(i, i) = tau[i];
    for (std::size_t r = 0; r < i; ++r) {
      double s = 0.0;
      for (std::size_t q = r; q < i; ++q) s += t(r, q) * vtv(q, i);
      t(r, i) = -tau[i] * s;
    }
  }
  return t;
}

// In place: E <- (I - V op(T) V^T) E, with op(T) = T^T when `transpose_t`.
void apply_block(const Matrix& v, const Matrix& t, bool transpose_t, View e) {
  Matrix w = matmul(v.view(), e, Op::T, Op::N);
  Matrix tw = matmul(t.view(), w.view(), transpose_t ? Op::T : Op::N, Op::N);
  gemm(Op::N, Op::N, -1.0, v.view(), tw.view(), 1.0, e);
}

}  // namespace

HouseholderQR householder_qr_reference(const Matrix& a) {
  HouseholderQR qr;
  qr.factors = a;
  const std::size_t k = std::min(a.rows(), a.cols());
  qr.tau.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    qr.tau[c] = make_reflector(qr.factors, c);
    apply_reflector(qr.factors, c, qr.tau[c], c + 1, a.cols());
  }
  return qr;
}

HouseholderQR householder_qr(const Matrix& a, std::size_t panel) {
  HouseholderQR qr;
  qr.factors = a;
  qr.panel = std::max<std::size_t>(panel, 1);
  const std::size_t m = a.rows(), n = a.cols(), k = std::min(m, n);
  qr.tau.resize(k);
  Matrix& f = qr.factors;
  for (std::size_t j0 = 0; j0 < k; j0 += qr.panel) {
    const std::size_t jb = std::min(qr.panel, k - j0);
    for (std::size_t c = j0; c < j0 + jb; ++c) {
      qr.tau[c] = make_reflector(f, c);
      apply_reflector(f, c, qr.tau[c], c + 1, j0 + jb);
    }
    Matrix v = panel_v(f, j0, jb);
    Matrix t = panel_t(v, qr.tau.data() + j0, jb);
    if (j0 + jb < n) apply_block(v, t, true, f.view().block(j0, j0 + jb, m - j0, n - j0 - jb));
    qr.t_blocks.push_back(std::move(t));
  }
  return qr;
}

Matrix form_q_reference(const HouseholderQR& qr, std::size_t ncols) {
  const std::size_t m = qr.rows();
  if (ncols > m) throw ContractError("form_q: more columns than rows");
  Matrix e(m, ncols);
  for (std::size_t i = 0; i < ncols; ++i) e(i, i) = 1.0;
  const std::size_t k = qr.tau.size();
  for (std::size_t c = k; c-- > 0;) {
    const double tau = qr.tau[c];
    if (tau == 0.0) continue;
    for (std::size_t j = c; j < ncols; ++j) {
      double w = e(c, j);
      for (std::size_t i = c + 1; i < m; ++i) w += qr.factors(i, c) * e(i, j);
      w *= tau;
      e(c, j) -= w;
      for (std::size_t i = c + 1; i < m; ++i) e(i, j) -= qr.factors(i, c) * w;
    }
  }
  return e;
}

Matrix form_q(const HouseholderQR& qr, std::size_t ncols) {
  if (qr.t_blocks.empty()) return form_q_reference(qr, ncols);
  const std::size_t m = qr.rows();
  if (ncols > m) throw ContractError("form_q: more columns than rows");
  Matrix e(m, ncols);
  for (std::size_t i = 0; i < ncols; ++i) e(i, i) = 1.0;
  const std::size_t k = qr.tau.size();
  for (std::size_t p = qr.t_blocks.size(); p-- > 0;) {
    const std::size_t j0 = p * qr.panel;
    const std::size_t jb = std::min(qr.panel, k - j0);
    if (j0 >= ncols) continue;
    Matrix v = panel_v(qr.factors, j0, jb);
    apply_block(v, qr.t_blocks[p], false, e.view().block(j0, j0, m - j0, ncols - j0));
  }
  return e;
}

Matrix r_factor(const HouseholderQR& qr) {
  const std::size_t k = std::min(qr.rows(), qr.cols());
  Matrix r(k, qr.cols());
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < qr.cols(); ++j) r(i, j) = qr.factors(i, j);
  return r;
}

QrResult qr_orthonormal(const Matrix& w) {
  if (w.rows() != w.cols()) throw ContractError("qr_orthonormal: square matrix expected");
  const std::size_t n = w.rows();
  double colmax = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w(i, j) * w(i, j);
    colmax = std::max(colmax, std::sqrt(s));
  }
  HouseholderQR qr = householder_qr(w);
  for (std::size_t i = 0; i < n; ++i)
    if (!(std::abs(qr.factors(i, i)) > 1e-12 * colmax))
      throw NumericError("qr_orthonormal: matrix is rank deficient");
  return {form_q(qr, n), r_factor(qr)};
}

}  // namespace ami
