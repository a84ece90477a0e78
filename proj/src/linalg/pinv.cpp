#include "ami/linalg/pinv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ami/core/error.hpp"
#include "ami/linalg/gemm.hpp"
#include "ami/linalg/qr.hpp"

namespace ami {
namespace {

constexpr double kRankTol = 1e-12;
// Unpivoted QR is only a rough rank indicator, so the fast path is abandoned
// well before the SVD threshold.
constexpr double kQrFallbackTol = 1e-9;

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void rotate(double* x, double* y, std::size_t n, double c, double s) {
  for (std::size_t i = 0; i < n; ++i) {
    const double a = x[i], b = y[i];
    x[i] = c * a - s * b;
    y[i] = s * a + c * b;
  }
}

}  // namespace

Svd jacobi_svd(const Matrix& a) {
  const bool flip = a.rows() < a.cols();
  // Rows of g are the columns of the tall orientation.
  Matrix g = flip ? a : a.transpose();
  const std::size_t n = g.rows(), m = g.cols();
  Matrix vt = Matrix::identity(n);
  const double eps = std::numeric_limits<double>::epsilon();
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = dot(g.row(p), g.row(p), m);
        const double beta = dot(g.row(q), g.row(q), m);
        const double gamma = dot(g.row(p), g.row(q), m);
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        rotate(g.row(p), g.row(q), m, c, s);
        rotate(vt.row(p), vt.row(q), n, c, s);
      }
    if (!rotated) break;
  }
  Svd out;
  out.sigma.resize(n);
  Matrix u(m, n);
  for (std::size_t j = 0; j < n; ++j) {
    const double nrm = std::sqrt(dot(g.row(j), g.row(j), m));
    out.sigma[j] = nrm;
    if (nrm > 0.0)
      for (std::size_t i = 0; i < m; ++i) u(i, j) = g(j, i) / nrm;
  }
  Matrix v = vt.transpose();
  if (flip) {
    out.U = std::move(v);
    out.V = std::move(u);
  } else {
    out.U = std::move(u);
    out.V = std::move(v);
  }
  return out;
}

Matrix pseudo_inverse_svd(const Matrix& a) {
  Svd s = jacobi_svd(a);
  double smax = 0.0;
  for (double x : s.sigma) smax = std::max(smax, x);
  Matrix p(a.cols(), a.rows());
  for (std::size_t r = 0; r < s.sigma.size(); ++r) {
    if (!(s.sigma[r] > kRankTol * smax)) continue;
    const double inv = 1.0 / s.sigma[r];
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double vi = s.V(i, r) * inv;
      for (std::size_t j = 0; j < a.rows(); ++j) p(i, j) += vi * s.U(j, r);
    }
  }
  return p;
}

Matrix upper_triangular_inverse(const Matrix& r) {
  const std::size_t k = r.rows();
  Matrix x(k, k);
  for (std::size_t i = k; i-- > 0;) {
    double* xi = x.row(i);
    xi[i] = 1.0;
    for (std::size_t q = i + 1; q < k; ++q) {
      const double c = r(i, q);
      if (c == 0.0) continue;
      const double* xq = x.row(q);
      for (std::size_t j = q; j < k; ++j) xi[j] -= c * xq[j];
    }
    const double d = 1.0 / r(i, i);
    for (std::size_t j = i; j < k; ++j) xi[j] *= d;
  }
  return x;
}

Matrix pseudo_inverse(const Matrix& a) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!std::isfinite(a.data()[i])) throw DomainError("pseudo_inverse: non-finite entry");
  if (a.empty()) return Matrix(a.cols(), a.rows());
  const bool wide = a.rows() < a.cols();
  HouseholderQR qr = householder_qr(wide ? a.transpose() : a);
  const std::size_t k = qr.tau.size();
  double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    dmax = std::max(dmax, std::abs(qr.factors(i, i)));
    dmin = std::min(dmin, std::abs(qr.factors(i, i)));
  }
  if (!(dmax > 0.0) || !(dmin > kQrFallbackTol * dmax)) return pseudo_inverse_svd(a);
  Matrix q = form_q(qr, k);
  Matrix rinv = upper_triangular_inverse(r_factor(qr));
  // Tall A = QR gives A+ = R^-1 Q^T; wide A = (QR)^T gives A+ = Q R^-T.
  return wide ? matmul(q.view(), rinv.view(), Op::N, Op::T)
              : matmul(rinv.view(), q.view(), Op::N, Op::T);
}

}  // namespace ami
