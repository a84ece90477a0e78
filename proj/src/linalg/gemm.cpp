#include "ami/linalg/gemm.hpp"

#include <algorithm>
#include <cstring>

#include "ami/core/error.hpp"
#include "ami/core/parallel.hpp"

namespace ami {
namespace {

std::size_t op_rows(ConstView m, Op op) { return op == Op::N ? m.rows : m.cols; }
std::size_t op_cols(ConstView m, Op op) { return op == Op::N ? m.cols : m.rows; }

double op_at(ConstView m, Op op, std::size_t i, std::size_t j) {
  return op == Op::N ? m(i, j) : m(j, i);
}

void check_shapes(Op ta, Op tb, ConstView A, ConstView B, View C) {
  if (op_cols(A, ta) != op_rows(B, tb) || op_rows(A, ta) != C.rows || op_cols(B, tb) != C.cols)
    throw ContractError("gemm: shape mismatch");
}

void scale_rows(View C, double beta, bool c_is_zero) {
  if (beta == 1.0) return;
  for (std::size_t i = 0; i < C.rows; ++i) {
    double* c = C.data + i * C.ld;
    if (beta == 0.0) {
      if (!c_is_zero) std::fill(c, c + C.cols, 0.0);
    } else {
      for (std::size_t j = 0; j < C.cols; ++j) c[j] *= beta;
    }
  }
}

// ---- packed dense kernel ----------------------------------------------------

constexpr std::size_t MR = 4, NR = 16, KC = 256, MC = 128, NC = 2048;

inline void micro_kernel(std::size_t kc, const double* __restrict ap, const double* __restrict bp,
                         double* __restrict c, std::size_t ldc, std::size_t mr, std::size_t nr,
                         double alpha) {
  double acc[MR][NR] = {};
  for (std::size_t p = 0; p < kc; ++p) {
    const double* b = bp + p * NR;
    for (std::size_t r = 0; r < MR; ++r) {
      const double a = ap[p * MR + r];
#pragma omp simd
      for (std::size_t q = 0; q < NR; ++q) acc[r][q] += a * b[q];
    }
  }
  for (std::size_t r = 0; r < mr; ++r)
    for (std::size_t q = 0; q < nr; ++q) c[r * ldc + q] += alpha * acc[r][q];
}

void pack_b(Op tb, ConstView B, std::size_t pc, std::size_t kc, std::size_t jc, std::size_t nc,
            double* bp) {
  for (std::size_t jr = 0; jr < nc; jr += NR) {
    std::size_t nr = std::min(NR, nc - jr);
    double* dst = bp + jr * kc;
    for (std::size_t p = 0; p < kc; ++p) {
      std::size_t q = 0;
      if (tb == Op::N) {
        const double* src = B.data + (pc + p) * B.ld + jc + jr;
        for (; q < nr; ++q) dst[p * NR + q] = src[q];
      } else {
        for (; q < nr; ++q) dst[p * NR + q] = B(jc + jr + q, pc + p);
      }
      for (; q < NR; ++q) dst[p * NR + q] = 0.0;
    }
  }
}

void pack_a(Op ta, ConstView A, std::size_t ic, std::size_t mc, std::size_t pc, std::size_t kc,
            double* ap) {
  for (std::size_t ir = 0; ir < mc; ir += MR) {
    std::size_t mr = std::min(MR, mc - ir);
    double* dst = ap + ir * kc;
    for (std::size_t p = 0; p < kc; ++p)
      for (std::size_t r = 0; r < MR; ++r)
        dst[p * MR + r] = r < mr ? op_at(A, ta, ic + ir + r, pc + p) : 0.0;
  }
}

void gemm_dense(Op ta, Op tb, double alpha, ConstView A, ConstView B, View C, bool parallel) {
  const std::size_t m = C.rows, n = C.cols, k = op_cols(A, ta);
  if (m == 0 || n == 0 || k == 0) return;
  std::vector<double> bp(KC * ((std::min(NC, n) + NR - 1) / NR * NR));
  const long mblocks = static_cast<long>((m + MC - 1) / MC);
  const bool par = parallel && !in_parallel() && mblocks > 1;
  for (std::size_t jc = 0; jc < n; jc += NC) {
    const std::size_t nc = std::min(NC, n - jc);
    for (std::size_t pc = 0; pc < k; pc += KC) {
      const std::size_t kc = std::min(KC, k - pc);
      pack_b(tb, B, pc, kc, jc, nc, bp.data());
#pragma omp parallel if (par)
      {
        std::vector<double> ap(MC * KC);
#pragma omp for schedule(static)
        for (long blk = 0; blk < mblocks; ++blk) {
          const std::size_t ic = static_cast<std::size_t>(blk) * MC;
          const std::size_t mc = std::min(MC, m - ic);
          pack_a(ta, A, ic, mc, pc, kc, ap.data());
          for (std::size_t jr = 0; jr < nc; jr += NR) {
            const std::size_t nr = std::min(NR, nc - jr);
            for (std::size_t ir = 0; ir < mc; ir += MR) {
              const std::size_t mr = std::min(MR, mc - ir);
              micro_kernel(kc, ap.data() + ir * kc, bp.data() + jr * kc,
                           C.data + (ic + ir) * C.ld + jc + jr, C.ld, mr, nr, alpha);
            }
          }
        }
      }
    }
  }
}

// ---- sparse kernels ---------------------------------------------------------

void gemm_sparse_a(const Csr& a, double alpha, ConstView Bn, View C, bool parallel) {
  const long m = static_cast<long>(C.rows);
#pragma omp parallel for schedule(dynamic, 16) if (parallel && !in_parallel())
  for (long i = 0; i < m; ++i) {
    double* c = C.data + static_cast<std::size_t>(i) * C.ld;
    for (std::size_t e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) {
      const double s = alpha * a.val[e];
      const double* b = Bn.data + a.col[e] * Bn.ld;
#pragma omp simd
      for (std::size_t j = 0; j < C.cols; ++j) c[j] += s * b[j];
    }
  }
}

void gemm_sparse_b(ConstView An, double alpha, const Csr& b, View C, bool parallel) {
  const long m = static_cast<long>(C.rows);
  const std::size_t k = b.rows;
#pragma omp parallel for schedule(dynamic, 16) if (parallel && !in_parallel())
  for (long i = 0; i < m; ++i) {
    double* c = C.data + static_cast<std::size_t>(i) * C.ld;
    const double* arow = An.data + static_cast<std::size_t>(i) * An.ld;
    for (std::size_t p = 0; p < k; ++p) {
      const double a = arow[p];
      if (a == 0.0) continue;
      const double s = alpha * a;
      for (std::size_t e = b.row_ptr[p]; e < b.row_ptr[p + 1]; ++e) c[b.col[e]] += s * b.val[e];
    }
  }
}

// C += alpha * A * B^T with B given untransposed (n x k). Each C entry is a
// gather-dot over the nonzeros of one row of A; blocks of B rows stay hot in
// cache while every row of A visits them.
void gemm_sparse_a_bt(const Csr& a, double alpha, ConstView B, View C, bool parallel) {
  constexpr std::size_t JB = 64;
  const long nblocks = static_cast<long>((C.cols + JB - 1) / JB);
#pragma omp parallel for schedule(dynamic, 1) if (parallel && !in_parallel() && nblocks > 1)
  for (long blk = 0; blk < nblocks; ++blk) {
    const std::size_t j0 = static_cast<std::size_t>(blk) * JB;
    const std::size_t j1 = std::min(C.cols, j0 + JB);
    for (std::size_t i = 0; i < C.rows; ++i) {
      const std::size_t e0 = a.row_ptr[i], e1 = a.row_ptr[i + 1];
      if (e0 == e1) continue;
      double* c = C.data + i * C.ld;
      for (std::size_t j = j0; j < j1; ++j) {
        const double* b = B.data + j * B.ld;
        double s = 0.0;
        for (std::size_t e = e0; e < e1; ++e) s += a.val[e] * b[a.col[e]];
        c[j] += alpha * s;
      }
    }
  }
}

// C += alpha * A^T * B with A given untransposed (k x m).
void gemm_sparse_b_at(ConstView A, double alpha, const Csr& b, View C, bool parallel) {
  constexpr std::size_t IB = 32;
  const long nblocks = static_cast<long>((C.rows + IB - 1) / IB);
#pragma omp parallel for schedule(dynamic, 1) if (parallel && !in_parallel() && nblocks > 1)
  for (long blk = 0; blk < nblocks; ++blk) {
    const std::size_t i0 = static_cast<std::size_t>(blk) * IB;
    const std::size_t i1 = std::min(C.rows, i0 + IB);
    for (std::size_t p = 0; p < b.rows; ++p) {
      const std::size_t e0 = b.row_ptr[p], e1 = b.row_ptr[p + 1];
      if (e0 == e1) continue;
      const double* arow = A.data + p * A.ld;
      for (std::size_t i = i0; i < i1; ++i) {
        if (arow[i] == 0.0) continue;
        const double s = alpha * arow[i];
        double* c = C.data + i * C.ld;
        for (std::size_t e = e0; e < e1; ++e) c[b.col[e]] += s * b.val[e];
      }
    }
  }
}

// Rough operation counts for the three kernels. The dense kernel is packed
// and vectorised, hence the discount.
GemmPath choose_path(ConstView A, ConstView B, std::size_t m, std::size_t n, std::size_t k) {
  const double asz = static_cast<double>(A.rows) * A.cols;
  const double bsz = static_cast<double>(B.rows) * B.cols;
  const double nza = static_cast<double>(count_nonzeros(A));
  const double nzb = static_cast<double>(count_nonzeros(B));
  const double dense = static_cast<double>(m) * n * k / 8.0;
  const double sparse_a = nza <= kSparseDensity * asz ? asz + nza * n : dense * 2;
  const double sparse_b = nzb <= kSparseDensity * bsz ? bsz + static_cast<double>(m) * k + nza * nzb / k : dense * 2;
  if (sparse_a <= sparse_b && sparse_a < dense) return GemmPath::SparseA;
  if (sparse_b < dense) return GemmPath::SparseB;
  return GemmPath::Dense;
}

}  // namespace

std::size_t count_nonzeros(ConstView m) {
  std::size_t nz = 0;
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* r = m.data + i * m.ld;
    for (std::size_t j = 0; j < m.cols; ++j) nz += r[j] != 0.0;
  }
  return nz;
}

Csr to_csr(ConstView m, Op op) {
  Csr out;
  out.rows = op_rows(m, op);
  out.cols = op_cols(m, op);
  out.row_ptr.assign(out.rows + 1, 0);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j)
      if (m(i, j) != 0.0) ++out.row_ptr[(op == Op::N ? i : j) + 1];
  for (std::size_t r = 0; r < out.rows; ++r) out.row_ptr[r + 1] += out.row_ptr[r];
  out.col.resize(out.row_ptr.back());
  out.val.resize(out.row_ptr.back());
  std::vector<std::size_t> fill(out.row_ptr.begin(), out.row_ptr.end() - 1);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) {
      const double v = m(i, j);
      if (v == 0.0) continue;
      const std::size_t r = op == Op::N ? i : j;
      const std::size_t c = op == Op::N ? j : i;
      out.col[fill[r]] = static_cast<std::uint32_t>(c);
      out.val[fill[r]++] = v;
    }
  return out;
}

void gemm_reference(Op ta, Op tb, double alpha, ConstView A, ConstView B, double beta, View C) {
  check_shapes(ta, tb, A, B, C);
  const std::size_t k = op_cols(A, ta);
  for (std::size_t i = 0; i < C.rows; ++i)
    for (std::size_t j = 0; j < C.cols; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += op_at(A, ta, i, p) * op_at(B, tb, p, j);
      C(i, j) = alpha * s + (beta == 0.0 ? 0.0 : beta * C(i, j));
    }
}

void gemm(Op ta, Op tb, double alpha, ConstView A, ConstView B, double beta, View C,
          const GemmOptions& opt) {
  check_shapes(ta, tb, A, B, C);
  scale_rows(C, beta, opt.c_is_zero);
  if (alpha == 0.0 || C.rows == 0 || C.cols == 0 || op_cols(A, ta) == 0) return;

  GemmPath path = opt.path;
  if (path == GemmPath::Auto) path = choose_path(A, B, C.rows, C.cols, op_cols(A, ta));

  switch (path) {
    case GemmPath::SparseA: {
      Csr a = to_csr(A, ta);
      if (tb == Op::N)
        gemm_sparse_a(a, alpha, B, C, opt.parallel);
      else
        gemm_sparse_a_bt(a, alpha, B, C, opt.parallel);
      break;
    }
    case GemmPath::SparseB: {
      Csr b = to_csr(B, tb);
      if (ta == Op::N)
        gemm_sparse_b(A, alpha, b, C, opt.parallel);
      else
        gemm_sparse_b_at(A, alpha, b, C, opt.parallel);
      break;
    }
    default:
      gemm_dense(ta, tb, alpha, A, B, C, opt.parallel);
  }
}

Matrix matmul(ConstView A, ConstView B, Op ta, Op tb) {
  Matrix c(op_rows(A, ta), op_cols(B, tb));
  GemmOptions opt;
  opt.c_is_zero = true;
  gemm(ta, tb, 1.0, A, B, 0.0, c.view(), opt);
  return c;
}

}  // namespace ami
