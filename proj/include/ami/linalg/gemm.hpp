#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ami/linalg/matrix.hpp"

namespace ami {

enum class Op { N, T };

// Row-compressed copy of op(M), column indices ascending within a row.
struct Csr {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::uint32_t> col;
  std::vector<double> val;

  std::size_t nnz() const { return val.size(); }
};

Csr to_csr(ConstView m, Op op = Op::N);
std::size_t count_nonzeros(ConstView m);

// C = alpha * op(A) * op(B) + beta * C, straightforward triple loop. This is
// the serial reference the optimized kernels are tested against.
void gemm_reference(Op ta, Op tb, double alpha, ConstView A, ConstView B, double beta, View C);

enum class GemmPath { Auto, Dense, SparseA, SparseB };

struct GemmOptions {
  GemmPath path = GemmPath::Auto;
  bool parallel = true;
  // Set when C is known to hold zeros and beta == 0, letting sparse paths
  // skip rows that receive no contribution.
  bool c_is_zero = false;
};

// Same contract as gemm_reference. Picks a sparse kernel when one operand is
// mostly zeros, otherwise a packed blocked kernel. Every entry of C is
// accumulated over k in ascending order on all paths, so the result does not
// depend on the number of threads.
void gemm(Op ta, Op tb, double alpha, ConstView A, ConstView B, double beta, View C,
          const GemmOptions& opt = {});

Matrix matmul(ConstView A, ConstView B, Op ta = Op::N, Op tb = Op::N);

// Density below which a sparse path is chosen.
inline constexpr double kSparseDensity = 0.15;

}  // namespace ami
