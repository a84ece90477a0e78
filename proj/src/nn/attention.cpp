#include "ami/nn/attention.hpp"

#include <cmath>
#include <cstring>

#include "ami/core/error.hpp"
#include "ami/core/parallel.hpp"
#include "ami/linalg/gemm.hpp"
#include "ami/nn/softmax.hpp"

namespace ami {
namespace {

struct Forward {
  Matrix ZT;    // N x (4 d_hid): row t holds [z^1_t, z^2_t, z^3_t, z^4_t]
  Matrix preT;  // N x d_Y
};

bool same_head(const AttnHead& a, const AttnHead& b) {
  return a.W_Q == b.W_Q && a.W_K == b.W_K && a.W_V == b.W_V;
}

// XT holds the tokens of all sequences as rows (N = n * l).
Forward forward_tokens(const AttnParams& p, const Matrix& XT, std::size_t l) {
  const std::size_t N = XT.rows();
  const std::size_t n = N / l;
  const double scale = 1.0 / std::sqrt(static_cast<double>(p.d_attn));
  Forward f;
  f.ZT = Matrix(N, kHeads * p.d_hid);
  for (std::size_t h = 0; h < kHeads; ++h) {
    std::size_t twin = h;
    for (std::size_t g = 0; g < h; ++g)
      if (same_head(p.heads[g], p.heads[h])) {
        twin = g;
        break;
      }
    if (twin != h) {
      for (std::size_t t = 0; t < N; ++t)
        std::memcpy(f.ZT.row(t) + h * p.d_hid, f.ZT.row(t) + twin * p.d_hid, p.d_hid * sizeof(double));
      continue;
    }
    const AttnHead& hd = p.heads[h];
    Matrix QT = matmul(XT.view(), hd.W_Q->view(), Op::N, Op::T);
    Matrix KT = matmul(XT.view(), hd.W_K->view(), Op::N, Op::T);
    Matrix VT = matmul(XT.view(), hd.W_V->view(), Op::N, Op::T);
    const long ns = static_cast<long>(n);
#pragma omp parallel for schedule(static) if (!in_parallel() && n > 1)
    for (long s = 0; s < ns; ++s) {
      const std::size_t r0 = static_cast<std::size_t>(s) * l;
      GemmOptions serial;
      serial.parallel = false;
      serial.path = GemmPath::Dense;
      // S[i][j] = k_i . q_j / sqrt(d_attn); column j is query position j.
      Matrix S(l, l);
      gemm(Op::N, Op::T, scale, KT.view().block(r0, 0, l, p.d_attn), QT.view().block(r0, 0, l, p.d_attn), 0.0,
           S.view(), serial);
      softmax_cols_inplace(S.view());
      // Z^T = A^T V^T, written straight into this head's block.
      gemm(Op::T, Op::N, 1.0, S.view(), VT.view().block(r0, 0, l, p.d_hid), 0.0,
           f.ZT.view().block(r0, h * p.d_hid, l, p.d_hid), serial);
    }
  }
  f.preT = matmul(f.ZT.view(), p.W_O.view(), Op::N, Op::T);
  for (std::size_t t = 0; t < N; ++t) {
    double* r = f.preT.row(t);
    for (std::size_t i = 0; i < p.d_Y; ++i) r[i] += p.b_O[i];
  }
  return f;
}

Matrix tokens_of(const std::vector<Matrix>& batch, std::size_t d, std::size_t& l) {
  if (batch.empty()) throw ContractError("attention batch is empty");
  l = batch.front().cols();
  if (l == 0) throw ContractError("attention input has no tokens");
  Matrix XT(batch.size() * l, d);
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const Matrix& X = batch[s];
    if (X.rows() != d || X.cols() != l) throw ContractError("attention input shape does not match d_X x l_X");
    for (std::size_t t = 0; t < l; ++t)
      for (std::size_t i = 0; i < d; ++i) XT(s * l + t, i) = X(i, t);
  }
  return XT;
}

GradientReport backward_from(const AttnParams& p, const Forward& f) {
  const std::size_t N = f.preT.rows();
  Matrix GT(N, p.d_Y);
  const double inv = 1.0 / static_cast<double>(N);
  for (std::size_t i = 0; i < GT.size(); ++i)
    if (f.preT.data()[i] > 0.0) GT.data()[i] = inv;
  GradientReport rep;
  rep.grads.emplace("W_O", matmul(GT.view(), f.ZT.view(), Op::T, Op::N));
  rep.monitored = {"W_O"};
  rep.rescore();
  return rep;
}

}  // namespace

void validate(const AttnParams& p) {
  if (p.W_O.rows() != p.d_Y || p.W_O.cols() != kHeads * p.d_hid || p.b_O.size() != p.d_Y)
    throw ContractError("AttnParams: output projection shape mismatch");
  for (const AttnHead& h : p.heads) {
    if (!h.W_Q || !h.W_K || !h.W_V) throw ContractError("AttnParams: head matrix missing");
    if (h.W_Q->rows() != p.d_attn || h.W_Q->cols() != p.d_X || h.W_K->rows() != p.d_attn ||
        h.W_K->cols() != p.d_X || h.W_V->rows() != p.d_hid || h.W_V->cols() != p.d_X)
      throw ContractError("AttnParams: head matrix shape mismatch");
  }
}

std::array<Matrix, kHeads> attn_head_outputs(const AttnParams& p, const Matrix& X) {
  validate(p);
  std::size_t l = 0;
  Matrix XT = tokens_of({X}, p.d_X, l);
  Forward f = forward_tokens(p, XT, l);
  std::array<Matrix, kHeads> out;
  for (std::size_t h = 0; h < kHeads; ++h) out[h] = f.ZT.block(0, h * p.d_hid, l, p.d_hid).transpose();
  return out;
}

Matrix attn_forward(const AttnParams& p, const Matrix& X) {
  validate(p);
  std::size_t l = 0;
  Matrix XT = tokens_of({X}, p.d_X, l);
  Forward f = forward_tokens(p, XT, l);
  Matrix Y = f.preT.transpose();
  for (std::size_t i = 0; i < Y.size(); ++i) Y.data()[i] = std::max(Y.data()[i], 0.0);
  return Y;
}

double attn_loss(const AttnParams& p, const std::vector<Matrix>& batch) {
  validate(p);
  std::size_t l = 0;
  Matrix XT = tokens_of(batch, p.d_X, l);
  Forward f = forward_tokens(p, XT, l);
  double s = 0.0;
  for (std::size_t i = 0; i < f.preT.size(); ++i) s += std::max(f.preT.data()[i], 0.0);
  return s / static_cast<double>(f.preT.rows());
}

GradientReport attn_backward(const AttnParams& p, const std::vector<Matrix>& batch) {
  validate(p);
  std::size_t l = 0;
  Matrix XT = tokens_of(batch, p.d_X, l);
  return backward_from(p, forward_tokens(p, XT, l));
}

GradientReport attn_backward(const AttnParams& p, const TokenBatch& batch) {
  validate(p);
  if (batch.d != p.d_X || batch.n == 0 || batch.l == 0) throw ContractError("attention batch shape mismatch");
  Matrix XT(batch.n * batch.l, batch.d, batch.values);
  return backward_from(p, forward_tokens(p, XT, batch.l));
}

}  // namespace ami
