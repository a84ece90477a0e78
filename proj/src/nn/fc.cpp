#include "ami/nn/fc.hpp"

#include <algorithm>

#include "ami/core/error.hpp"

namespace ami {
namespace {

// Hidden pre-activations W_1 x + b_1.
void hidden_pre(const FcParams& p, const double* x, std::vector<double>& pre) {
  pre.assign(2 * p.d_T, 0.0);
  for (std::size_t r = 0; r < pre.size(); ++r) {
    double s = p.b_1[r];
    for (std::size_t e = p.W_1.row_ptr[r]; e < p.W_1.row_ptr[r + 1]; ++e) s += p.W_1.val[e] * x[p.W_1.col[e]];
    pre[r] = s;
  }
}

double output_pre(const FcParams& p, const std::vector<double>& pre) {
  double a = p.b_2_1;
  for (std::size_t r = 0; r < pre.size(); ++r)
    if (pre[r] > 0.0) a += p.W_2_row[r] * pre[r];
  return a;
}

}  // namespace

void validate(const FcParams& p) {
  if (p.W_1.rows != 2 * p.d_T || p.W_1.cols != p.d_T || p.b_1.size() != 2 * p.d_T || p.W_2_row.size() != 2 * p.d_T)
    throw ContractError("FcParams: shapes inconsistent with d_T");
}

FcParams fc_params_from_dense(const Matrix& W_1, std::vector<double> b_1, std::vector<double> W_2_row, double b_2_1) {
  FcParams p;
  p.d_T = W_1.cols();
  p.W_1 = to_csr(W_1.view());
  p.b_1 = std::move(b_1);
  p.W_2_row = std::move(W_2_row);
  p.b_2_1 = b_2_1;
  validate(p);
  return p;
}

double fc_forward(const FcParams& p, const double* x) {
  std::vector<double> pre;
  hidden_pre(p, x, pre);
  return std::max(output_pre(p, pre), 0.0);
}

double fc_forward(const FcParams& p, const std::vector<double>& x) {
  if (x.size() != p.d_T) throw ContractError("fc_forward: input length differs from d_T");
  return fc_forward(p, x.data());
}

double fc_loss(const FcParams& p, ConstView batch) {
  if (batch.cols != p.d_T) throw ContractError("fc_loss: batch width differs from d_T");
  double s = 0.0;
  for (std::size_t i = 0; i < batch.rows; ++i) s += fc_forward(p, batch.data + i * batch.ld);
  return s / static_cast<double>(batch.rows);
}

GradientReport fc_backward(const FcParams& p, ConstView batch, GradScope scope) {
  validate(p);
  if (batch.cols != p.d_T || batch.rows == 0) throw ContractError("fc_backward: batch must be n x d_T with n >= 1");
  const double inv_n = 1.0 / static_cast<double>(batch.rows);
  const std::size_t h = 2 * p.d_T;
  double g_b2 = 0.0;
  Matrix g_w2, g_b1, g_w1;
  if (scope == GradScope::All) {
    g_w2 = Matrix(1, h);
    g_b1 = Matrix(1, h);
    g_w1 = Matrix(h, p.d_T);
  }
  std::vector<double> pre;
  for (std::size_t i = 0; i < batch.rows; ++i) {
    const double* x = batch.data + i * batch.ld;
    hidden_pre(p, x, pre);
    if (!(output_pre(p, pre) > 0.0)) continue;
    g_b2 += inv_n;
    if (scope != GradScope::All) continue;
    for (std::size_t r = 0; r < h; ++r) {
      if (!(pre[r] > 0.0)) continue;
      g_w2(0, r) += inv_n * pre[r];
      const double gb = inv_n * p.W_2_row[r];
      g_b1(0, r) += gb;
      double* row = g_w1.row(r);
      for (std::size_t c = 0; c < p.d_T; ++c) row[c] += gb * x[c];
    }
  }
  GradientReport rep;
  rep.grads.emplace("b_2_1", Matrix(1, 1, g_b2));
  rep.monitored = {"b_2_1"};
  if (scope == GradScope::All) {
    rep.grads.emplace("W_2_row", std::move(g_w2));
    rep.grads.emplace("b_1", std::move(g_b1));
    rep.grads.emplace("W_1", std::move(g_w1));
  }
  rep.rescore();
  return rep;
}

}  // namespace ami
