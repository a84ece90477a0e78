#pragma once

#include <vector>

#include "ami/linalg/gemm.hpp"
#include "ami/nn/gradient.hpp"

namespace ami {

// The two exploited FC layers, reduced to what feeds output unit 1:
// z_0 = ReLU(W_2_row . ReLU(W_1 x + b_1) + b_2_1). W_1 is kept compressed
// because the crafted layer is [I; -I] and d_T reaches l_X * d_X.
struct FcParams {
  std::size_t d_T = 0;
  Csr W_1;  // 2 d_T x d_T
  std::vector<double> b_1;
  std::vector<double> W_2_row;
  double b_2_1 = 0.0;
};

void validate(const FcParams& p);
FcParams fc_params_from_dense(const Matrix& W_1, std::vector<double> b_1, std::vector<double> W_2_row, double b_2_1);

double fc_forward(const FcParams& p, const double* x);
double fc_forward(const FcParams& p, const std::vector<double>& x);

// Surrogate loss (1/n) sum_x z_0(x) over the rows of `batch`.
double fc_loss(const FcParams& p, ConstView batch);

enum class GradScope {
  Monitored,  // b_2_1 only, what the adversary reads
  All,        // every parameter, for finite-difference checks
};

// ReLU'(0) = 0. Monitors b_2_1.
GradientReport fc_backward(const FcParams& p, ConstView batch, GradScope scope = GradScope::Monitored);

}  // namespace ami
