#pragma once

#include <array>
#include <memory>
#include <vector>

#include "ami/data/token_batch.hpp"
#include "ami/nn/gradient.hpp"

namespace ami {

// Immutable matrices may be shared between heads; a head that reuses
// another head's three matrices is evaluated once.
struct AttnHead {
  std::shared_ptr<const Matrix> W_Q;  // d_attn x d_X
  std::shared_ptr<const Matrix> W_K;  // d_attn x d_X
  std::shared_ptr<const Matrix> W_V;  // d_hid x d_X
};

inline constexpr std::size_t kHeads = 4;

struct AttnParams {
  std::size_t d_X = 0;
  std::size_t d_attn = 0;
  std::size_t d_hid = 0;
  std::size_t d_Y = 0;
  std::array<AttnHead, kHeads> heads;
  Matrix W_O;  // d_Y x (4 d_hid); block h occupies columns [h d_hid, (h+1) d_hid)
  std::vector<double> b_O;
};

void validate(const AttnParams& p);

// Y = ReLU(sum_h W_O^h Z^h + b_O 1^T) with
// Z^h = W_V^h X softmax(X^T W_K^hT W_Q^h X / sqrt(d_attn)). X is d_X x l_X.
Matrix attn_forward(const AttnParams& p, const Matrix& X);
// Z^h for each head, d_hid x l_X.
std::array<Matrix, kHeads> attn_head_outputs(const AttnParams& p, const Matrix& X);

// Surrogate loss: sum of all Y entries over the batch divided by n * l_X.
double attn_loss(const AttnParams& p, const std::vector<Matrix>& batch);

// Gradient of the surrogate loss w.r.t. every W_O entry; score = max |grad|.
GradientReport attn_backward(const AttnParams& p, const std::vector<Matrix>& batch);
GradientReport attn_backward(const AttnParams& p, const TokenBatch& batch);

}  // namespace ami
