#pragma once

#include <optional>
#include <vector>

#include "ami/core/rng.hpp"
#include "ami/data/stats.hpp"
#include "ami/nn/attention.hpp"

namespace ami {

inline constexpr int kCraftRetries = 8;

struct AttnAttackConfig {
  double beta = 10.0;
  // Unset means 2 * bar_delta from the measured data statistics.
  std::optional<double> gamma;
  std::size_t target_token_index = 0;
  // Multiply the key strength by sqrt(d_attn) so that beta is the softmax
  // inverse temperature after the 1/sqrt(d_attn) factor of the forward pass.
  bool compensate_scaling = true;
};

// The literal construction: key strength `beta` goes into W_K = beta (W_Q^+)^T.
// Retries the random draws up to kCraftRetries times on rank deficiency.
AttnParams craft_attn(const std::vector<double>& v, double beta, double gamma, Rng& rng);

double compute_bar_delta(double M, std::size_t l, double beta, double delta);
// 2 * bar_delta. Throws DomainError when delta <= 0.
double auto_gamma(const DataStats& stats, double beta, std::size_t l);

struct AttnCraft {
  AttnParams params;
  double gamma = 0.0;
  double key_strength = 0.0;
};

AttnCraft craft_attn_attack(const std::vector<double>& v, const AttnAttackConfig& cfg, const DataStats& stats,
                            std::size_t l, Rng& rng);

// 1 iff score (max |grad W_O|) > eta.
int attn_guess(const GradientReport& report);

}  // namespace ami
