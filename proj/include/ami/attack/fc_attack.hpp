#pragma once

#include <optional>
#include <vector>

#include "ami/data/token_batch.hpp"
#include "ami/nn/fc.hpp"

namespace ami {

enum class FcVariant { Full, Token };

struct FcAttackConfig {
  FcVariant variant = FcVariant::Full;
  std::size_t token_index = 0;
  // Unset means auto.
  std::optional<double> tau;
};

// W_1 = [I; -I], b_1 = [-T; T], W_2_row = -1, b_2_1 = tau.
FcParams craft_fc(const std::vector<double>& target, double tau);

// Half the minimum non-zero pairwise L1 distance between the rows of
// `vectors`. Throws DomainError when all rows coincide.
double auto_tau(ConstView vectors);

// Target vector for the variant: the flattened sequence or one token.
std::vector<double> flatten_target(const TokenBatch& batch, std::size_t seq, const FcAttackConfig& cfg);
// Rows the client forwards: n flattened sequences (Full) or all n * l tokens (Token).
ConstView flatten_batch(const TokenBatch& batch, FcVariant variant);

// 1 iff |grad b_2_1| > eta.
int fc_guess(const GradientReport& report);
double fc_score(const GradientReport& report);

}  // namespace ami
