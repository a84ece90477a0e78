#include "ami/attack/fc_attack.hpp"

#include <cmath>
#include <limits>

#include <omp.h>

#include "ami/core/error.hpp"

namespace ami {

FcParams craft_fc(const std::vector<double>& target, double tau) {
  if (!(tau > 0.0)) throw DomainError("craft_fc: tau must be positive");
  const std::size_t d = target.size();
  FcParams p;
  p.d_T = d;
  p.W_1.rows = 2 * d;
  p.W_1.cols = d;
  p.W_1.row_ptr.resize(2 * d + 1);
  p.W_1.col.resize(2 * d);
  p.W_1.val.resize(2 * d);
  p.b_1.resize(2 * d);
  for (std::size_t r = 0; r < 2 * d; ++r) {
    const std::size_t c = r % d;
    const bool upper = r < d;
    p.W_1.row_ptr[r + 1] = r + 1;
    p.W_1.col[r] = static_cast<std::uint32_t>(c);
    p.W_1.val[r] = upper ? 1.0 : -1.0;
    p.b_1[r] = upper ? -target[c] : target[c];
  }
  p.W_2_row.assign(2 * d, -1.0);
  p.b_2_1 = tau;
  return p;
}

double auto_tau(ConstView vectors) {
  double best = std::numeric_limits<double>::infinity();
  // O(rows^2 * cols); min is exact, so the reduction order does not matter.
#pragma omp parallel for reduction(min : best) schedule(dynamic, 16) if (!omp_in_parallel())
  for (std::size_t i = 0; i < vectors.rows; ++i) {
    const double* a = vectors.data + i * vectors.ld;
    for (std::size_t j = i + 1; j < vectors.rows; ++j) {
      const double* b = vectors.data + j * vectors.ld;
      double s = 0.0;
      for (std::size_t k = 0; k < vectors.cols; ++k) s += std::abs(a[k] - b[k]);
      if (s > 0.0) best = std::min(best, s);
    }
  }
  if (!std::isfinite(best)) throw DomainError("auto_tau: degenerate vocabulary, fewer than two distinct vectors");
  return 0.5 * best;
}

std::vector<double> flatten_target(const TokenBatch& batch, std::size_t seq, const FcAttackConfig& cfg) {
  if (seq >= batch.n) throw ContractError("flatten_target: sequence index out of range");
  if (cfg.variant == FcVariant::Full) return {batch.sequence(seq), batch.sequence(seq) + batch.seq_stride()};
  if (cfg.token_index >= batch.l) throw ConfigError("attack.token_index must be below l_X");
  const double* t = batch.token(seq, cfg.token_index);
  return {t, t + batch.d};
}

ConstView flatten_batch(const TokenBatch& batch, FcVariant variant) {
  // The batch is already stored [sequence][token][dim], so both views are
  // plain reshapes of the same buffer.
  if (variant == FcVariant::Full) return {batch.values.data(), batch.n, batch.seq_stride(), batch.seq_stride()};
  return {batch.values.data(), batch.n * batch.l, batch.d, batch.d};
}

double fc_score(const GradientReport& report) { return std::abs(report.at("b_2_1")(0, 0)); }

int fc_guess(const GradientReport& report) { return fc_score(report) > kEta ? 1 : 0; }

}  // namespace ami
