#include "ami/attack/attn_attack.hpp"

#include <cmath>

#include "ami/core/error.hpp"
#include "ami/linalg/pinv.hpp"
#include "ami/linalg/qr.hpp"

namespace ami {
namespace {

Matrix gaussian_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

std::shared_ptr<const Matrix> memorizing_key(const Matrix& W_Q, double beta) {
  Matrix k = pseudo_inverse(W_Q).transpose();
  for (std::size_t i = 0; i < k.size(); ++i) k.data()[i] *= beta;
  return std::make_shared<const Matrix>(std::move(k));
}

}  // namespace

AttnParams craft_attn(const std::vector<double>& v, double beta, double gamma, Rng& rng) {
  const std::size_t d = v.size();
  if (d < 2) throw ConfigError("craft_attn: d_X must be at least 2");
  if (!(beta > 0.0) || !(gamma > 0.0)) throw DomainError("craft_attn: beta and gamma must be positive");

  std::shared_ptr<const Matrix> W_Q1;
  for (int attempt = 0; !W_Q1; ++attempt) {
    Matrix W = gaussian_matrix(d, d, rng);
    for (std::size_t i = 0; i < d; ++i) W(i, 0) = v[i];
    try {
      QrResult qr = qr_orthonormal(W);
      // Columns 2..d of Q span the complement of v.
      W_Q1 = std::make_shared<const Matrix>(qr.Q.block(0, 1, d, d - 1).transpose());
    } catch (const NumericError&) {
      if (attempt + 1 >= kCraftRetries) throw NumericError("craft_attn: rank deficient after retries");
    }
  }

  AttnParams p;
  p.d_X = d;
  p.d_attn = d - 1;
  p.d_hid = d;
  p.d_Y = 2 * d;
  auto W_K1 = memorizing_key(*W_Q1, beta);
  auto W_Q2 = std::make_shared<const Matrix>(gaussian_matrix(d - 1, d, rng));
  auto W_K2 = memorizing_key(*W_Q2, beta);
  auto W_V = std::make_shared<const Matrix>(Matrix::identity(d));
  p.heads[0] = {W_Q1, W_K1, W_V};
  p.heads[1] = {W_Q2, W_K2, W_V};
  p.heads[2] = p.heads[0];
  p.heads[3] = p.heads[1];

  // [[I, -I, 0, 0], [0, 0, -I, I]]
  p.W_O = Matrix(2 * d, 4 * d);
  for (std::size_t i = 0; i < d; ++i) {
    p.W_O(i, i) = 1.0;
    p.W_O(i, d + i) = -1.0;
    p.W_O(d + i, 2 * d + i) = -1.0;
    p.W_O(d + i, 3 * d + i) = 1.0;
  }
  p.b_O.assign(2 * d, -gamma);
  return p;
}

double compute_bar_delta(double M, std::size_t l, double beta, double delta) {
  const double ld = static_cast<double>(l);
  return 2.0 * M * (ld - 1.0) * std::exp(2.0 / ld - beta * delta);
}

double auto_gamma(const DataStats& stats, double beta, std::size_t l) {
  if (!(stats.delta > 0.0)) throw DomainError("auto_gamma: data is not separated (delta <= 0); the attack guarantee is void");
  if (!std::isfinite(stats.delta)) throw ConfigError("auto_gamma: separation undefined for single-token sequences");
  return 2.0 * compute_bar_delta(stats.M, l, beta, stats.delta);
}

AttnCraft craft_attn_attack(const std::vector<double>& v, const AttnAttackConfig& cfg, const DataStats& stats,
                            std::size_t l, Rng& rng) {
  AttnCraft out;
  out.gamma = cfg.gamma ? *cfg.gamma : auto_gamma(stats, cfg.beta, l);
  out.key_strength = cfg.beta;
  if (cfg.compensate_scaling) out.key_strength *= std::sqrt(static_cast<double>(v.size() - 1));
  out.params = craft_attn(v, out.key_strength, out.gamma, rng);
  return out;
}

int attn_guess(const GradientReport& report) {
  (void)report.at("W_O");
  return report.score > kEta ? 1 : 0;
}

}  // namespace ami
