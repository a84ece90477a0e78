#include "ami/ldp/mechanisms.hpp"

#include <algorithm>
#include <cmath>

#include "ami/core/error.hpp"

namespace ami {
namespace {

void check_index(std::uint32_t index, const DpConfig& cfg) {
  if (index >= cfg.k) throw DomainError("index " + std::to_string(index) + " outside domain of size " + std::to_string(cfg.k));
}

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

double used_truth(const DpConfig& cfg) { return clamp01(bit_truth_probability(cfg.epsilon) + cfg.corrupt_p); }

StatCheck binomial_check(std::string name, std::size_t hits, std::size_t n, double p) {
  StatCheck c;
  c.name = std::move(name);
  c.samples = n;
  c.observed = static_cast<double>(hits) / static_cast<double>(n);
  c.expected = p;
  c.sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  c.pass = std::abs(c.observed - c.expected) <= 3.0 * c.sigma + 1e-15;
  return c;
}

}  // namespace

std::string to_string(Mechanism m) {
  switch (m) {
    case Mechanism::None: return "none";
    case Mechanism::GRR: return "grr";
    case Mechanism::RAPPOR: return "rappor";
    case Mechanism::THE: return "the";
    case Mechanism::DBitFlipPM: return "dbitflip";
  }
  return "unknown";
}

Mechanism mechanism_from_string(const std::string& s) {
  for (Mechanism m : {Mechanism::None, Mechanism::GRR, Mechanism::RAPPOR, Mechanism::THE, Mechanism::DBitFlipPM})
    if (to_string(m) == s) return m;
  throw ConfigError("unknown dp.mechanism '" + s + "' (expected none, grr, rappor, the or dbitflip)");
}

void validate(const DpConfig& cfg) {
  if (cfg.mechanism == Mechanism::None) return;
  if (!(cfg.epsilon > 0.0) || !std::isfinite(cfg.epsilon)) throw ConfigError("dp.epsilon must be positive and finite");
  if (cfg.k < 2) throw ConfigError("dp.k must be at least 2");
  if (!(cfg.the_theta > 0.0 && cfg.the_theta < 1.0)) throw ConfigError("dp.the_theta must lie in (0, 1)");
  const std::size_t d = cfg.effective_dbit_d();
  if (d < 1 || d > cfg.k) throw ConfigError("dp.dbit_d must lie in [1, k]");
}

double grr_keep_probability(double epsilon, std::size_t k) {
  // e^e / (e^e + k - 1), written to stay finite for large epsilon.
  return 1.0 / (1.0 + static_cast<double>(k - 1) * std::exp(-epsilon));
}

double bit_truth_probability(double epsilon) { return 1.0 / (1.0 + std::exp(-epsilon / 2.0)); }

double the_noise_scale(double epsilon) { return 2.0 / epsilon; }

double laplace_cdf(double x, double scale) {
  return x < 0 ? 0.5 * std::exp(x / scale) : 1.0 - 0.5 * std::exp(-x / scale);
}

double the_true_exceed_probability(double epsilon, double theta) {
  return 1.0 - laplace_cdf(theta - 1.0, the_noise_scale(epsilon));
}

double the_false_exceed_probability(double epsilon, double theta) {
  return 1.0 - laplace_cdf(theta, the_noise_scale(epsilon));
}

double identity_probability(const DpConfig& cfg) {
  const double k = static_cast<double>(cfg.k);
  // A true report a, each of m other candidates reported with probability b,
  // uniform pick among reports, uniform fallback when nothing is reported.
  auto set_decode = [k](double a, double b, double m) {
    double e_inv = b > 0.0 ? (1.0 - std::pow(1.0 - b, m + 1.0)) / ((m + 1.0) * b) : 1.0;
    return a * e_inv + (1.0 - a) * std::pow(1.0 - b, m) / k;
  };
  switch (cfg.mechanism) {
    case Mechanism::None: return 1.0;
    case Mechanism::GRR: return grr_keep_probability(cfg.epsilon, cfg.k);
    case Mechanism::RAPPOR: {
      double q = bit_truth_probability(cfg.epsilon);
      return set_decode(q, 1.0 - q, k - 1.0);
    }
    case Mechanism::THE:
      return set_decode(the_true_exceed_probability(cfg.epsilon, cfg.the_theta),
                        the_false_exceed_probability(cfg.epsilon, cfg.the_theta), k - 1.0);
    case Mechanism::DBitFlipPM: {
      double q = bit_truth_probability(cfg.epsilon);
      return set_decode(q, 1.0 - q, static_cast<double>(cfg.effective_dbit_d()) - 1.0);
    }
  }
  return 0.0;
}

std::uint32_t decode_candidates(const std::vector<std::uint32_t>& candidates, std::size_t k, Rng& rng) {
  if (candidates.empty()) return static_cast<std::uint32_t>(rng.below(k));
  return candidates[rng.below(candidates.size())];
}

std::uint32_t perturb_grr(std::uint32_t index, const DpConfig& cfg, Rng& rng) {
  check_index(index, cfg);
  const double p = clamp01(grr_keep_probability(cfg.epsilon, cfg.k) + cfg.corrupt_p);
  // Both draws are always consumed so runs at different epsilon stay
  // aligned on the same random stream.
  const double u = rng.uniform();
  auto other = static_cast<std::uint32_t>(rng.below(cfg.k - 1));
  if (other >= index) ++other;
  return u < p ? index : other;
}

std::vector<std::uint8_t> rappor_encode(std::uint32_t index, const DpConfig& cfg, Rng& rng) {
  check_index(index, cfg);
  const double q = used_truth(cfg);
  std::vector<std::uint8_t> bits(cfg.k);
  for (std::size_t i = 0; i < cfg.k; ++i) {
    const bool truth = i == index;
    bits[i] = rng.uniform() < q ? truth : !truth;
  }
  return bits;
}

std::uint32_t perturb_rappor(std::uint32_t index, const DpConfig& cfg, Rng& rng) {
  std::vector<std::uint8_t> bits = rappor_encode(index, cfg, rng);
  std::vector<std::uint32_t> set;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) set.push_back(static_cast<std::uint32_t>(i));
  return decode_candidates(set, cfg.k, rng);
}

std::vector<std::uint32_t> the_encode(std::uint32_t index, const DpConfig& cfg, Rng& rng) {
  check_index(index, cfg);
  const double scale = the_noise_scale(cfg.epsilon);
  // The self-test hook shifts the true bucket before noise is added.
  std::vector<std::uint32_t> set;
  for (std::size_t i = 0; i < cfg.k; ++i) {
    const double noisy = (i == index ? 1.0 + cfg.corrupt_p : 0.0) + rng.laplace(scale);
    if (noisy > cfg.the_theta) set.push_back(static_cast<std::uint32_t>(i));
  }
  return set;
}

std::uint32_t perturb_the(std::uint32_t index, const DpConfig& cfg, Rng& rng) {
  return decode_candidates(the_encode(index, cfg, rng), cfg.k, rng);
}

DBitReport dbitflip_encode(std::uint32_t index, const DpConfig& cfg, Rng& rng) {
  check_index(index, cfg);
  const std::size_t d = cfg.effective_dbit_d();
  const double q = used_truth(cfg);
  DBitReport r;
  r.buckets.push_back(index);
  while (r.buckets.size() < d) {
    auto b = static_cast<std::uint32_t>(rng.below(cfg.k));
    if (std::find(r.buckets.begin(), r.buckets.end(), b) == r.buckets.end()) r.buckets.push_back(b);
  }
  std::sort(r.buckets.begin(), r.buckets.end());
  for (std::uint32_t b : r.buckets) {
    const bool truth = b == index;
    r.bits.push_back(rng.uniform() < q ? truth : !truth);
  }
  return r;
}

std::uint32_t perturb_dbitflip(std::uint32_t index, const DpConfig& cfg, Rng& rng) {
  DBitReport r = dbitflip_encode(index, cfg, rng);
  std::vector<std::uint32_t> set;
  for (std::size_t i = 0; i < r.buckets.size(); ++i)
    if (r.bits[i]) set.push_back(r.buckets[i]);
  return decode_candidates(set, cfg.k, rng);
}

std::uint32_t perturb(std::uint32_t index, const DpConfig& cfg, Rng& rng) {
  switch (cfg.mechanism) {
    case Mechanism::None: check_index(index, cfg); return index;
    case Mechanism::GRR: return perturb_grr(index, cfg, rng);
    case Mechanism::RAPPOR: return perturb_rappor(index, cfg, rng);
    case Mechanism::THE: return perturb_the(index, cfg, rng);
    case Mechanism::DBitFlipPM: return perturb_dbitflip(index, cfg, rng);
  }
  return index;
}

TokenBatch perturb_batch(const TokenBatch& batch, const Vocabulary& vocab, const DpConfig& cfg, Rng& rng) {
  if (!batch.has_ids()) throw ConfigError("local DP needs token ids; use a vocabulary-backed data source");
  if (cfg.mechanism == Mechanism::None) return batch;
  DpConfig per_token = cfg;
  per_token.k = vocab.k;
  if (cfg.split_budget) per_token.epsilon = cfg.epsilon / static_cast<double>(batch.l);
  std::vector<std::uint32_t> ids(batch.ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = perturb(batch.ids[i], per_token, rng);
  return embed_ids(vocab, ids, batch.n, batch.l, batch.source);
}

std::vector<StatCheck> self_test(const DpConfig& cfg, std::size_t trials, std::uint64_t seed) {
  validate(cfg);
  std::vector<StatCheck> out;
  if (cfg.mechanism == Mechanism::None) return out;
  Rng rng(seed);
  const std::size_t k = cfg.k;
  std::size_t changed = 0;
  switch (cfg.mechanism) {
    case Mechanism::GRR: {
      std::size_t kept = 0;
      for (std::size_t t = 0; t < trials; ++t) {
        auto x = static_cast<std::uint32_t>(t % k);
        kept += perturb_grr(x, cfg, rng) == x;
      }
      changed = trials - kept;
      out.push_back(binomial_check("grr keep rate", kept, trials, grr_keep_probability(cfg.epsilon, k)));
      break;
    }
    case Mechanism::RAPPOR: {
      std::size_t true_kept = 0, false_set = 0;
      for (std::size_t t = 0; t < trials; ++t) {
        auto x = static_cast<std::uint32_t>(t % k);
        std::vector<std::uint8_t> bits = rappor_encode(x, cfg, rng);
        true_kept += bits[x];
        std::vector<std::uint32_t> set;
        for (std::size_t i = 0; i < k; ++i) {
          if (bits[i]) set.push_back(static_cast<std::uint32_t>(i));
          if (i != x) false_set += bits[i];
        }
        changed += decode_candidates(set, k, rng) != x;
      }
      const double q = bit_truth_probability(cfg.epsilon);
      out.push_back(binomial_check("rappor true-bit keep rate", true_kept, trials, q));
      out.push_back(binomial_check("rappor other-bit flip rate", false_set, trials * (k - 1), 1.0 - q));
      break;
    }
    case Mechanism::THE: {
      std::size_t true_in = 0, false_in = 0;
      for (std::size_t t = 0; t < trials; ++t) {
        auto x = static_cast<std::uint32_t>(t % k);
        std::vector<std::uint32_t> set = the_encode(x, cfg, rng);
        const bool hit = std::binary_search(set.begin(), set.end(), x);
        true_in += hit;
        false_in += set.size() - hit;
        changed += decode_candidates(set, k, rng) != x;
      }
      out.push_back(binomial_check("the true-bucket exceed rate", true_in, trials,
                                   the_true_exceed_probability(cfg.epsilon, cfg.the_theta)));
      out.push_back(binomial_check("the other-bucket exceed rate", false_in, trials * (k - 1),
                                   the_false_exceed_probability(cfg.epsilon, cfg.the_theta)));
      break;
    }
    case Mechanism::DBitFlipPM: {
      std::size_t truthful = 0, bits = 0, true_sampled = 0;
      for (std::size_t t = 0; t < trials; ++t) {
        auto x = static_cast<std::uint32_t>(t % k);
        DBitReport r = dbitflip_encode(x, cfg, rng);
        std::vector<std::uint32_t> set;
        for (std::size_t i = 0; i < r.buckets.size(); ++i) {
          const bool truth = r.buckets[i] == x;
          true_sampled += truth;
          truthful += r.bits[i] == truth;
          ++bits;
          if (r.bits[i]) set.push_back(r.buckets[i]);
        }
        changed += decode_candidates(set, k, rng) != x;
      }
      out.push_back(binomial_check("dbitflip truthful-bit rate", truthful, bits, bit_truth_probability(cfg.epsilon)));
      out.push_back(binomial_check("dbitflip true bucket sampled", true_sampled, trials, 1.0));
      break;
    }
    default:
      break;
  }
  out.push_back(binomial_check(to_string(cfg.mechanism) + " changed-index rate", changed, trials,
                               1.0 - identity_probability(cfg)));
  return out;
}

}  // namespace ami
