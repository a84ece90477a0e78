#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ami/core/rng.hpp"
#include "ami/data/token_batch.hpp"

namespace ami {

enum class Mechanism { None, GRR, RAPPOR, THE, DBitFlipPM };

std::string to_string(Mechanism m);
Mechanism mechanism_from_string(const std::string& s);

struct DpConfig {
  Mechanism mechanism = Mechanism::None;
  double epsilon = 0.0;
  std::size_t k = 0;
  double the_theta = 0.67;
  // 0 selects min(k, 8).
  std::size_t dbit_d = 0;
  // Per-token budget epsilon / l_X instead of the full epsilon.
  bool split_budget = false;
  // Self-test hook: shifts the keep/truth probability actually used while
  // the statistical checks still expect the nominal one.
  double corrupt_p = 0.0;

  std::size_t effective_dbit_d() const { return dbit_d == 0 ? std::min<std::size_t>(k, 8) : dbit_d; }
};

// Throws ConfigError on an invalid combination.
void validate(const DpConfig& cfg);

// Nominal probabilities.
double grr_keep_probability(double epsilon, std::size_t k);
double bit_truth_probability(double epsilon);  // RAPPOR and dBitFlipPM: e^(e/2) / (e^(e/2) + 1)
double the_noise_scale(double epsilon);
double laplace_cdf(double x, double scale);
// P(1 + Lap > theta) and P(Lap > theta).
double the_true_exceed_probability(double epsilon, double theta);
double the_false_exceed_probability(double epsilon, double theta);
// Exact probability that perturb(index) returns index.
double identity_probability(const DpConfig& cfg);

std::uint32_t perturb_grr(std::uint32_t index, const DpConfig& cfg, Rng& rng);
std::uint32_t perturb_rappor(std::uint32_t index, const DpConfig& cfg, Rng& rng);
std::uint32_t perturb_the(std::uint32_t index, const DpConfig& cfg, Rng& rng);
std::uint32_t perturb_dbitflip(std::uint32_t index, const DpConfig& cfg, Rng& rng);
std::uint32_t perturb(std::uint32_t index, const DpConfig& cfg, Rng& rng);

// Client-side reports before decoding, exposed for the statistical checks.
std::vector<std::uint8_t> rappor_encode(std::uint32_t index, const DpConfig& cfg, Rng& rng);
std::vector<std::uint32_t> the_encode(std::uint32_t index, const DpConfig& cfg, Rng& rng);
struct DBitReport {
  std::vector<std::uint32_t> buckets;
  std::vector<std::uint8_t> bits;
};
DBitReport dbitflip_encode(std::uint32_t index, const DpConfig& cfg, Rng& rng);
// Uniform element of `candidates`, or uniform over [0, k) when it is empty.
std::uint32_t decode_candidates(const std::vector<std::uint32_t>& candidates, std::size_t k, Rng& rng);

// Perturbs every id of the batch independently and re-embeds.
TokenBatch perturb_batch(const TokenBatch& batch, const Vocabulary& vocab, const DpConfig& cfg, Rng& rng);

struct StatCheck {
  std::string name;
  double observed = 0.0;
  double expected = 0.0;
  double sigma = 0.0;
  std::size_t samples = 0;
  bool pass = false;
};

// Binomial 3-sigma checks of the configured mechanism at the configured
// epsilon, plus the rate at which the decoded index differs from the input.
std::vector<StatCheck> self_test(const DpConfig& cfg, std::size_t trials, std::uint64_t seed);

}  // namespace ami
