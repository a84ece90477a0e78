#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ami/core/rng.hpp"
#include "ami/data/token_batch.hpp"

namespace ami {

inline constexpr std::size_t kDefaultBoundSamples = 100000;
inline constexpr std::size_t kBoundChunk = 4096;

// Monte Carlo draws for one (source, d_X). Each sample i is a pair (x_i, v_i)
// of independent tokens; we keep the projection |x.v|/|v| and the box
// distance max_j |x_j - mu_j| of x. Every threshold query is a count over
// the same draws, so estimates are monotone in their argument.
class BoundSamples {
 public:
  // Chunk c of the draws uses derive_seed(seed, c, Stream::Bounds); the
  // result does not depend on the thread count.
  static BoundSamples draw(Source source, std::size_t d, std::size_t samples, std::uint64_t seed,
                           bool parallel = true);

  Source source() const { return source_; }
  std::size_t d() const { return d_; }
  std::size_t size() const { return proj_.size(); }
  double p_proj(double delta) const;
  double p_box(double half_width) const;
  // Unconditioned one-hot value; equal to p_proj for the other sources.
  double p_proj_iid(double delta) const;

  const std::vector<double>& projections() const { return proj_; }
  const std::vector<double>& box_distances() const { return box_; }

 private:
  Source source_ = Source::OneHot;
  std::size_t d_ = 0;
  std::vector<double> proj_;  // sorted
  std::vector<double> box_;   // sorted
};

double estimate_p_proj(Source source, std::size_t d, double delta, std::size_t samples, Rng& rng);
double estimate_p_box(Source source, std::size_t d, double half_width, std::size_t samples, Rng& rng);

double eval_lower_bound(double p_proj, double p_box, std::size_t n, std::size_t l);

struct Condition {
  double ratio = 0.0;
  bool holds = false;
};
Condition check_condition(double delta, double beta, std::size_t l, double M);

// Expected separation and norm used when evaluating the bound for a
// synthetic source: one-hot (1, 1), spherical (1, 1), Gaussian (d, sqrt d).
struct TypicalStats {
  double delta = 0.0;
  double M = 0.0;
};
TypicalStats typical_stats(Source source, std::size_t d);

struct BetaRule {
  // Unset selects the per-source defaults: 10 for one-hot and spherical,
  // 10 / d_X for Gaussian.
  std::optional<double> fixed;
  double value(Source source, std::size_t d) const;
};

struct BoundEstimate {
  Source source = Source::OneHot;
  std::size_t d = 0;
  std::size_t l = 0;
  std::size_t n = 1;
  double beta = 0.0;
  double delta = 0.0;
  double M = 0.0;
  double p_proj = 0.0;
  double p_proj_iid = 0.0;
  double p_box = 0.0;
  double bar_delta = 0.0;
  double lower_bound = 0.0;
  double condition_ratio = 0.0;
  bool condition_holds = false;
  std::size_t samples = 0;
  double p_proj_sigma3 = 0.0;
  double p_box_sigma3 = 0.0;
};

BoundEstimate evaluate_bound(const BoundSamples& s, std::size_t l, std::size_t n, double beta);

struct BoundGridConfig {
  std::vector<Source> sources;
  std::vector<std::size_t> l_list;
  std::vector<std::size_t> d_list;
  BetaRule beta;
  std::size_t samples = kDefaultBoundSamples;
  std::size_t n = 1;
  std::uint64_t seed = 0;
};

// Rows ordered by (source, d, l) in list order.
std::vector<BoundEstimate> sweep_bounds(const BoundGridConfig& cfg);

}  // namespace ami
