#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "ami/attack/attn_attack.hpp"
#include "ami/bounds/bounds.hpp"
#include "ami/core/error.hpp"

namespace ami {
namespace {

TEST(LowerBound, FormulaExamples) {
  EXPECT_EQ(eval_lower_bound(1.0, 0.0, 1, 10), 1.0);
  EXPECT_DOUBLE_EQ(eval_lower_bound(0.0, 0.3, 5, 10), -1.3);
  EXPECT_LE(eval_lower_bound(0.0, 0.3, 5, 10), 0.0);
  EXPECT_NEAR(eval_lower_bound(0.99, 0.01, 1, 10), 0.99 + std::pow(0.99, 20) - 0.01 - 1, 1e-15);
  EXPECT_NEAR(eval_lower_bound(0.99, 0.01, 1, 10), 0.7979, 5e-4);
  EXPECT_THROW(eval_lower_bound(1.1, 0.0, 1, 1), ContractError);
}

TEST(LowerBound, NeverExceedsOne) {
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    double p = rng.uniform(), b = rng.uniform();
    std::size_t n = 1 + rng.below(50), l = 1 + rng.below(30);
    double lb = eval_lower_bound(p, b, n, l);
    EXPECT_LE(lb, 1.0);
    EXPECT_LT(lb, 1.0);
  }
}

TEST(Condition, Examples) {
  Condition c = check_condition(1, 10, 10, 1);
  EXPECT_NEAR(1.0 / c.ratio, 0.02 + std::log(1800.0) / 10, 1e-12);
  EXPECT_NEAR(c.ratio, 1.30, 5e-3);
  EXPECT_TRUE(c.holds);

  double rhs = 2.0 / (3 * 7) + std::log(2.0 * 6 * 7 * 3 * 4) / 3;
  Condition edge = check_condition(rhs, 3, 7, 2);
  EXPECT_NEAR(edge.ratio, 1.0, 1e-15);

  // Huge beta sends the right side to zero.
  EXPECT_TRUE(check_condition(1e-3, 1e7, 10, 1).holds);
  EXPECT_FALSE(check_condition(0.1, 10, 10, 1).holds);

  // 2 (l - 1) l beta M^2 < 1 gives a negative right side.
  Condition tiny = check_condition(0.5, 0.01, 2, 1);
  EXPECT_TRUE(std::isinf(tiny.ratio));
  EXPECT_TRUE(tiny.holds);
}

TEST(BarDelta, StrictlyDecreasingInBetaAndDelta) {
  double prev = compute_bar_delta(1, 10, 0.5, 1);
  for (double beta = 1.0; beta < 40; beta += 0.5) {
    double cur = compute_bar_delta(1, 10, beta, 1);
    EXPECT_LT(cur, prev);
    prev = cur;
  }
  EXPECT_LT(compute_bar_delta(1, 10, 2, 1.5), compute_bar_delta(1, 10, 2, 1.4));
}

TEST(PProj, OneHotDistinctPairsAreOrthogonal) {
  BoundSamples s = BoundSamples::draw(Source::OneHot, 16, 5000, 3);
  EXPECT_EQ(s.p_proj(0.0), 1.0);
  EXPECT_EQ(s.p_proj(0.5), 1.0);
  EXPECT_DOUBLE_EQ(s.p_proj_iid(0.5), 1.0 - 1.0 / 16);
  EXPECT_EQ(s.p_proj_iid(1.0), 1.0);
}

TEST(PProj, DeltaAtLeastMIsCertain) {
  for (Source src : {Source::OneHot, Source::Spherical}) {
    BoundSamples s = BoundSamples::draw(src, 32, 4000, 4);
    EXPECT_EQ(s.p_proj(1.0), 1.0);
  }
}

TEST(PProj, SphericalMatchesOversampledEstimate) {
  Rng a(5), b(6);
  const std::size_t N = 20000;
  double est = estimate_p_proj(Source::Spherical, 256, 0.2, N, a);
  double ref = estimate_p_proj(Source::Spherical, 256, 0.2, 10 * N, b);
  double sigma = std::sqrt(ref * (1 - ref) / N);
  EXPECT_NEAR(est, ref, 3 * sigma + 1e-12);
  // |x.v| for a uniform unit vector is close to |N(0, 1/d)|.
  EXPECT_NEAR(ref, std::erf(0.2 * 16 / std::sqrt(2.0)), 0.01);
}

TEST(PProj, MonotoneInDeltaOnSharedSamples) {
  BoundSamples s = BoundSamples::draw(Source::Gaussian, 24, 20000, 7);
  double prev = 0.0;
  for (double delta = 0.0; delta < 4.0; delta += 0.05) {
    double p = s.p_proj(delta);
    EXPECT_GE(p, prev);
    prev = p;
  }
  // Larger beta shrinks the argument 1 / (beta l M).
  double last = 1.0;
  for (double beta : {0.1, 0.2, 0.5, 1.0, 3.0}) {
    double p = s.p_proj(1.0 / (beta * 10 * std::sqrt(24.0)));
    EXPECT_LE(p, last);
    last = p;
  }
}

TEST(PBox, ClosedFormAndLimits) {
  Rng rng(8);
  const std::size_t N = 50000;
  double p = estimate_p_box(Source::Gaussian, 8, 3.0, N, rng);
  double want = std::pow(std::erf(3.0 / std::sqrt(2.0)), 8);
  EXPECT_NEAR(want, 0.9786, 1e-4);
  EXPECT_NEAR(p, want, 3 * std::sqrt(want * (1 - want) / N));

  BoundSamples oh = BoundSamples::draw(Source::OneHot, 64, 2000, 9);
  EXPECT_EQ(oh.p_box(1.0 - 1.0 / 64 - 1e-9), 0.0);
  EXPECT_EQ(oh.p_box(std::numeric_limits<double>::infinity()), 1.0);
  BoundSamples sp = BoundSamples::draw(Source::Spherical, 64, 2000, 9);
  EXPECT_EQ(sp.p_box(1e9), 1.0);
}

TEST(BoundSamples, IndependentOfThreadCount) {
  BoundSamples a = BoundSamples::draw(Source::Spherical, 48, 3 * kBoundChunk + 17, 10, true);
  BoundSamples b = BoundSamples::draw(Source::Spherical, 48, 3 * kBoundChunk + 17, 10, false);
  EXPECT_EQ(a.projections(), b.projections());
  EXPECT_EQ(a.box_distances(), b.box_distances());
}

TEST(BoundSamples, RejectsUnsupportedSources) {
  EXPECT_THROW(BoundSamples::draw(Source::EmbedFile, 8, 10, 1), ConfigError);
  EXPECT_THROW(BoundSamples::draw(Source::Gaussian, 8, 0, 1), ConfigError);
}

TEST(BetaRule, PerSourceDefaults) {
  BetaRule r;
  EXPECT_EQ(r.value(Source::OneHot, 64), 10.0);
  EXPECT_EQ(r.value(Source::Spherical, 64), 10.0);
  EXPECT_EQ(r.value(Source::Gaussian, 64), 10.0 / 64);
  r.fixed = 3.0;
  EXPECT_EQ(r.value(Source::Gaussian, 64), 3.0);
}

TEST(Sweep, OneHotBoundIsOne) {
  BoundGridConfig cfg;
  cfg.sources = {Source::OneHot};
  cfg.l_list = {5, 10, 15};
  cfg.d_list = {16, 64, 256};
  cfg.samples = 5000;
  for (const BoundEstimate& e : sweep_bounds(cfg)) {
    EXPECT_EQ(e.lower_bound, 1.0) << e.d << " " << e.l;
    EXPECT_TRUE(e.condition_holds);
  }
}

TEST(Sweep, GaussianRowsCarryBetaRuleAndOrder) {
  BoundGridConfig cfg;
  cfg.sources = {Source::Gaussian};
  cfg.l_list = {5, 10};
  cfg.d_list = {16, 32};
  cfg.samples = 2000;
  auto rows = sweep_bounds(cfg);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].d, 16u);
  EXPECT_EQ(rows[1].l, 10u);
  EXPECT_EQ(rows[2].beta, 10.0 / 32);
  for (const auto& e : rows) EXPECT_EQ(e.samples, 2000u);
  cfg.d_list.clear();
  EXPECT_THROW(sweep_bounds(cfg), ConfigError);
}

}  // namespace
}  // namespace ami
