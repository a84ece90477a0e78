#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "ami/core/error.hpp"
#include "ami/game/game.hpp"

namespace ami {
namespace {

GameOutcome outcome(int b, int guess, double score) {
  GameOutcome o;
  o.b = b;
  o.b_prime = guess;
  o.score = score;
  return o;
}

TEST(Auc, Examples) {
  EXPECT_EQ(auc_rank({0.9, 0.8}, {0.1}), 1.0);
  EXPECT_EQ(auc_rank({0.5}, {0.5}), 0.5);
  EXPECT_EQ(auc_bruteforce({2, 3}, {1}), 1.0);
  EXPECT_EQ(auc_bruteforce({1}, {2}), 0.0);
  EXPECT_TRUE(std::isnan(auc_rank({}, {1.0})));
  EXPECT_THROW(auc_bruteforce({}, {1.0}), ContractError);
}

TEST(Auc, RankMatchesBruteForceWithTies) {
  Rng rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> pos, neg;
    for (int i = 0; i < 200; ++i) {
      // Coarse grid so that ties are common.
      double s = std::floor(rng.uniform() * 20) / 20;
      (rng.coin() ? pos : neg).push_back(s + (rng.coin() ? 0.1 : 0.0));
    }
    if (pos.empty() || neg.empty()) continue;
    EXPECT_NEAR(auc_rank(pos, neg), auc_bruteforce(pos, neg), 1e-12);
  }
}

TEST(Auc, InvariantUnderIncreasingTransform) {
  Rng rng(12);
  std::vector<double> pos(60), neg(70);
  for (double& x : pos) x = rng.normal() + 0.5;
  for (double& x : neg) x = rng.normal();
  auto f = [](std::vector<double> v) {
    for (double& x : v) x = std::exp(3 * x) + 7;
    return v;
  };
  EXPECT_EQ(auc_rank(pos, neg), auc_rank(f(pos), f(neg)));
}

TEST(Metrics, PerfectGuesser) {
  std::vector<GameOutcome> o = {outcome(1, 1, 0.5), outcome(0, 0, 0.0), outcome(1, 1, 0.2)};
  Metrics m = compute_metrics(o);
  EXPECT_EQ(m.acc, 1.0);
  EXPECT_EQ(m.f1, 1.0);
  EXPECT_EQ(m.auc, 1.0);
  EXPECT_EQ(m.advantage, 1.0);
}

TEST(Metrics, HandCountsAndAdvantageIdentity) {
  // tp 2, fn 1, tn 1, fp 2
  std::vector<GameOutcome> o = {outcome(1, 1, 3), outcome(1, 1, 2), outcome(1, 0, 0),
                                outcome(0, 1, 1), outcome(0, 1, 2), outcome(0, 0, 0)};
  Metrics m = compute_metrics(o);
  EXPECT_DOUBLE_EQ(m.acc, 0.5);
  EXPECT_DOUBLE_EQ(m.tpr, 2.0 / 3);
  EXPECT_DOUBLE_EQ(m.tnr, 1.0 / 3);
  EXPECT_DOUBLE_EQ(m.f1, 4.0 / 7);
  EXPECT_EQ(m.advantage, m.tpr + m.tnr - 1.0);
  EXPECT_DOUBLE_EQ(m.auc, auc_bruteforce({3, 2, 0}, {1, 2, 0}));
}

TEST(Metrics, OrderInvariant) {
  Rng rng(13);
  std::vector<GameOutcome> o;
  for (int i = 0; i < 100; ++i) o.push_back(outcome(rng.coin(), rng.coin(), rng.uniform()));
  Metrics a = compute_metrics(o);
  std::reverse(o.begin(), o.end());
  std::swap(o[3], o[70]);
  Metrics b = compute_metrics(o);
  EXPECT_EQ(a.acc, b.acc);
  EXPECT_EQ(a.auc, b.auc);
  EXPECT_EQ(a.advantage, b.advantage);
}

TEST(Metrics, SingleClassGivesNaN) {
  Metrics m = compute_metrics({outcome(1, 1, 1), outcome(1, 0, 0)});
  EXPECT_TRUE(std::isnan(m.auc));
  EXPECT_TRUE(std::isnan(m.tnr));
  EXPECT_TRUE(std::isnan(m.advantage));
  EXPECT_EQ(m.acc, 0.5);
}

GameConfig gaussian_fc(FcVariant v) {
  GameConfig cfg;
  cfg.data.source = Source::Gaussian;
  cfg.data.l = 8;
  cfg.data.d = 64;
  cfg.trials = 60;
  cfg.n = 40;
  cfg.seed = 5;
  cfg.fc.variant = v;
  return cfg;
}

TEST(Game, FcOnGaussianIsPerfect) {
  for (FcVariant v : {FcVariant::Full, FcVariant::Token}) {
    GameResult r = run_games(gaussian_fc(v));
    for (const GameOutcome& o : r.outcomes) EXPECT_EQ(o.b, o.b_prime);
    EXPECT_EQ(r.metrics.acc, 1.0);
    EXPECT_EQ(r.metrics.auc, 1.0);
    EXPECT_EQ(r.metrics.advantage, 1.0);
    EXPECT_GT(r.tau, 0.0);
    EXPECT_TRUE(std::isnan(r.beta));
  }
}

TEST(Game, BatchOfOneMemberHasUnitGradient) {
  GameConfig cfg = gaussian_fc(FcVariant::Full);
  cfg.n = 1;
  int seen = 0;
  for (std::size_t t = 0; t < 20; ++t) {
    GameOutcome o = run_trial(cfg, t);
    if (o.b == 1) {
      EXPECT_EQ(o.score, 1.0);
      ++seen;
    } else {
      EXPECT_EQ(o.score, 0.0);
    }
  }
  EXPECT_GT(seen, 0);
}

TEST(Game, TrialsAreDeterministic) {
  GameConfig cfg = gaussian_fc(FcVariant::Token);
  cfg.trials = 10;
  GameResult a = run_games(cfg), b = run_games(cfg);
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    EXPECT_EQ(a.outcomes[t].b, b.outcomes[t].b);
    EXPECT_EQ(a.outcomes[t].score, b.outcomes[t].score);
    GameOutcome single = run_trial(cfg, t);
    EXPECT_EQ(single.b, a.outcomes[t].b);
    EXPECT_EQ(single.score, a.outcomes[t].score);
  }
}

TEST(Game, AttentionOnOneHot) {
  GameConfig cfg;
  cfg.attack = AttackKind::Attn;
  cfg.data.source = Source::OneHot;
  cfg.data.l = 6;
  cfg.data.d = 48;
  cfg.n = 4;
  cfg.trials = 40;
  cfg.seed = 9;
  GameResult r = run_games(cfg);
  EXPECT_EQ(r.beta, 10.0);
  EXPECT_GT(r.condition_ratio, 1.0);
  EXPECT_NEAR(r.gamma, 2 * compute_bar_delta(1, 6, 10, 1), 1e-15);
  // At this small d_X the random head-2 subspace occasionally lines up with
  // a batch token and yields a false positive.
  EXPECT_GE(r.metrics.acc, 0.95);
  for (const GameOutcome& o : r.outcomes)
    if (o.b == 1) {
      EXPECT_EQ(o.b_prime, 1);
    }
}

TEST(Game, SharedCraftingMatchesSeparateRuns) {
  GameConfig cfg;
  cfg.data.source = Source::SyntheticVocab;
  cfg.data.vocab_k = 64;
  cfg.data.l = 4;
  cfg.n = 6;
  cfg.trials = 12;
  cfg.fc.variant = FcVariant::Token;
  std::vector<DpConfig> dps(3);
  dps[1].mechanism = Mechanism::GRR;
  dps[1].epsilon = 2;
  dps[2].mechanism = Mechanism::RAPPOR;
  dps[2].epsilon = 4;
  auto multi = run_games_multi(cfg, dps);
  ASSERT_EQ(multi.size(), 3u);
  for (std::size_t j = 0; j < dps.size(); ++j) {
    GameConfig one = cfg;
    one.dp = dps[j];
    GameResult r = run_games(one);
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      EXPECT_EQ(r.outcomes[t].b, multi[j].outcomes[t].b);
      EXPECT_EQ(r.outcomes[t].score, multi[j].outcomes[t].score);
    }
    if (dps[j].mechanism != Mechanism::None) {
      EXPECT_EQ(multi[j].dp.k, 64u);
    }
  }
}

TEST(Game, ConfigErrors) {
  GameConfig cfg = gaussian_fc(FcVariant::Full);
  cfg.dp.mechanism = Mechanism::GRR;
  cfg.dp.epsilon = 1;
  EXPECT_THROW(run_games(cfg), ConfigError);

  GameConfig small;
  small.data.source = Source::OneHot;
  small.data.l = 2;
  small.data.d = 3;
  small.n = 7;
  EXPECT_THROW(run_games(small), ConfigError);

  GameConfig attn;
  attn.attack = AttackKind::Attn;
  attn.data.l = 1;
  EXPECT_THROW(run_games(attn), ConfigError);

  GameConfig zero = gaussian_fc(FcVariant::Full);
  zero.trials = 0;
  EXPECT_THROW(run_games(zero), ConfigError);
}

TEST(Game, TokenExclusionNeedsRoomInTheVocabulary) {
  // Four tokens per sequence over a five-letter one-hot alphabet: every
  // batch of two sequences covers all letters, so no non-member token exists.
  GameConfig cfg;
  cfg.data.source = Source::OneHot;
  cfg.data.l = 4;
  cfg.data.d = 5;
  cfg.n = 2;
  cfg.trials = 8;
  cfg.fc.variant = FcVariant::Token;
  bool failed = false;
  try {
    run_games(cfg);
  } catch (const ConfigError&) {
    failed = true;
  }
  EXPECT_TRUE(failed);
  cfg.exclusion = Exclusion::Sequence;
  GameResult r = run_games(cfg);
  EXPECT_EQ(r.outcomes.size(), 8u);
}

TEST(ResolveBeta, SourceDefaults) {
  GameConfig cfg;
  cfg.data.source = Source::Gaussian;
  EXPECT_EQ(resolve_beta(cfg, 64), 10.0 / 64);
  cfg.data.source = Source::EmbedFile;
  EXPECT_EQ(resolve_beta(cfg, 64), 2.0);
  cfg.data.source = Source::SyntheticVocab;
  EXPECT_EQ(resolve_beta(cfg, 64), 10.0);
  cfg.beta = 4.0;
  EXPECT_EQ(resolve_beta(cfg, 64), 4.0);
}

}  // namespace
}  // namespace ami
