#include "ami/game/game.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>

#include "ami/bounds/bounds.hpp"
#include "ami/core/error.hpp"
#include "ami/core/parallel.hpp"
#include "ami/data/files.hpp"
#include "ami/data/generators.hpp"
#include "ami/data/stats.hpp"

namespace ami {

std::string to_string(AttackKind a) { return a == AttackKind::Fc ? "fc" : "attn"; }

double resolve_beta(const GameConfig& cfg, std::size_t d) {
  if (cfg.beta) return *cfg.beta;
  switch (cfg.data.source) {
    case Source::Gaussian:
      return 10.0 / static_cast<double>(d);
    case Source::EmbedFile:
    case Source::IndexFile:
      return 2.0;
    default:
      return 10.0;
  }
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kReferenceSequences = 64;
constexpr std::size_t kReferenceTokens = 256;
constexpr double kFallbackTau = 1e-3;

struct Prepared {
  const GameConfig* cfg = nullptr;
  std::unique_ptr<SequenceSource> src;
  std::shared_ptr<const Vocabulary> vocab;
  std::size_t l = 0;
  std::size_t d = 0;
  // Index of the attacked token, or npos when the whole sequence is the target.
  std::size_t target_token = std::string::npos;
  double beta = kNaN;
  double gamma = kNaN;
  double tau = kNaN;
  double condition_ratio = kNaN;
  DataStats stats;
  std::vector<std::string> warnings;
};

DpConfig complete_dp(DpConfig dp, const Prepared& P) {
  if (dp.mechanism == Mechanism::None) return dp;
  if (!P.vocab)
    throw ConfigError("dp.mechanism '" + to_string(dp.mechanism) +
                      "' needs token ids; use data.source synthetic_vocab or index_file");
  if (dp.k == 0) dp.k = P.vocab->k;
  if (dp.k != P.vocab->k)
    throw ConfigError("dp.k = " + std::to_string(dp.k) + " does not match the vocabulary size " +
                      std::to_string(P.vocab->k));
  validate(dp);
  return dp;
}

Prepared prepare(const GameConfig& cfg) {
  if (cfg.trials < 1) throw ConfigError("game.trials must be at least 1");
  if (cfg.n < 1) throw ConfigError("game.n must be at least 1");
  Prepared P;
  P.cfg = &cfg;
  std::size_t pool_count = 0;
  const DataConfig& dc = cfg.data;
  switch (dc.source) {
    case Source::OneHot:
      P.src = make_onehot_source(dc.l, dc.d);
      break;
    case Source::Spherical:
      P.src = make_spherical_source(dc.l, dc.d);
      break;
    case Source::Gaussian:
      P.src = make_gaussian_source(dc.l, dc.d);
      break;
    case Source::SyntheticVocab: {
      P.vocab = std::make_shared<const Vocabulary>(onehot_vocabulary(dc.vocab_k));
      P.src = make_vocab_source(P.vocab, dc.l, Source::SyntheticVocab);
      break;
    }
    case Source::EmbedFile: {
      auto pool = std::make_shared<const TokenBatch>(load_embed_file(dc.path));
      pool_count = pool->n;
      P.src = make_pool_source(pool);
      break;
    }
    case Source::IndexFile: {
      P.vocab = std::make_shared<const Vocabulary>(load_vocab_file(dc.path));
      pool_count = P.vocab->count;
      P.src = make_id_pool_source(P.vocab);
      break;
    }
  }
  P.l = P.src->l();
  P.d = P.src->d();
  complete_dp(cfg.dp, P);

  if (cfg.attack == AttackKind::Attn) {
    if (P.l < 2) throw ConfigError("the attention attack needs l_X >= 2");
    if (cfg.attn.target_token_index >= P.l) throw ConfigError("attack.target_token_index must be below l_X");
    P.target_token = cfg.attn.target_token_index;
  } else if (cfg.fc.variant == FcVariant::Token) {
    if (cfg.fc.token_index >= P.l) throw ConfigError("attack.token_index must be below l_X");
    P.target_token = cfg.fc.token_index;
  }

  // A sample the server can draw on its own from public knowledge of the
  // data distribution. It never overlaps the trials' streams.
  const bool need_ref = cfg.attack == AttackKind::Attn ? !cfg.attn.gamma.has_value() : !cfg.fc.tau.has_value();
  TokenBatch ref;
  if (need_ref) {
    std::size_t m = std::max(kReferenceSequences, (kReferenceTokens + P.l - 1) / P.l);
    if (pool_count > 0) m = std::min(m, pool_count);
    Rng rng(derive_seed(cfg.seed, 0, Stream::Reference));
    ref = sample_distinct(*P.src, m, rng);
  }

  if (cfg.attack == AttackKind::Fc) {
    if (cfg.fc.tau) {
      P.tau = *cfg.fc.tau;
    } else {
      try {
        if (cfg.fc.variant == FcVariant::Token && P.vocab)
          P.tau = auto_tau(P.vocab->table.view());
        else
          P.tau = auto_tau(flatten_batch(ref, cfg.fc.variant));
      } catch (const DomainError& e) {
        P.tau = kFallbackTau;
        P.warnings.push_back(std::string("auto tau: ") + e.what() + "; using tau = 0.001");
      }
    }
    if (!(P.tau > 0)) throw ConfigError("attack.tau must be positive");
  } else {
    P.beta = resolve_beta(cfg, P.d);
    if (!(P.beta > 0)) throw ConfigError("attack.beta must be positive");
    if (need_ref) {
      P.stats = measure_stats(ref);
      P.gamma = auto_gamma(P.stats, P.beta, P.l);
      P.condition_ratio = check_condition(P.stats.delta, P.beta, P.l, P.stats.M).ratio;
      if (P.condition_ratio < 1.0)
        P.warnings.push_back("condition (3) does not hold for the reference statistics (ratio " +
                             std::to_string(P.condition_ratio) + ")");
    } else {
      P.gamma = *cfg.attn.gamma;
    }
  }
  return P;
}

bool token_equal(const double* a, const double* b, std::size_t d) {
  for (std::size_t i = 0; i < d; ++i)
    if (a[i] != b[i]) return false;
  return true;
}

bool sequence_in(const TokenBatch& D, const TokenBatch& T) {
  for (std::size_t s = 0; s < D.n; ++s)
    if (same_sequence(D, s, T, 0)) return true;
  return false;
}

bool token_in(const TokenBatch& D, const double* tok) {
  for (std::size_t s = 0; s < D.n; ++s)
    for (std::size_t t = 0; t < D.l; ++t)
      if (token_equal(D.token(s, t), tok, D.d)) return true;
  return false;
}

bool member(const Prepared& P, const TokenBatch& D, const TokenBatch& T) {
  if (sequence_in(D, T)) return true;
  if (P.target_token != std::string::npos && P.cfg->exclusion == Exclusion::Token)
    return token_in(D, T.token(0, P.target_token));
  return false;
}

TokenBatch single(const Prepared& P) {
  TokenBatch T;
  T.source = P.src->kind();
  T.n = 1;
  T.l = P.l;
  T.d = P.d;
  T.values.resize(P.l * P.d);
  if (P.vocab) T.ids.resize(P.l);
  return T;
}

// Crafted state for one trial, reused across DP configurations.
struct Crafted {
  FcParams fc;
  AttnParams attn;
};

std::vector<GameOutcome> play(const Prepared& P, std::size_t trial, const std::vector<DpConfig>& dps) {
  const GameConfig& cfg = *P.cfg;
  Rng data(derive_seed(cfg.seed, trial, Stream::Data));
  TokenBatch D = sample_distinct(*P.src, cfg.n, data);

  Rng coin(derive_seed(cfg.seed, trial, Stream::Coin));
  const int b = coin.coin() ? 1 : 0;
  TokenBatch T = single(P);
  if (b == 1) {
    const std::size_t idx = coin.below(cfg.n);
    std::copy(D.sequence(idx), D.sequence(idx) + D.seq_stride(), T.values.begin());
    if (P.vocab) std::copy(D.sequence_ids(idx), D.sequence_ids(idx) + P.l, T.ids.begin());
  } else {
    std::size_t rejected = 0;
    while (true) {
      P.src->draw(data, T.values.data(), P.vocab ? T.ids.data() : nullptr);
      if (!member(P, D, T)) break;
      if (++rejected > kResampleCap)
        throw ConfigError("could not draw a non-member target after " + std::to_string(kResampleCap) +
                          " attempts; the data domain is too small for this batch size");
    }
  }
  if (member(P, D, T) != (b == 1)) throw ContractError("game contract violated: target membership disagrees with b");

  Rng craft_rng(derive_seed(cfg.seed, trial, Stream::Craft));
  Crafted c;
  if (cfg.attack == AttackKind::Fc) {
    c.fc = craft_fc(flatten_target(T, 0, cfg.fc), P.tau);
  } else {
    const double* v = T.token(0, P.target_token);
    AttnAttackConfig acfg = cfg.attn;
    acfg.beta = P.beta;
    acfg.gamma = P.gamma;
    c.attn = craft_attn_attack({v, v + P.d}, acfg, P.stats, P.l, craft_rng).params;
  }

  std::vector<GameOutcome> out(dps.size());
  for (std::size_t j = 0; j < dps.size(); ++j) {
    Rng dp_rng(derive_seed(cfg.seed, trial, Stream::Dp));
    TokenBatch perturbed;
    const TokenBatch* client = &D;
    if (dps[j].mechanism != Mechanism::None) {
      perturbed = perturb_batch(D, *P.vocab, dps[j], dp_rng);
      client = &perturbed;
    }
    GameOutcome& o = out[j];
    o.b = b;
    o.trial_index = trial;
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.attack == AttackKind::Fc) {
      GradientReport r = fc_backward(c.fc, flatten_batch(*client, cfg.fc.variant));
      o.score = fc_score(r);
      o.b_prime = fc_guess(r);
    } else {
      GradientReport r = attn_backward(c.attn, *client);
      o.score = r.score;
      o.b_prime = attn_guess(r);
    }
    o.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
  }
  return out;
}

}  // namespace

GameOutcome run_trial(const GameConfig& cfg, std::size_t trial_index) {
  Prepared P = prepare(cfg);
  return play(P, trial_index, {complete_dp(cfg.dp, P)})[0];
}

std::vector<GameResult> run_games_multi(const GameConfig& cfg, const std::vector<DpConfig>& dps) {
  if (dps.empty()) throw ConfigError("no DP configurations given");
  Prepared P = prepare(cfg);
  std::vector<DpConfig> full;
  for (const DpConfig& dp : dps) full.push_back(complete_dp(dp, P));

  std::vector<std::vector<GameOutcome>> per_trial(cfg.trials);
  std::vector<std::exception_ptr> errors(cfg.trials);
#pragma omp parallel for schedule(dynamic, 1) if (!in_parallel())
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    try {
      per_trial[t] = play(P, t, full);
    } catch (...) {
      errors[t] = std::current_exception();
    }
  }
  // Report the failure of the lowest trial index, whatever the schedule.
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<GameResult> results(full.size());
  for (std::size_t j = 0; j < full.size(); ++j) {
    GameResult& r = results[j];
    r.dp = full[j];
    r.l = P.l;
    r.d = P.d;
    r.beta = P.beta;
    r.gamma = P.gamma;
    r.tau = P.tau;
    r.condition_ratio = P.condition_ratio;
    r.warnings = P.warnings;
    r.outcomes.reserve(cfg.trials);
    for (std::size_t t = 0; t < cfg.trials; ++t) r.outcomes.push_back(per_trial[t][j]);
    r.metrics = compute_metrics(r.outcomes);
    if (std::isnan(r.metrics.auc)) r.warnings.push_back("all trials drew the same hidden bit; AUC is undefined (NaN)");
  }
  return results;
}

GameResult run_games(const GameConfig& cfg) { return run_games_multi(cfg, {cfg.dp})[0]; }

}  // namespace ami
