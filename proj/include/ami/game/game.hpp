#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ami/attack/attn_attack.hpp"
#include "ami/attack/fc_attack.hpp"
#include "ami/data/token_batch.hpp"
#include "ami/ldp/mechanisms.hpp"

namespace ami {

enum class AttackKind { Fc, Attn };
std::string to_string(AttackKind a);

// What "T not in D" means when b = 0 for attacks that target one token
// (FC-Token and the attention attack). Token: the attacked token occurs
// nowhere in D. Sequence: only the sequence T itself is absent.
enum class Exclusion { Token, Sequence };

struct DataConfig {
  Source source = Source::Gaussian;
  // Ignored for file sources, which carry their own shape.
  std::size_t l = 8;
  std::size_t d = 64;
  // Vocabulary size for SyntheticVocab (d equals k there).
  std::size_t vocab_k = 1024;
  std::string path;
};

struct GameConfig {
  std::size_t trials = 200;
  std::size_t n = 40;
  std::uint64_t seed = 0;
  DataConfig data;
  AttackKind attack = AttackKind::Fc;
  FcAttackConfig fc;
  AttnAttackConfig attn;
  // Unset picks the per-source default (see resolve_beta).
  std::optional<double> beta;
  DpConfig dp;
  Exclusion exclusion = Exclusion::Token;
};

// 10 for one-hot, spherical and synthetic vocabularies, 10 / d_X for
// Gaussian data, 2 for embeddings read from files.
double resolve_beta(const GameConfig& cfg, std::size_t d);

struct GameOutcome {
  int b = 0;
  int b_prime = 0;
  double score = 0.0;
  std::size_t trial_index = 0;
  std::int64_t wall_ns = 0;
};

struct Metrics {
  double acc = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
  double tpr = 0.0;
  double tnr = 0.0;
  double advantage = 0.0;
};

struct GameResult {
  std::vector<GameOutcome> outcomes;
  Metrics metrics;
  DpConfig dp;
  std::size_t l = 0;
  std::size_t d = 0;
  // NaN where the quantity does not apply to the attack.
  double beta = 0.0;
  double gamma = 0.0;
  double tau = 0.0;
  double condition_ratio = 0.0;
  std::vector<std::string> warnings;
};

GameOutcome run_trial(const GameConfig& cfg, std::size_t trial_index);
GameResult run_games(const GameConfig& cfg);
// One game per DP configuration. Data, coin, target and crafted parameters
// are shared across the configurations of a trial; only the client-side
// perturbation differs. Result i equals run_games with cfg.dp = dps[i].
std::vector<GameResult> run_games_multi(const GameConfig& cfg, const std::vector<DpConfig>& dps);

Metrics compute_metrics(const std::vector<GameOutcome>& outcomes);
// Mann-Whitney statistic with average ranks for ties. NaN if a side is empty.
double auc_rank(const std::vector<double>& pos, const std::vector<double>& neg);
// Pairwise definition; throws ContractError on an empty side.
double auc_bruteforce(const std::vector<double>& pos, const std::vector<double>& neg);

}  // namespace ami
