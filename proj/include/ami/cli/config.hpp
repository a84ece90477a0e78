#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ami/bounds/bounds.hpp"
#include "ami/game/game.hpp"
#include "ami/ldp/mechanisms.hpp"

namespace ami {

struct AttackSpec {
  AttackKind kind = AttackKind::Fc;
  FcVariant variant = FcVariant::Full;
};
// "fc_full", "fc_token" or "attn".
std::string to_string(const AttackSpec& a);
AttackSpec attack_spec_from_string(const std::string& s);

struct SweepConfig {
  std::vector<Mechanism> mechanisms;
  std::vector<double> epsilons;
  std::vector<AttackSpec> attacks;
};

struct ReportConfig {
  std::string path;  // empty: standard output
  std::string format = "csv";
  // Off by default so that reports are byte-identical across runs.
  bool timing = false;
};

struct RunConfig {
  std::uint64_t seed = 0;
  GameConfig game;
  BoundGridConfig bounds;
  SweepConfig sweep;
  std::vector<Mechanism> dp_check_mechanisms;
  std::size_t dp_check_trials = 100000;
  ReportConfig report;
  // Key-sorted dump of the parsed document, used for the run id.
  std::string canonical;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
};

// Throws ConfigError naming the offending key path (or the JSON line and
// column for syntax errors). Unknown keys are errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
void apply_overrides(RunConfig& cfg, const Overrides& o);

// 16 hex digits derived from the canonical config and the seed.
std::string make_run_id(const RunConfig& cfg);

}  // namespace ami
