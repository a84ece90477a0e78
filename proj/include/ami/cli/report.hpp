#pragma once

#include <string>
#include <vector>

#include "ami/bounds/bounds.hpp"
#include "ami/cli/config.hpp"
#include "ami/game/game.hpp"

namespace ami {

inline constexpr int kReportVersion = 1;

struct ReportRow {
  std::string run_id;
  std::string source;
  std::string attack;
  std::string variant;
  std::string dp_mechanism;
  double epsilon = 0.0;
  std::size_t n = 0;
  std::size_t l = 0;
  std::size_t d = 0;
  double beta = 0.0;
  double gamma = 0.0;
  double tau = 0.0;
  std::string score_kind;
  std::size_t trials = 0;
  Metrics metrics;
  double condition_ratio = 0.0;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
};

ReportRow make_row(const RunConfig& cfg, const AttackSpec& attack, const GameResult& r);
// Canonical order: attack, variant, mechanism, epsilon.
void sort_rows(std::vector<ReportRow>& rows);

std::string render_game_report(const std::vector<ReportRow>& rows, const std::string& format);
std::string render_bounds_report(const std::vector<BoundEstimate>& rows, const std::string& format);

}  // namespace ami
