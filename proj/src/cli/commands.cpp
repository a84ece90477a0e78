#include "ami/cli/commands.hpp"

#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>

#include "ami/cli/report.hpp"
#include "ami/core/error.hpp"
#include "ami/core/format.hpp"

namespace ami {
namespace {

// Runs `body` and maps exceptions onto exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

RunConfig load(const std::string& path, const Overrides& o) {
  RunConfig cfg = load_config(path);
  apply_overrides(cfg, o);
  return cfg;
}

void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.report.path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(cfg.report.path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write report to '" + cfg.report.path + "'");
  f << text;
  if (!f) throw std::runtime_error("write failed for '" + cfg.report.path + "'");
}

void warn(std::ostream& err, const GameResult& r) {
  for (const std::string& w : r.warnings) err << "warning: " << w << '\n';
}

AttackSpec spec_of(const GameConfig& g) { return {g.attack, g.fc.variant}; }

}  // namespace

int cmd_game(const std::string& config_path, const Overrides& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = load(config_path, o);
    GameResult r = run_games(cfg.game);
    warn(err, r);
    emit(cfg, render_game_report({make_row(cfg, spec_of(cfg.game), r)}, cfg.report.format), out);
    return kExitOk;
  });
}

int cmd_bounds(const std::string& config_path, const Overrides& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = load(config_path, o);
    emit(cfg, render_bounds_report(sweep_bounds(cfg.bounds), cfg.report.format), out);
    return kExitOk;
  });
}

int cmd_dp_check(const std::string& config_path, const Overrides& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = load(config_path, o);
    std::vector<Mechanism> mechs = cfg.dp_check_mechanisms;
    if (mechs.empty()) mechs.push_back(cfg.game.dp.mechanism);
    if (cfg.dp_check_trials == 0) throw ConfigError("'dp_check.trials' must be positive");
    bool all = true;
    for (std::size_t i = 0; i < mechs.size(); ++i) {
      if (mechs[i] == Mechanism::None) throw ConfigError("dp-check needs a mechanism other than none");
      DpConfig dp = cfg.game.dp;
      dp.mechanism = mechs[i];
      if (dp.k == 0) throw ConfigError("missing key 'dp.k' (dp-check needs the domain size)");
      if (!(dp.epsilon > 0)) throw ConfigError("missing key 'dp.epsilon'");
      for (const StatCheck& c : self_test(dp, cfg.dp_check_trials, derive_seed(cfg.seed, i, Stream::SelfTest))) {
        all = all && c.pass;
        out << (c.pass ? "PASS " : "FAIL ") << to_string(dp.mechanism) << " eps=" << format_double(dp.epsilon)
            << " k=" << dp.k << " | " << c.name << ": observed " << format_double(c.observed) << ", expected "
            << format_double(c.expected) << ", 3 sigma " << format_double(3 * c.sigma) << ", samples " << c.samples
            << '\n';
      }
    }
    out << (all ? "dp-check: all checks passed\n" : "dp-check: FAILED\n");
    return all ? kExitOk : kExitRuntime;
  });
}

int cmd_sweep(const std::string& config_path, const Overrides& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = load(config_path, o);
    const SweepConfig& sw = cfg.sweep;
    if (sw.mechanisms.empty() || sw.attacks.empty()) throw ConfigError("'sweep.mechanisms' and 'sweep.attacks' must be nonempty");
    std::vector<DpConfig> dps;
    for (Mechanism m : sw.mechanisms) {
      DpConfig dp = cfg.game.dp;
      dp.mechanism = m;
      if (m == Mechanism::None) {
        dps.push_back(dp);
        continue;
      }
      if (sw.epsilons.empty()) throw ConfigError("'sweep.epsilons' must be nonempty when a mechanism is listed");
      for (double eps : sw.epsilons) {
        dp.epsilon = eps;
        dps.push_back(dp);
      }
    }
    std::vector<ReportRow> rows;
    for (const AttackSpec& a : sw.attacks) {
      GameConfig g = cfg.game;
      g.attack = a.kind;
      g.fc.variant = a.variant;
      // The same seed for every attack: data, coins and targets coincide
      // across attacks, and across mechanisms within an attack.
      for (const GameResult& r : run_games_multi(g, dps)) {
        warn(err, r);
        rows.push_back(make_row(cfg, a, r));
      }
    }
    sort_rows(rows);
    emit(cfg, render_game_report(rows, cfg.report.format), out);
    return kExitOk;
  });
}

}  // namespace ami
