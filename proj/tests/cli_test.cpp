#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ami/cli/commands.hpp"
#include "ami/cli/report.hpp"
#include "ami/core/error.hpp"

namespace ami {
namespace {

using ::testing::HasSubstr;

std::string write_temp(const std::string& name, const std::string& text) {
  std::string path = ::testing::TempDir() + "ami_cli_" + name;
  std::ofstream(path) << text;
  return path;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

// Header and data rows of a CSV report, without the version line.
std::vector<std::vector<std::string>> csv_rows(const std::string& report) {
  std::vector<std::vector<std::string>> rows;
  for (const std::string& line : split(report, '\n'))
    if (!line.empty() && line[0] != '#') rows.push_back(split(line, ','));
  return rows;
}

std::string column(const std::vector<std::vector<std::string>>& rows, std::size_t r, const std::string& name) {
  const auto& h = rows.at(0);
  auto it = std::find(h.begin(), h.end(), name);
  if (it == h.end()) throw std::runtime_error("no column " + name);
  return rows.at(r).at(static_cast<std::size_t>(it - h.begin()));
}

struct CmdRun {
  int code;
  std::string out;
  std::string err;
};

CmdRun run(int (*cmd)(const std::string&, const Overrides&, std::ostream&, std::ostream&), const std::string& cfg,
        Overrides o = {}) {
  std::ostringstream out, err;
  int code = cmd(write_temp("cfg.json", cfg), o, out, err);
  return {code, out.str(), err.str()};
}

const char* kGaussianFc = R"({"seed": 4, "data": {"source": "gaussian", "l_X": 8, "d_X": 64},
  "attack": {"kind": "fc", "variant": "full"}, "game": {"trials": 200, "n": 40}})";

TEST(Config, RejectsUnknownKeysWithPath) {
  try {
    parse_config(R"({"attack": {"kind": "fc", "betta": 3}})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_THAT(e.what(), HasSubstr("attack.betta"));
  }
  EXPECT_THROW(parse_config(R"({"extra": 1})"), ConfigError);
}

TEST(Config, MissingEpsilonForMechanism) {
  try {
    parse_config(R"({"dp": {"mechanism": "grr"}})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_THAT(e.what(), HasSubstr("dp.epsilon"));
  }
}

TEST(Config, TypesAutoValuesAndSyntax) {
  RunConfig c = parse_config(R"({"attack": {"tau": "auto", "beta": 3.5, "gamma": "auto"}, "game": {"n": 5}})");
  EXPECT_FALSE(c.game.fc.tau.has_value());
  EXPECT_EQ(*c.game.beta, 3.5);
  EXPECT_EQ(c.game.n, 5u);
  EXPECT_THROW(parse_config(R"({"game": {"n": -1}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"game": {"n": "many"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"report": {"format": "xml"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"sweep": {"attacks": ["fc_full", "fc_half"]}})"), ConfigError);
  try {
    parse_config("{\n \"seed\": 1,\n}");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_THAT(e.what(), HasSubstr("line 3"));
  }
}

TEST(Config, RunIdDependsOnConfigAndSeed) {
  RunConfig a = parse_config(kGaussianFc), b = parse_config(kGaussianFc);
  EXPECT_EQ(make_run_id(a), make_run_id(b));
  EXPECT_EQ(make_run_id(a).size(), 16u);
  Overrides o;
  o.seed = 99;
  apply_overrides(b, o);
  EXPECT_NE(make_run_id(a), make_run_id(b));
  EXPECT_EQ(b.game.seed, 99u);
}

TEST(CmdGame, GaussianFcHasAdvantageOne) {
  CmdRun r = run(cmd_game, kGaussianFc);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(column(rows, 1, "advantage"), "1");
  EXPECT_EQ(column(rows, 1, "auc"), "1");
  EXPECT_EQ(column(rows, 1, "trials"), "200");
  EXPECT_EQ(column(rows, 1, "wall_ms"), "nan");
}

TEST(CmdGame, RepeatRunsAreByteIdentical) {
  EXPECT_EQ(run(cmd_game, kGaussianFc).out, run(cmd_game, kGaussianFc).out);
}

TEST(CmdGame, JsonMatchesCsvKeyForKey) {
  CmdRun csv = run(cmd_game, kGaussianFc);
  Overrides o;
  o.format = "json";
  CmdRun js = run(cmd_game, kGaussianFc, o);
  auto rows = csv_rows(csv.out);
  auto doc = nlohmann::json::parse(js.out);
  ASSERT_EQ(doc["rows"].size(), 1u);
  const auto& obj = doc["rows"][0];
  ASSERT_EQ(obj.size(), rows[0].size());
  for (std::size_t i = 0; i < rows[0].size(); ++i) {
    const std::string& key = rows[0][i];
    ASSERT_TRUE(obj.contains(key)) << key;
    const auto& v = obj[key];
    if (v.is_null()) {
      EXPECT_EQ(rows[1][i], "nan") << key;
    } else if (v.is_string()) {
      EXPECT_EQ(rows[1][i], v.get<std::string>());
    } else {
      EXPECT_EQ(std::stod(rows[1][i]), v.get<double>()) << key;
    }
  }
}

TEST(CmdGame, ExitCodes) {
  EXPECT_EQ(run(cmd_game, R"({"dp": {"mechanism": "grr"}})").code, kExitConfig);
  EXPECT_EQ(run(cmd_game, "not json").code, kExitConfig);
  std::ostringstream out, err;
  EXPECT_EQ(cmd_game("/nonexistent/config.json", {}, out, err), kExitConfig);
  // A missing data file is a runtime failure, not a config error.
  EXPECT_EQ(run(cmd_game, R"({"data": {"source": "embed_file", "path": "/nonexistent.amie"}})").code, kExitRuntime);
}

TEST(CmdBounds, GaussianBetaColumnAndEmptyGrid) {
  CmdRun r = run(cmd_bounds, R"({"bounds": {"sources": ["gaussian"], "l_X": [5], "d_X": [16, 32, 64], "samples": 2000}})");
  ASSERT_EQ(r.code, kExitOk) << r.err;
  auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 1; i < rows.size(); ++i)
    EXPECT_EQ(std::stod(column(rows, i, "beta")), 10.0 / std::stod(column(rows, i, "d_X")));
  EXPECT_EQ(run(cmd_bounds, R"({"bounds": {"sources": ["onehot"], "l_X": [], "d_X": [16]}})").code, kExitConfig);
}

TEST(CmdBounds, OneHotLowerBoundIsOne) {
  CmdRun r = run(cmd_bounds, R"({"bounds": {"sources": ["onehot"], "l_X": [5, 15], "d_X": [16, 128], "samples": 5000}})");
  auto rows = csv_rows(r.out);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(column(rows, i, "lower_bound"), "1");
}

TEST(CmdDpCheck, Examples) {
  CmdRun ok = run(cmd_dp_check, R"({"dp": {"mechanism": "grr", "epsilon": 1.0986122886681098, "k": 3}})");
  EXPECT_EQ(ok.code, kExitOk);
  EXPECT_THAT(ok.out, HasSubstr("PASS grr"));
  EXPECT_THAT(ok.out, HasSubstr("expected 0.6"));

  CmdRun high = run(cmd_dp_check, R"({"dp": {"mechanism": "grr", "epsilon": 50, "k": 100}, "dp_check": {"trials": 10000}})");
  EXPECT_EQ(high.code, kExitOk);
  EXPECT_THAT(high.out, HasSubstr("changed-index rate: observed 0,"));

  CmdRun bad = run(cmd_dp_check, R"({"dp": {"mechanism": "grr", "epsilon": 2, "k": 10, "corrupt_p": 0.05}})");
  EXPECT_EQ(bad.code, kExitRuntime);
  EXPECT_THAT(bad.out, HasSubstr("FAIL"));

  EXPECT_EQ(run(cmd_dp_check, R"({"dp": {"mechanism": "none"}})").code, kExitConfig);
}

const char* kSweep = R"({"seed": 6, "data": {"source": "synthetic_vocab", "vocab_k": 48, "l_X": 3},
  "game": {"trials": 16, "n": 5},
  "sweep": {"mechanisms": ["grr", "rappor", "the", "dbitflip"], "epsilons": [5, 7.5, 10],
            "attacks": ["fc_token", "attn"]}})";

TEST(CmdSweep, ProductCountAndCanonicalOrder) {
  CmdRun r = run(cmd_sweep, kSweep);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 25u);
  EXPECT_EQ(column(rows, 1, "attack"), "attn");
  EXPECT_EQ(column(rows, 1, "dp_mechanism"), "dbitflip");
  EXPECT_EQ(column(rows, 1, "epsilon"), "5");
  EXPECT_EQ(column(rows, 24, "attack"), "fc");
  EXPECT_EQ(column(rows, 24, "dp_mechanism"), "the");
  EXPECT_EQ(column(rows, 24, "epsilon"), "10");
}

TEST(CmdSweep, NoneRowMatchesStandaloneGame) {
  const char* sweep = R"({"seed": 6, "data": {"source": "synthetic_vocab", "vocab_k": 48, "l_X": 3},
    "game": {"trials": 16, "n": 5}, "attack": {"kind": "fc", "variant": "token"},
    "sweep": {"mechanisms": ["none", "grr"], "epsilons": [5], "attacks": ["fc_token"]}})";
  auto s = csv_rows(run(cmd_sweep, sweep).out);
  auto g = csv_rows(run(cmd_game, sweep).out);
  ASSERT_EQ(s.size(), 3u);
  std::size_t none = column(s, 1, "dp_mechanism") == "none" ? 1 : 2;
  ASSERT_EQ(column(s, none, "dp_mechanism"), "none");
  for (const char* col : {"acc", "f1", "auc", "tpr", "tnr", "advantage", "tau", "trials"})
    EXPECT_EQ(column(s, none, col), column(g, 1, col)) << col;
}

TEST(CmdSweep, FcTokenAucRisesWithEpsilon) {
  const char* sweep = R"({"seed": 1, "data": {"source": "synthetic_vocab", "vocab_k": 256, "l_X": 4},
    "game": {"trials": 200, "n": 20},
    "sweep": {"mechanisms": ["grr"], "epsilons": [5, 10], "attacks": ["fc_token"]}})";
  auto rows = csv_rows(run(cmd_sweep, sweep).out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_GT(std::stod(column(rows, 2, "auc")), std::stod(column(rows, 1, "auc")));
}

// ---- the binary ---------------------------------------------------------------

CmdRun exec(const std::string& args, const std::string& env = "") {
  std::string out_path = ::testing::TempDir() + "ami_cli_stdout";
  std::string cmd = env + " " + AMI_SIM_PATH + " " + args + " > " + out_path + " 2>/dev/null";
  int status = std::system(cmd.c_str());
  std::ifstream in(out_path);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WEXITSTATUS(status), ss.str(), ""};
}

TEST(Binary, ExitCodes) {
  std::string good = write_temp("bin_good.json", R"({"game": {"trials": 4, "n": 3}, "data": {"l_X": 2, "d_X": 4}})");
  std::string bad = write_temp("bin_bad.json", R"({"dp": {"mechanism": "grr"}})");
  std::string dp = write_temp("bin_dp.json", R"({"dp": {"mechanism": "grr", "epsilon": 2, "k": 10, "corrupt_p": 0.05}})");
  EXPECT_EQ(exec("game --config " + good).code, 0);
  EXPECT_EQ(exec("game --config " + bad).code, 2);
  EXPECT_EQ(exec("dp-check --config " + dp).code, 1);
  EXPECT_EQ(exec("game").code, 2);
  EXPECT_EQ(exec("frobnicate --config " + good).code, 2);
  EXPECT_EQ(exec("game --config " + good + " --format yaml").code, 2);
}

TEST(Binary, ThreadCountDoesNotChangeReports) {
  std::string cfg = write_temp("bin_threads.json",
                               R"({"seed": 12, "data": {"source": "onehot", "l_X": 4, "d_X": 32},
                                   "attack": {"kind": "attn"}, "game": {"trials": 24, "n": 6},
                                   "bounds": {"sources": ["spherical"], "l_X": [5], "d_X": [16, 32], "samples": 9000}})");
  for (const char* sub : {"game", "bounds"}) {
    CmdRun one = exec(std::string(sub) + " --config " + cfg, "AMI_THREADS=1");
    CmdRun eight = exec(std::string(sub) + " --config " + cfg, "AMI_THREADS=8");
    EXPECT_EQ(one.code, 0);
    EXPECT_FALSE(one.out.empty());
    EXPECT_EQ(one.out, eight.out) << sub;
  }
}

}  // namespace
}  // namespace ami
