#include <CLI11.hpp>
#include <iostream>

#include "ami/cli/commands.hpp"
#include "ami/core/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Active membership inference simulator"};
  app.require_subcommand(1);

  std::string config;
  std::uint64_t seed = 0;
  std::string out, format;
  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const std::string&, const ami::Overrides&, std::ostream&, std::ostream&);
  };
  const Sub subs[] = {
      {"game", "Run the security game and report ACC/F1/AUC/advantage", ami::cmd_game},
      {"bounds", "Monte Carlo sweep of the attention lower bound", ami::cmd_bounds},
      {"dp-check", "Statistical self-tests of the local DP mechanisms", ami::cmd_dp_check},
      {"sweep", "Game runs over mechanisms x epsilons x attacks", ami::cmd_sweep},
  };
  std::vector<CLI::App*> apps;
  std::vector<CLI::Option*> seed_opts, out_opts, format_opts;
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", config, "JSON config file")->required();
    seed_opts.push_back(sub->add_option("--seed", seed, "Override the config seed"));
    out_opts.push_back(sub->add_option("--out", out, "Report path (default: stdout)"));
    format_opts.push_back(sub->add_option("--format", format, "csv or json"));
    apps.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ami::kExitOk : ami::kExitConfig;
  }

  ami::configure_threads_from_env();
  for (std::size_t i = 0; i < apps.size(); ++i) {
    if (!apps[i]->parsed()) continue;
    ami::Overrides o;
    if (seed_opts[i]->count()) o.seed = seed;
    if (out_opts[i]->count()) o.out = out;
    if (format_opts[i]->count()) o.format = format;
    return subs[i].run(config, o, std::cout, std::cerr);
  }
  return ami::kExitConfig;
}
