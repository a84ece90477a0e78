#pragma once

#include <iosfwd>
#include <string>

#include "ami/cli/config.hpp"

namespace ami {

// Exit codes: 0 success, 1 runtime or statistical failure, 2 config error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

int cmd_game(const std::string& config_path, const Overrides& o, std::ostream& out, std::ostream& err);
int cmd_bounds(const std::string& config_path, const Overrides& o, std::ostream& out, std::ostream& err);
int cmd_dp_check(const std::string& config_path, const Overrides& o, std::ostream& out, std::ostream& err);
int cmd_sweep(const std::string& config_path, const Overrides& o, std::ostream& out, std::ostream& err);

}  // namespace ami
