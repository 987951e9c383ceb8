#pragma once

// Subcommands of the maxqed tool. Each returns the process exit code:
//   0  success
//   1  invalid input (config, files, preconditions such as the CFL bound)
//   n  n >= 2 failed physics checks; a single failed check also exits with 2
//      so that it cannot be mistaken for invalid input.

#include <iosfwd>
#include <string>
#include <vector>

#include "maxqed/cli/checks.hpp"
#include "maxqed/cli/config.hpp"

namespace maxqed::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;

/// Exit code for a number of failed checks.
int exit_code_for_failures(std::size_t failures);

int cmd_kk_check(const RunConfig& config, std::ostream& log);
int cmd_green(const RunConfig& config, std::ostream& log);
int cmd_simulate(const RunConfig& config, std::ostream& log);
int cmd_verify_identities(const RunConfig& config, std::ostream& log);
int cmd_verify(const RunConfig& config, std::ostream& log);

/// Writes the verify report as JSON.
Json report_to_json(const CheckReport& report, const RunConfig& config);

/// Parses arguments, loads the config and dispatches. `args` excludes the
/// program name. Diagnostics go to `err`, progress and tables to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace maxqed::cli
