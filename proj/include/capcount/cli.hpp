#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace capcount::cli {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kBudgetExhausted = 2,
  kVerifyFailed = 3,
};

/// Runs `capcount <subcommand> [flags]` with args excluding the program
/// name. Result documents go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace capcount::cli
