// Command-line front end. Exit codes: 0 success, 1 usage error,
// 2 verification mismatch, 3 input error.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dftclk {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitMismatch = 2, kExitInput = 3 };

/// `args[0]` is the program name. Results go to `out`, diagnostics to `err`.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace dftclk
