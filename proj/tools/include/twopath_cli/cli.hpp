#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace twopath::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitInputError = 2,
  kExitRegimeRefused = 3,
};

// Runs one invocation; args excludes the program name. Normal output goes to
// `out` unless --out redirects it, diagnostics and warnings to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// start:end:count, where start and end may carry a "pi" factor ("2pi", "0.5pi", "pi").
std::vector<double> parse_phase_grid(const std::string& text);

}  // namespace twopath::cli
