#pragma once

// Command-line front end. Exit codes: 0 all checks passed, 1 violations or
// defects, 2 usage or config error, 3 numerical failure.

#include <iosfwd>
#include <string>
#include <vector>

namespace heis::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kViolations = 1, kUsage = 2, kNumerical = 3 };

// args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace heis::cli
