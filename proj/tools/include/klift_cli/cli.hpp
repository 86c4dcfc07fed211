#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace klift::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Parses `args` (without the program name) and runs the subcommand.
/// Progress and timings go to `log`; returns a process exit code.
int run(const std::vector<std::string>& args, std::ostream& log);

}  // namespace klift::cli
