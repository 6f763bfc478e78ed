#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ddmb::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitInadmissible = 3;

/// Runs the command line `args` (args[0] is the program name). Results go
/// to `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ddmb::cli
