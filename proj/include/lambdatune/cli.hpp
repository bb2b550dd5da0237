#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lambdatune {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Parses `args` (without the program name) and runs one subcommand:
// sweep, optimize, bdrate, report or plot. Runtime failures print
// "error [<stage>]: <message>" to `err` and return kExitFailure; bad flags
// or subcommands return kExitUsage.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lambdatune
