#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fdakit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

/// Runs one command. Diagnostics go to err as a single line prefixed with
/// E_USAGE, E_INPUT or E_NUMERIC.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace fdakit::cli
