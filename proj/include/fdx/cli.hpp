#pragma once

// Command-line entry point: profile, expansion, weight, evolve, contract and
// converge. Artifacts go to --out (FDX_OUT overrides); nothing is written
// unless the whole command succeeds.

#include <ostream>

namespace fdx::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitInvariant = 4;

/// Parses argv, runs one command and returns the exit code. Failures print a
/// JSON error record to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fdx::cli
