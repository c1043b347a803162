#pragma once

#include <iosfwd>

namespace bvp::cli {

// Exit-code contract (stable for CI use):
//   0 success; 2 schema/usage error; 3 numerical failure;
//   4 inconsistent problem (solve); 5 verification FAIL (verify);
//   6 expected convergence violated (limits).
inline constexpr int kExitOk = 0;
inline constexpr int kExitSchema = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitInconsistent = 4;
inline constexpr int kExitVerifyFailed = 5;
inline constexpr int kExitDiverged = 6;

/// Full command-line front end; returns the process exit code.
/// Subcommands: analyze <file>, solve <file>, verify <example-id> <file>,
/// limits <file>.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bvp::cli
