#pragma once

// Command-line front end: run, validate, list, plotdata.

#include <iosfwd>

namespace pmnl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitPolicyFailure = 3;

/// Entry point shared by the executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pmnl
