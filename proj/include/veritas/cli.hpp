#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace veritas::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

/// Seed used when neither --seed nor a config file sets one.
inline constexpr unsigned long long kDefaultSeed = 20190;

/// Runs one command. `args` excludes the program name. Results go to `out`;
/// usage text and the one-line JSON error record go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace veritas::cli
