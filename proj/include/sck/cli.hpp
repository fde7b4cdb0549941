#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sck::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRejected = 1;  // a test rejected under --strict
inline constexpr int kConfigError = 2;
inline constexpr int kDataError = 3;
inline constexpr int kEstimationError = 4;
inline constexpr int kInternalError = 5;

// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sck::cli
