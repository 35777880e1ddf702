#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace maggrab::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeFailure = 1;  // algorithm failed, e.g. a run never grabbed
inline constexpr int kUsageError = 2;      // bad flags, unreadable or invalid config/input files

/// Entry point shared by the executable and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace maggrab::cli
