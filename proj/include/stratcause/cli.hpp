#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace stratcause::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitStatus : int { kOk = 0, kDataError = 1, kUsageError = 2 };

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Text goes to `out`, diagnostics to `err`; `--json <path>`
/// additionally writes the full report.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stratcause::cli
