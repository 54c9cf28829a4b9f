#pragma once

#include <ostream>

namespace dfield::cli {

enum ExitCode : int { kPass = 0, kAssertionFailed = 1, kInputError = 2 };

/// Entry point of the `dfield` command. Reports go to `out` (or to --json / --csv files),
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dfield::cli
