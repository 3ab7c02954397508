#pragma once

#include <iosfwd>

namespace qbd {

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitDomain = 3, kExitNumeric = 4 };

/// Runs one `qbd` command; primary output goes to out, diagnostics to err.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qbd
