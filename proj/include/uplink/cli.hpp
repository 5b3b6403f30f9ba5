#pragma once

#include <iosfwd>

namespace uplink {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitIo = 3, kExitNonConvergence = 4 };

/// Entry point of the uplink-sim tool; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace uplink
