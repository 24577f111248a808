#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace noon::cli {

enum ExitCode : int {
    kOk = 0,
    kInternalError = 1,
    kConfigError = 2,
    kSimulationError = 3,
    kFitError = 4,
};

/// Entry point of `noonsim`; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace noon::cli
