#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bsynth::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUnexpected = 1,
    kConfigError = 2,
    kDataError = 3,
    kNumericError = 4,
};

/// Runs the command line and maps library errors onto exit codes. `args`
/// excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bsynth::cli
