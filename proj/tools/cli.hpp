#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace geowise::cli {

// Exit status: 0 success, 1 computation error, 2 usage or input error.
enum Exit : int { kOk = 0, kComputation = 1, kUsage = 2 };

// Runs one command line (without the program name). Results go to `out`
// unless an output path is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace geowise::cli
