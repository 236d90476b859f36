#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace svmboot::cli {

enum ExitCode : int { ok = 0, config_error = 2, numeric_error = 3, io_error = 4 };

/// Runs one command line (without the program name). Summaries go to `out`,
/// stage logs and the error JSON to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace svmboot::cli
