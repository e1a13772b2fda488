#pragma once

#include <string>
#include <vector>

#include "fplap/error.hpp"

namespace fplap {

/// Exit codes of run().
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNotConverged = 2, kExitInternal = 3 };

int exit_code_for(ErrorCode code);

/// Command-line entry point: fplap <eigen|constants|fiber|solve|monotone|sweep|verify> [--key value ...].
/// Writes reports into --out; diagnostics go to standard error.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace fplap
