#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ovsg::cli {

enum ExitCode : int { kSuccess = 0, kEmptyResult = 1, kUsageError = 2 };

/// Runs `ovsg <subcommand> ...`; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ovsg::cli
