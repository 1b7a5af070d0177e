#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace zsc::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kScorerUnreachable = 3,
  kRunIncomplete = 4,
};

// Runs one command line (without the program name). `in` feeds
// `predict --dataset -`.
int run(std::vector<std::string> args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace zsc::cli
