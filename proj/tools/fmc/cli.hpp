#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fm::cli {

enum ExitCode : int {
  kOk = 0,
  kDiagnostics = 1,
  kUsage = 2,
  kConstraintViolation = 3,
  kTickLimit = 4,
};

struct Terminal {
  bool color = false;  // decorate verdicts with ANSI colors
};

// Runs one fmc invocation; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        Terminal terminal = {});

}  // namespace fm::cli
