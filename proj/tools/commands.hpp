#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fracheat::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 2, kNumerical = 3, kIo = 4 };

// args excludes the program name. Diagnostics go to err, progress to out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fracheat::cli
