// cli.hpp
// qwalk command line: simulate | winding | sweep | figure.
// Exit codes: 0 ok, 2 configuration error, 3 numerical boundary case,
// 4 convergence failure.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qwalk::cli {

enum ExitCode : int { ok = 0, config_error = 2, boundary = 3, no_convergence = 4 };

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qwalk::cli
