#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace smq {

/// Runs one command line (args[0] is the program name). Failures print a
/// single `smq: error[<kind>]: <message>` line to `err` and return nonzero.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace smq
