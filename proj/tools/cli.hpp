#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pwsurv::cli {

/// Runs the pwsurv command line with `args` (program name excluded).
/// Returns the process exit status; failures print a single line
/// "error: <kind>: <message>" to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pwsurv::cli
