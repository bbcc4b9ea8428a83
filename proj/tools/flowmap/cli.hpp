#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace flowmap::cli {

/// Runs one `flowmap` invocation. `args` excludes the program name. Returns
/// the process exit code: 0 on success, 1 on runtime errors, 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace flowmap::cli
