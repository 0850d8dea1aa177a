#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace falq::cli {

/// Entry point of the `falq` tool. args[0] is the program name. Returns the
/// process exit code: 0 on success, otherwise the ErrorCategory value
/// (IO=2, FORMAT=3, NUMERIC=4, PARAM=5).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace falq::cli
