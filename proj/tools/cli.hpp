#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace squeeze::cli {

/// Exit codes: 0 success, 2 usage/config error, 3 numerical-health error,
/// 4 resource error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace squeeze::cli
