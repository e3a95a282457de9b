#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mlcm::cli {

/// Runs one CLI command. argv excludes the program name. Reports go to out,
/// diagnostics to err. Exit codes: 0 success, 1 usage error, 2 malformed input
/// or violated precondition, 3 fit divergence (outputs still written).
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

} // namespace mlcm::cli
