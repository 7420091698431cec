#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace balloon {

/// Entry point of the balloonseg tool. `args` excludes the program name.
/// Returns 0 on success, 2 on invalid input, 1 on unexpected failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace balloon
