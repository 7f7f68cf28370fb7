#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dclr {

/// Parses argv (without the program name) and runs one subcommand.
/// Returns 0 on success, 1 on usage errors (usage text goes to err),
/// 2 on data or runtime errors.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dclr
