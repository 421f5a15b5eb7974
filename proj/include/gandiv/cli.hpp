#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gandiv {

// Dispatches the full command surface. `args` excludes the program name.
// Returns 0 on success, 1 on usage errors, 2 on data/IO errors and 3 on
// numeric failures.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gandiv
