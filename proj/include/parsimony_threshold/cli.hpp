#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace parsimony_threshold {

// Subcommands: simulate, exact-ra, fixed-point, branching, percolation,
// sweep, oracle-check. `args` excludes the program name. Returns 0 on
// success, 1 on usage or validation errors, 2 on resource limits.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace parsimony_threshold
