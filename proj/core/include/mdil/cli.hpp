// cli.hpp
// Command-line front end: load matrices, sequences, or dilation specs,
// run decompositions, build dilations, simulate trajectories, and emit
// verification reports.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mdil::cli {

// Entry point shared by the binary and the tests.  `args` excludes the
// program name.  Returns 0 when the command succeeds and every check
// passes, 1 when a verification report contains a failing check, and 2 on
// bad input or any processing error (message written to `err`).
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace mdil::cli
