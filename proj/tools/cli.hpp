#ifndef HDIVMG_TOOLS_CLI_HPP
#define HDIVMG_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace hdivmg::cli
{

enum ExitCode : int
{
  ok = 0,
  usage_error = 1,
  not_converged = 2,
  runtime_error = 3
};

/// Runs the command line `args` (without the program name).
int
run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace hdivmg::cli

#endif
