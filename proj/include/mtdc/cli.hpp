#ifndef MTDC_CLI_HPP
#define MTDC_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace mtdc {

/// Command-line driver. `args` excludes the program name. Subcommands:
///   simulate <scenario> [--out traj.csv]
///   equilibrium <scenario> [--pm a,b,c]
///   certify <scenario>
///   bounds <scenario>
///   sweep <scenario> --param <name> --values a,b,c
///   plotdata <traj.csv> --figure {freq|gen|inj|volt}
/// Returns 0 on success (including violated verdicts), 1 on validation or
/// usage errors, 2 on numerical failures.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace mtdc

#endif  // MTDC_CLI_HPP
