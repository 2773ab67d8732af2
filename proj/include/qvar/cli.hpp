#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qvar {

/// Exit codes of the command-line front end.
enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitVerdict = 2,
    kExitNonConvergence = 3,
    kExitConfig = 4,
};

/// Runs `qvar <subcommand> ...`; args[0] is the program name. Subcommands:
/// solve, regpath, perturb, refine, robust, trace, certify, oracle-check.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qvar
