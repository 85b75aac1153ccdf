#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vessel {

/// Exit codes of the command-line front end.
enum ExitCode : int {
    kExitOk = 0,
    kExitPatchFailures = 1,  // run finished but some patches failed
    kExitUsage = 2,          // invalid arguments or configuration
    kExitIo = 3,
};

/// Entry point of the `vessel-units` tool: subcommands run, kernel, serve,
/// synth. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vessel
