/** \file    cli.hpp
    \brief   Command-line front end: classify, elements, orbit, verify and table subcommands
*/
#pragma once
#include <ostream>
#include <string>
#include <vector>

namespace isochrone::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kVerificationFailed = 1,
    kInvalidInput = 2,
    kNoBoundOrbit = 3
};

/// Runs one invocation; args excludes the program name. Output goes to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace isochrone::cli
