#pragma once

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

#include "nnkr/config.hpp"
#include "nnkr/experiments.hpp"

namespace nnkr::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kConfigError = 2,
    kInfeasible = 3,
    kPrecondition = 4,
    kNonConvergence = 5,
};

/// Maps a library exception onto the exit status taxonomy.
int exit_code_for(const std::exception& e);

/// Runs the command line `argv[0] <subcommand> ...`; diagnostics go to err,
/// reports printed to stdout go to out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

PhaseConfig phase_config_from(const Config& cfg);
NoiseConfig noise_config_from(const Config& cfg);
CovmatchConfig covmatch_config_from(const Config& cfg);

}  // namespace nnkr::cli
