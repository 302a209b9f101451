#pragma once

#include "config.hpp"

#include <optional>
#include <string>

namespace apfv::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kSolverFailure = 2, kInvariantFailure = 3 };

struct RunOptions {
    std::string out_dir = ".";
    std::optional<long> seed;
    unsigned threads = 1;
};

/// Runs whatever [scenario] kind names and writes the report files.
/// Returns kOk or kInvariantFailure; solver and precondition errors propagate.
int run_scenario(const Config& cfg, const RunOptions& opt);

int run_stability_map(const Config& cfg, const RunOptions& opt);
int run_aniso_sweep(const Config& cfg, const RunOptions& opt);

}  // namespace apfv::cli
