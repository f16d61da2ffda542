#pragma once

#include <string>
#include <vector>

#include "presslab/config.hpp"

namespace presslab {

// Executes one subcommand against a loaded config: computes, writes the JSON
// report (and CSV table where the result is tabular) into cfg.out_dir, prints
// a one-line summary per run, and returns the process exit code. Config and
// resource-cap problems are thrown (ConfigError, CapExceeded); a false
// assertion is data, reported in the files and reflected as exit code 1.
int run_subcommand(const std::string& subcommand, const ExperimentConfig& cfg);

const std::vector<std::string>& known_subcommands();

// Cross-module invariant checks run by `verify` when the config does not
// name its own list.
const std::vector<std::string>& default_verify_checks();

}  // namespace presslab
