#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "presslab/measure.hpp"
#include "presslab/pressure.hpp"
#include "presslab/variational.hpp"

namespace presslab {

// Command-line overrides applied on top of the config file. They are folded
// into the canonical config text before hashing, so the provenance hash pins
// the numbers actually computed.
struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::vector<Coord>> windows;
  std::optional<double> omega;
  std::optional<Coord> collar;
};

struct ExperimentConfig {
  std::string name = "run";
  SystemPtr system;
  std::shared_ptr<const BlockCode> code;
  std::optional<Potential> potential;  // engaged after load; zero by default
  std::vector<double> omegas = {1.0};
  std::vector<Coord> collars = {0};
  std::vector<Coord> window_sides = {2, 4, 6, 8};
  OptimizeOptions optimizer;  // family, budget, seed
  std::uint64_t seed = 1;
  std::optional<Measure> measure;
  std::optional<CarpetSpec> carpet;
  std::vector<Potential> grid;                      // entropy-from-pressure grid
  std::optional<std::vector<std::string>> checks;   // verify; nullopt = full suite
  std::map<std::string, double> asserts;
  std::string out_dir = ".";
  Limits limits;
  std::string config_hash;

  const Potential& f() const { return *potential; }
  std::vector<BoxWindow> window_boxes() const;
};

// Known assertion keys (value/tolerance pairs evaluated by the runner against
// whatever the subcommand computed). Unknown keys are config errors.
bool is_known_assert_key(const std::string& key);

ExperimentConfig parse_config(const std::string& json_text, const CliOverrides& o = {});
ExperimentConfig load_config(const std::string& path, const CliOverrides& o = {});

}  // namespace presslab
