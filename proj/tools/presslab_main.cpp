#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "presslab/config.hpp"
#include "presslab/errors.hpp"
#include "presslab/runner.hpp"

namespace {

const char* describe(const std::string& sub) {
  if (sub == "pressure") return "windowed weighted-pressure estimates over the cube schedule";
  if (sub == "entropy") return "entropy rates: weighted topological, measure pushforward, or recovery from the pressure functional";
  if (sub == "optimize") return "maximize the weighted variational objective over the measure family";
  if (sub == "sandwich") return "two-sided enclosure: certified upper bound vs family lower bound";
  if (sub == "properties") return "finite-window inequality suite for the pressure functional";
  if (sub == "equilibrium") return "diagnose a configured measure as an equilibrium candidate";
  if (sub == "carpet") return "self-affine carpet dimension via the weighted entropy route";
  return "cross-module invariant checks (machine-readable pass/fail)";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weighted-pressure laboratory for Z^d shifts of finite type"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::vector<std::int64_t> windows;
  double omega = 0.0;
  std::int64_t collar = 0;

  for (const std::string& name : presslab::known_subcommands()) {
    CLI::App* sub = app.add_subcommand(name, describe(name));
    CLI::Option* cfg_opt = sub->add_option("--config", config_path, "JSON experiment config");
    if (name != "verify") cfg_opt->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", out_dir, "output directory for reports");
    sub->add_option("--windows", windows, "override window sides, e.g. 4,6,8")->delimiter(',');
    sub->add_option("--omega", omega, "override the omega list with a single value");
    sub->add_option("--collar", collar, "override the collar list with a single value");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // app.exit prints help or the parse error; fold CLI11's own exit codes
    // into the config-error code so callers see only the documented set.
    int code = app.exit(e);
    return code == 0 ? 0 : presslab::kExitConfigError;
  }
  CLI::App* sub = app.get_subcommands().front();

  presslab::CliOverrides o;
  if (sub->count("--seed")) o.seed = seed;
  if (sub->count("--out")) o.out_dir = out_dir;
  if (sub->count("--omega")) o.omega = omega;
  if (sub->count("--collar")) o.collar = collar;
  if (sub->count("--windows"))
    o.windows = std::vector<presslab::Coord>(windows.begin(), windows.end());

  try {
    presslab::ExperimentConfig cfg = config_path.empty()
                                         ? presslab::parse_config("{}", o)
                                         : presslab::load_config(config_path, o);
    return presslab::run_subcommand(sub->get_name(), cfg);
  } catch (const presslab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return presslab::kExitConfigError;
  } catch (const presslab::CapExceeded& e) {
    std::cerr << "resource cap exceeded: " << e.what() << "\n";
    return presslab::kExitCapExceeded;
  } catch (const presslab::DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return presslab::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return presslab::kExitConfigError;
  }
}
