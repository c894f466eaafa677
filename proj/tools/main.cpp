#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pascalsim/scenario_io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"PASCAL uplink simulator: Monte Carlo and closed-form SER"};
  app.require_subcommand(1);

  int default_jobs = 1;
  if (const char* env = std::getenv("PASCALSIM_JOBS")) {
    try {
      default_jobs = std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      std::cerr << "warning: ignoring PASCALSIM_JOBS='" << env << "'\n";
    }
  }

  pascalsim::RunFlags flags;
  flags.jobs = default_jobs;
  std::string path;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "run a scenario file");
  run->add_option("scenario", path, "scenario file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "override the scenario seed");
  run->add_flag("--analytic-only", flags.analytic_only, "closed-form SER only");
  run->add_flag("--mc-only", flags.mc_only, "Monte Carlo only");
  run->add_option("--out", flags.out, "CSV destination ('-' for stdout)");
  run->add_option("--jobs", flags.jobs, "worker threads (default $PASCALSIM_JOBS or 1)")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (*seed_opt) flags.seed = seed;
  return pascalsim::run_scenario(path, flags, std::cerr);
}
