// etc_explore: safe active exploration of event-trigger parameters.
//
//   etc_explore explore  --config configs/pendulum.json --out runs/a [--seed N]
//   etc_explore baseline --config configs/pendulum.json --out runs/a
//   etc_explore verify   runs/a
//   etc_explore plotdata runs/a

#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "safe_etc/commands.hpp"

namespace {

struct RunFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> grid_res;
  std::optional<double> horizon;
  std::optional<double> dt;
  std::size_t decimation = 10;
};

void add_run_flags(CLI::App* cmd, RunFlags& flags) {
  cmd->add_option("--config", flags.config, "JSON run configuration")->required();
  cmd->add_option("--out", flags.out, "Output directory")->required();
  cmd->add_option("--seed", flags.seed, "Override the configured seed");
  cmd->add_option("--grid-res", flags.grid_res, "Grid points per parameter axis")->check(CLI::PositiveNumber);
  cmd->add_option("--horizon", flags.horizon, "Episode length in seconds")->check(CLI::PositiveNumber);
  cmd->add_option("--dt", flags.dt, "Integration step in seconds")->check(CLI::PositiveNumber);
}

safe_etc::RunOptions to_options(const RunFlags& flags) {
  safe_etc::RunOptions opts;
  opts.config = flags.config;
  opts.out = flags.out;
  opts.overrides.seed = flags.seed;
  opts.overrides.grid_resolution = flags.grid_res;
  opts.overrides.horizon = flags.horizon;
  opts.overrides.step = flags.dt;
  opts.threads = safe_etc::threads_from_env();
  opts.decimation = flags.decimation;
  return opts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safe active exploration of event-triggered control parameters"};
  app.require_subcommand(1);

  RunFlags explore_flags;
  auto* explore = app.add_subcommand("explore", "Run the safe exploration and write the output bundle");
  add_run_flags(explore, explore_flags);
  explore->add_option("--decimate", explore_flags.decimation, "Row stride of trajectory dumps")
      ->check(CLI::PositiveNumber);

  RunFlags baseline_flags;
  auto* baseline = app.add_subcommand("baseline", "Uniform random search over the parameter space");
  add_run_flags(baseline, baseline_flags);

  std::string verify_dir;
  auto* verify = app.add_subcommand("verify", "Re-simulate every certified grid point without noise");
  verify->add_option("run_dir", verify_dir, "Directory written by explore")->required();

  std::string plot_dir;
  std::size_t plot_samples = 100;
  std::size_t plot_decimation = 10;
  auto* plot = app.add_subcommand("plotdata", "Emit columnar data for parameter-space and trajectory plots");
  plot->add_option("run_dir", plot_dir, "Directory written by explore")->required();
  plot->add_option("--samples", plot_samples, "Trajectories sampled from the certified set");
  plot->add_option("--decimate", plot_decimation, "Row stride of trajectory rows")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : safe_etc::kExitError;
  }

  if (*explore) return safe_etc::run_explore(to_options(explore_flags), std::cout, std::cerr);
  if (*baseline) return safe_etc::run_baseline(to_options(baseline_flags), std::cout, std::cerr);
  if (*verify) return safe_etc::run_verify(verify_dir, safe_etc::threads_from_env(), std::cout, std::cerr);
  if (*plot) return safe_etc::run_plotdata(plot_dir, plot_samples, plot_decimation, std::cout, std::cerr);
  return safe_etc::kExitError;
}
