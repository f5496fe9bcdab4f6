#pragma once

// The four subcommands of the etc_explore tool, callable in-process.
//
// Exit codes: 0 success; 1 config, I/O or numerical error; 2 a safety
// observation <= 0 during exploration; 3 verification found offenders.

#include <cstddef>
#include <filesystem>
#include <iosfwd>

#include "safe_etc/config.hpp"

namespace safe_etc {

enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitSafetyViolation = 2,
  kExitVerifyFailed = 3,
};

struct RunOptions {
  std::filesystem::path config;
  std::filesystem::path out;
  ConfigOverrides overrides;
  unsigned threads = 1;
  /// Row stride for the per-episode trajectory dumps written by explore.
  std::size_t decimation = 10;
};

/// Writes config.json, run_log.csv, grid_sets.csv, initial_samples.csv,
/// trajectories/episode_NNNN.csv and run_meta.json into options.out.
int run_explore(const RunOptions& options, std::ostream& log, std::ostream& err);

/// Writes baseline_log.csv and baseline_meta.json into options.out.
int run_baseline(const RunOptions& options, std::ostream& log, std::ostream& err);

/// Noise-free re-simulation of every grid point flagged in_theta. Writes
/// verify_report.csv.
int run_verify(const std::filesystem::path& run_dir, unsigned threads, std::ostream& log, std::ostream& err);

/// Writes plotdata/fig2_parameter_space.csv, plotdata/fig3_trajectories.csv
/// (`samples` episodes at points drawn uniformly from cells of the certified
/// set) and plotdata/fig4_safety_series.csv.
int run_plotdata(const std::filesystem::path& run_dir, std::size_t samples, std::size_t decimation,
                 std::ostream& log, std::ostream& err);

/// Draws `count` points: a uniformly chosen flagged grid point, then a
/// uniform point inside its cell.
std::vector<ThetaPoint> sample_certified_cells(const GridSets& sets, std::size_t count,
                                               std::mt19937_64& rng);

/// ETC_EXPLORE_THREADS if set to a positive integer, else 1.
unsigned threads_from_env();

}  // namespace safe_etc
