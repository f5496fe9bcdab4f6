#pragma once

// CSV persistence for run logs, grid sets and trajectories. Floats are written
// with 17 significant digits so a file read back reproduces the exact doubles.

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "safe_etc/explorer.hpp"

namespace safe_etc {

inline constexpr std::string_view kRunLogHeader =
    "j,theta1,theta2,y_g,y_s,beta_g,beta_s,size_theta_s,size_theta,acq_value";
inline constexpr std::string_view kGridSetsHeader = "theta1,theta2,in_theta_s,in_theta";
inline constexpr std::string_view kTrajectoryHeader = "t,x1,x2,u,event";

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_double(double value);
double parse_double(std::string_view text);

/// Header for a trajectory with the given dimensions; equals
/// kTrajectoryHeader for two states and one input.
std::string trajectory_header(std::size_t state_dim, std::size_t input_dim);

std::string run_log_csv(const std::vector<IterationRecord>& records);
std::string grid_sets_csv(const GridSets& sets);
std::string initial_samples_csv(const std::vector<Sample>& samples);
/// Every `decimation`-th sample, always including the final one.
std::string trajectory_csv(const Trajectory& traj, std::size_t decimation = 1);

std::vector<IterationRecord> parse_run_log(const std::string& text);

/// Rows of grid_sets.csv in file order.
struct GridRow {
  ThetaPoint theta;
  bool in_theta_s = false;
  bool in_theta = false;
};
std::vector<GridRow> parse_grid_sets(const std::string& text);

/// Comma-separated fields of each non-empty line after the header. Throws
/// IoError if the header differs from `expected_header`.
std::vector<std::vector<std::string>> parse_csv(const std::string& text, std::string_view expected_header);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace safe_etc
