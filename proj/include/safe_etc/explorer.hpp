#pragma once

// Safe active exploration of the trigger-parameter space.
//
// Two GPs model the convergence and safety indices as functions of theta.
// Every iteration certifies grid points whose lower confidence bounds are
// positive, unions them into the accumulated safe set and the accumulated
// parameter set, then samples the point of the safe set with the largest
// summed posterior variance.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "safe_etc/gp.hpp"
#include "safe_etc/indices.hpp"
#include "safe_etc/plant.hpp"

namespace safe_etc {

/// Axis-aligned box [lower, upper].
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  std::size_t dim() const { return static_cast<std::size_t>(lower.size()); }
  bool contains(const ThetaPoint& theta, double tol = 1e-12) const;
  bool contains(const Box& other) const;
  /// Independent uniform draw per dimension.
  ThetaPoint sample(std::mt19937_64& rng) const;
  void validate(const char* what) const;
};

/// Uniform lattice over a box including both end points of every axis.
/// Points are ordered lexicographically: the first coordinate varies slowest.
class Grid {
 public:
  Grid() = default;
  Grid(Box domain, std::vector<std::size_t> resolution);

  std::size_t size() const { return points_.size(); }
  const ThetaPoint& point(std::size_t index) const { return points_[index]; }
  const std::vector<ThetaPoint>& points() const { return points_; }
  const Box& domain() const { return domain_; }
  const std::vector<std::size_t>& resolution() const { return resolution_; }
  /// Per-axis lattice spacing.
  Eigen::VectorXd spacing() const;
  /// The box of half-spacing radius around a point, clipped to the domain.
  Box cell(std::size_t index) const;

 private:
  Box domain_;
  std::vector<std::size_t> resolution_;
  std::vector<ThetaPoint> points_;
};

/// Accumulated membership flags over the grid.
struct GridSets {
  Grid grid;
  std::vector<char> in_theta_s;
  std::vector<char> in_theta;

  explicit GridSets(Grid g)
      : grid(std::move(g)), in_theta_s(grid.size(), 0), in_theta(grid.size(), 0) {}

  std::size_t count_theta_s() const;
  std::size_t count_theta() const;
};

struct GpSettings {
  KernelSpec kernel;
  double rkhs_bound = 1.0;
  double noise_bound = 0.01;
};

struct RunConfig {
  Box parameter_space;
  std::vector<std::size_t> grid_resolution;
  Box initial_region;
  std::size_t n_init = 10;
  std::size_t n_exp = 100;
  GpSettings convergence_gp;
  GpSettings safety_gp;
  PlantSpec plant;
  ControllerSpec controller;
  double trigger_decay = 0.1;
  ConvergenceSpec convergence;
  SafetySpec safety;
  SimulationSettings simulation;
  std::uint64_t seed = 0;
  /// Worker threads for grid evaluation; 0 means one per hardware thread.
  unsigned threads = 1;

  void validate() const;
  Grid make_grid() const { return Grid(parameter_space, grid_resolution); }
};

/// Raised when an initial-phase sample from the supposedly safe region has a
/// non-positive safety observation.
class AssumptionViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Sample {
  ThetaPoint theta;
  double y_g = 0.0;
  double y_s = 0.0;
};

struct IterationRecord {
  std::size_t j = 0;
  ThetaPoint theta;
  double y_g = 0.0;
  double y_s = 0.0;
  double beta_g = 0.0;
  double beta_s = 0.0;
  std::size_t size_theta_s = 0;
  std::size_t size_theta = 0;
  double acq_value = 0.0;
};

/// Noise-free indices of one episode at theta.
struct EpisodeIndices {
  double convergence = 0.0;
  double safety = 0.0;
  bool diverged = false;
};

EpisodeIndices evaluate_theta(const RunConfig& cfg, const ThetaPoint& theta);
Trajectory simulate_theta(const RunConfig& cfg, const ThetaPoint& theta);

/// Independent generator streams derived from the single run seed.
enum class RngStream : std::uint64_t {
  initial_draws = 1,
  observation_noise = 2,
  baseline_draws = 3,
  plot_sampling = 4,
};
std::mt19937_64 make_rng(std::uint64_t seed, RngStream stream);

struct InitialData {
  Dataset convergence;
  Dataset safety;
  std::vector<Sample> samples;
};

/// N_init episodes at uniform draws from the initial region. Throws
/// AssumptionViolation if any safety observation is <= 0.
InitialData initial_phase(const RunConfig& cfg, std::mt19937_64& theta_rng,
                          std::mt19937_64& noise_rng);

/// mu - beta * sigma. Membership tests use a strict `> 0`.
inline double lower_confidence_bound(const Posterior& post, double beta) {
  return post.mean - beta * std::sqrt(post.variance);
}

/// Per-iteration certified sets.
struct SetDelta {
  std::vector<char> safe;       // mu_s - beta_s sigma_s > 0
  std::vector<char> certified;  // both lower bounds > 0
  Beta beta_g;
  Beta beta_s;
};

SetDelta compute_sets(const GpModel& gp_g, const GpModel& gp_s, double rkhs_bound_g,
                      double rkhs_bound_s, const Grid& grid, unsigned threads = 1);

struct Acquisition {
  std::size_t index = 0;
  double value = 0.0;
};

/// argmax over flagged grid points of sigma_g^2 + sigma_s^2; ties go to the
/// lowest grid index. Throws std::logic_error when no point is flagged.
Acquisition acquire(const GpModel& gp_g, const GpModel& gp_s, const Grid& grid,
                    const std::vector<char>& candidates, unsigned threads = 1);

struct ExplorationResult {
  GridSets sets;
  std::vector<Sample> initial_samples;
  std::vector<IterationRecord> records;
  std::vector<std::string> warnings;
  /// False if any exploration-phase safety observation was <= 0.
  bool compliant = true;
};

/// Called after each iteration's record is complete; `sets` reflects the
/// union performed in that iteration.
using IterationObserver = std::function<void(const IterationRecord&, const GridSets& sets)>;

ExplorationResult explore(const RunConfig& cfg, const IterationObserver& observer = {});

/// N_exp episodes at uniform draws over the whole parameter space, with no
/// model and no safety restriction. GP-related record fields are NaN / 0.
std::vector<IterationRecord> random_search_baseline(const RunConfig& cfg);

/// Runs fn(i) for i in [0, n) over up to `threads` workers. Each index is
/// handled by exactly one worker.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace safe_etc
