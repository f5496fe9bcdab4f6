#pragma once

// Convergence and safety indices of a closed-loop trajectory, and the bounded
// noise model used when they are reported as training outputs.

#include <cstddef>
#include <random>

#include <Eigen/Dense>

#include "safe_etc/plant.hpp"

namespace safe_etc {

/// Stand-ins for +/- infinity. Written verbatim to CSV.
inline constexpr double kPositiveSentinel = 1e18;
inline constexpr double kNegativeSentinel = -1e18;

/// g(x) = min_{t>0} eta(t) / (x^T Q x) - 1 with eta(t) = eta0 exp(-decay t).
struct ConvergenceSpec {
  Eigen::MatrixXd weight;  // Q
  double eta0 = 2.0;
  double decay = 0.05;
  double denominator_floor = 1e-12;

  void validate() const;
};

struct SafetySpec {
  enum class Mode { norm_bound, component_abs_bound };

  Mode mode = Mode::component_abs_bound;
  std::size_t component = 1;
  double threshold = 0.25;  // xi

  void validate() const;
};

/// Skips t = 0 and every sample with x^T Q x below the floor. Returns
/// kPositiveSentinel if nothing is left, kNegativeSentinel on divergence.
double convergence_index(const Trajectory& traj, const ConvergenceSpec& spec);

/// min over all samples (t = 0 included) of xi - ||x|| or xi - |x_c|.
/// Returns kNegativeSentinel on divergence.
double safety_index(const Trajectory& traj, const SafetySpec& spec);

/// value + U[-bound, bound]; exactly `value` when bound is zero.
double observe(double value, double bound, std::mt19937_64& rng);

}  // namespace safe_etc
