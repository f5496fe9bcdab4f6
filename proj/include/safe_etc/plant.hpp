#pragma once

// Closed-loop episode simulation: continuous plant, sensor-side event trigger,
// and a linear feedback on the last transmitted state.

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "safe_etc/gp.hpp"

namespace safe_etc {

using Dynamics = std::function<Eigen::VectorXd(const Eigen::VectorXd& x, const Eigen::VectorXd& u)>;

struct PlantSpec {
  Dynamics dynamics;
  Eigen::VectorXd initial_state;
  std::size_t input_dim = 1;

  std::size_t state_dim() const { return static_cast<std::size_t>(initial_state.size()); }
};

/// x1' = x2, x2' = sin(x1) - x2 + u.
PlantSpec inverted_pendulum(const Eigen::VectorXd& initial_state);

/// Relative trigger with an exponentially relaxing threshold
///   eps(t) = (eps0 - eps_inf) exp(-decay_rate t) + eps_inf.
struct EtmSpec {
  double initial_threshold = 0.0;  // eps0
  double final_threshold = 0.0;    // eps_inf
  double decay_rate = 0.1;         // gamma

  /// theta = (eps0, eps_inf).
  static EtmSpec from_theta(const ThetaPoint& theta, double decay_rate);
};

struct ControllerSpec {
  Eigen::MatrixXd gain;  // n_u x n_x
};

struct SimulationSettings {
  double horizon = 30.0;
  double step = 1e-3;

  /// Number of integration steps; throws std::invalid_argument unless
  /// horizon/step is a positive integer (to within 1e-9 relative).
  std::size_t steps() const;
};

/// Norm or non-finite value beyond which an episode is declared diverged.
inline constexpr double kDivergenceNorm = 1e6;

struct Trajectory {
  std::vector<double> times;
  Eigen::MatrixXd states;  // n_x x samples
  Eigen::MatrixXd inputs;  // n_u x samples
  std::vector<char> events;
  std::vector<double> event_times;
  bool diverged = false;

  std::size_t samples() const { return times.size(); }
};

double epsilon_threshold(const EtmSpec& etm, double t);

/// True iff ||x_now - x_held|| - eps(t) ||x_now|| >= 0.
bool trigger(const EtmSpec& etm, const Eigen::VectorXd& x_now, const Eigen::VectorXd& x_held,
             double t);

/// Fixed-step RK4 over [0, horizon]. At every grid time the trigger is checked
/// first, then u = K x_held is applied and held over the step. t = 0 always
/// transmits. A trigger that would retransmit an unchanged state is not
/// counted as an event.
Trajectory run_episode(const PlantSpec& plant, const EtmSpec& etm, const ControllerSpec& ctrl,
                       const SimulationSettings& settings);

}  // namespace safe_etc
