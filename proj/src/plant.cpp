#include "safe_etc/plant.hpp"

#include <cmath>
#include <stdexcept>

namespace safe_etc {

PlantSpec inverted_pendulum(const Eigen::VectorXd& initial_state) {
  if (initial_state.size() != 2) {
    throw std::invalid_argument("pendulum: initial state must have two components");
  }
  PlantSpec plant;
  plant.initial_state = initial_state;
  plant.input_dim = 1;
  plant.dynamics = [](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    Eigen::VectorXd dx(2);
    dx[0] = x[1];
    dx[1] = std::sin(x[0]) - x[1] + u[0];
    return dx;
  };
  return plant;
}

EtmSpec EtmSpec::from_theta(const ThetaPoint& theta, double decay_rate) {
  if (theta.size() != 2) {
    throw std::invalid_argument("trigger: theta must be (eps0, eps_inf)");
  }
  return EtmSpec{theta[0], theta[1], decay_rate};
}

std::size_t SimulationSettings::steps() const {
  if (!(horizon > 0.0) || !(step > 0.0)) {
    throw std::invalid_argument("simulation: horizon and step must be positive");
  }
  const double ratio = horizon / step;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * rounded) {
    throw std::invalid_argument("simulation: horizon must be an integer multiple of step");
  }
  return static_cast<std::size_t>(rounded);
}

double epsilon_threshold(const EtmSpec& etm, double t) {
  return (etm.initial_threshold - etm.final_threshold) * std::exp(-etm.decay_rate * t) +
         etm.final_threshold;
}

bool trigger(const EtmSpec& etm, const Eigen::VectorXd& x_now, const Eigen::VectorXd& x_held,
             double t) {
  return (x_now - x_held).norm() - epsilon_threshold(etm, t) * x_now.norm() >= 0.0;
}

namespace {

Eigen::VectorXd rk4_step(const Dynamics& f, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                         double h) {
  const Eigen::VectorXd k1 = f(x, u);
  const Eigen::VectorXd k2 = f(x + 0.5 * h * k1, u);
  const Eigen::VectorXd k3 = f(x + 0.5 * h * k2, u);
  const Eigen::VectorXd k4 = f(x + h * k3, u);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

bool blown_up(const Eigen::VectorXd& x) {
  return !x.allFinite() || x.norm() > kDivergenceNorm;
}

}  // namespace

Trajectory run_episode(const PlantSpec& plant, const EtmSpec& etm, const ControllerSpec& ctrl,
                       const SimulationSettings& settings) {
  const std::size_t n_steps = settings.steps();
  const auto nx = static_cast<Eigen::Index>(plant.state_dim());
  const auto nu = static_cast<Eigen::Index>(plant.input_dim);
  if (ctrl.gain.rows() != nu || ctrl.gain.cols() != nx) {
    throw std::invalid_argument("episode: controller gain must be n_u x n_x");
  }
  if (!plant.dynamics) {
    throw std::invalid_argument("episode: plant has no dynamics");
  }

  const std::size_t samples = n_steps + 1;
  Trajectory traj;
  traj.times.reserve(samples);
  traj.events.reserve(samples);
  traj.states.resize(nx, static_cast<Eigen::Index>(samples));
  traj.inputs.resize(nu, static_cast<Eigen::Index>(samples));

  Eigen::VectorXd x = plant.initial_state;
  Eigen::VectorXd held = x;
  const double h = settings.step;

  for (std::size_t i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) * h;
    bool event = false;
    if (i == 0) {
      event = true;
    } else if (trigger(etm, x, held, t) && x != held) {
      event = true;
    }
    if (event) {
      held = x;
      traj.event_times.push_back(t);
    }
    const Eigen::VectorXd u = ctrl.gain * held;

    const auto col = static_cast<Eigen::Index>(i);
    traj.times.push_back(t);
    traj.states.col(col) = x;
    traj.inputs.col(col) = u;
    traj.events.push_back(event ? 1 : 0);

    if (i + 1 == samples) break;
    x = rk4_step(plant.dynamics, x, u, h);
    if (blown_up(x)) {
      traj.diverged = true;
      break;
    }
  }

  const auto kept = static_cast<Eigen::Index>(traj.times.size());
  if (kept != traj.states.cols()) {
    traj.states.conservativeResize(nx, kept);
    traj.inputs.conservativeResize(nu, kept);
  }
  return traj;
}

}  // namespace safe_etc
