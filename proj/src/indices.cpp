#include "safe_etc/indices.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace safe_etc {

void ConvergenceSpec::validate() const {
  if (weight.rows() == 0 || weight.rows() != weight.cols()) {
    throw std::invalid_argument("convergence: Q must be a non-empty square matrix");
  }
  if (!weight.isApprox(weight.transpose())) {
    throw std::invalid_argument("convergence: Q must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(weight);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("convergence: Q must be positive definite");
  }
  if (!(eta0 > 0.0) || !(decay > 0.0) || !(denominator_floor > 0.0)) {
    throw std::invalid_argument("convergence: eta0, decay and floor must be positive");
  }
}

void SafetySpec::validate() const {
  if (!(threshold > 0.0)) {
    throw std::invalid_argument("safety: threshold must be positive");
  }
}

double convergence_index(const Trajectory& traj, const ConvergenceSpec& spec) {
  if (traj.diverged) return kNegativeSentinel;
  if (traj.states.rows() != spec.weight.rows()) {
    throw std::invalid_argument("convergence: Q does not match the state dimension");
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < traj.samples(); ++i) {
    const auto x = traj.states.col(static_cast<Eigen::Index>(i));
    const double energy = x.dot(spec.weight * x);
    if (energy < spec.denominator_floor) continue;
    const double envelope = spec.eta0 * std::exp(-spec.decay * traj.times[i]);
    best = std::min(best, envelope / energy - 1.0);
  }
  return std::isinf(best) ? kPositiveSentinel : best;
}

double safety_index(const Trajectory& traj, const SafetySpec& spec) {
  if (traj.diverged) return kNegativeSentinel;
  const bool by_component = spec.mode == SafetySpec::Mode::component_abs_bound;
  if (by_component && static_cast<Eigen::Index>(spec.component) >= traj.states.rows()) {
    throw std::invalid_argument("safety: component index out of range");
  }
  double worst = 0.0;
  for (Eigen::Index i = 0; i < traj.states.cols(); ++i) {
    const double size = by_component ? std::abs(traj.states(static_cast<Eigen::Index>(spec.component), i))
                                     : traj.states.col(i).norm();
    worst = std::max(worst, size);
  }
  return spec.threshold - worst;
}

double observe(double value, double bound, std::mt19937_64& rng) {
  if (!(bound >= 0.0)) {
    throw std::invalid_argument("observe: noise bound must be non-negative");
  }
  if (bound == 0.0) return value;
  std::uniform_real_distribution<double> noise(-bound, bound);
  return value + noise(rng);
}

}  // namespace safe_etc
