#pragma once

// Exact Gaussian-process regression over the trigger-parameter space, plus the
// RKHS confidence width used to turn a posterior into a certified lower bound.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace safe_etc {

/// A point in the trigger-parameter space (here: initial and steady-state
/// thresholds of the event trigger).
using ThetaPoint = Eigen::VectorXd;

/// Squared-exponential kernel with one lengthscale per input dimension.
struct KernelSpec {
  Eigen::VectorXd lengthscales;
  double signal_variance = 1.0;

  /// Throws std::invalid_argument on non-positive hyperparameters.
  void validate() const;
};

/// k(a, b) = signal_variance * exp(-0.5 * sum_i ((a_i - b_i) / l_i)^2).
/// Throws std::invalid_argument if the dimensions of a, b and the
/// lengthscales disagree.
double kernel_eval(const KernelSpec& spec, const ThetaPoint& a, const ThetaPoint& b);

/// Training pairs for one of the two indices, with the bound on the additive
/// observation noise (|noise| <= noise_bound).
struct Dataset {
  std::vector<ThetaPoint> inputs;
  std::vector<double> outputs;
  double noise_bound = 0.0;

  std::size_t size() const { return outputs.size(); }
  bool empty() const { return outputs.empty(); }
  void add(const ThetaPoint& theta, double y) {
    inputs.push_back(theta);
    outputs.push_back(y);
  }
};

/// Raised when the regularized Gram matrix stays indefinite after the jitter
/// schedule is exhausted.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Posterior {
  double mean = 0.0;
  double variance = 0.0;
};

/// Confidence width together with the quantities it was computed from.
/// `clamped` is set when B^2 - Y^T K^-1 Y came out negative, i.e. the assumed
/// RKHS bound is smaller than the norm the data already requires.
struct Beta {
  double value = 0.0;
  double quadratic_form = 0.0;
  bool clamped = false;
};

/// Jitter added on top of noise_bound^2 to the diagonal. Escalated by 10x per
/// failed factorization up to kMaxJitter.
inline constexpr double kInitialJitter = 1e-10;
inline constexpr double kMaxJitter = 1e-6;
/// Posterior variances below this are treated as exactly zero.
inline constexpr double kVarianceFloor = 1e-12;

class GpModel {
 public:
  /// Factorizes K + (noise_bound^2 + jitter) I once. Throws
  /// std::invalid_argument for empty or malformed data and NumericalError if
  /// no jitter level yields a positive-definite matrix.
  static GpModel fit(const KernelSpec& kernel, const Dataset& data);

  Posterior posterior(const ThetaPoint& theta) const;

  /// sqrt(max(0, B^2 - Y^T (K + reg I)^-1 Y) + N).
  Beta beta(double rkhs_bound) const;

  const KernelSpec& kernel() const { return kernel_; }
  const Dataset& data() const { return data_; }
  std::size_t size() const { return data_.size(); }

  /// Total diagonal term actually added: noise_bound^2 + jitter.
  double regularization() const { return regularization_; }
  const Eigen::MatrixXd& cholesky_factor() const { return lower_; }
  const Eigen::VectorXd& weights() const { return alpha_; }

 private:
  GpModel() = default;

  Eigen::VectorXd cross_covariance(const ThetaPoint& theta) const;

  KernelSpec kernel_;
  Dataset data_;
  Eigen::MatrixXd lower_;  // L with L L^T = K + reg I
  Eigen::VectorXd alpha_;  // (K + reg I)^-1 Y
  double regularization_ = 0.0;
};

}  // namespace safe_etc
