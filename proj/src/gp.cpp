#include "safe_etc/gp.hpp"

#include <cmath>
#include <sstream>

namespace safe_etc {

void KernelSpec::validate() const {
  if (lengthscales.size() == 0) {
    throw std::invalid_argument("kernel: lengthscales must be non-empty");
  }
  for (Eigen::Index i = 0; i < lengthscales.size(); ++i) {
    if (!(lengthscales[i] > 0.0) || !std::isfinite(lengthscales[i])) {
      throw std::invalid_argument("kernel: lengthscales must be positive and finite");
    }
  }
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
    throw std::invalid_argument("kernel: signal_variance must be positive and finite");
  }
}

double kernel_eval(const KernelSpec& spec, const ThetaPoint& a, const ThetaPoint& b) {
  if (a.size() != spec.lengthscales.size() || b.size() != spec.lengthscales.size()) {
    std::ostringstream msg;
    msg << "kernel: dimension mismatch (a=" << a.size() << ", b=" << b.size()
        << ", lengthscales=" << spec.lengthscales.size() << ")";
    throw std::invalid_argument(msg.str());
  }
  const double r2 = ((a - b).array() / spec.lengthscales.array()).square().sum();
  return spec.signal_variance * std::exp(-0.5 * r2);
}

GpModel GpModel::fit(const KernelSpec& kernel, const Dataset& data) {
  kernel.validate();
  if (data.empty()) {
    throw std::invalid_argument("gp fit: dataset is empty");
  }
  if (data.inputs.size() != data.outputs.size()) {
    throw std::invalid_argument("gp fit: inputs and outputs differ in length");
  }
  if (!(data.noise_bound >= 0.0)) {
    throw std::invalid_argument("gp fit: noise bound must be non-negative");
  }

  GpModel model;
  model.kernel_ = kernel;
  model.data_ = data;

  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    gram(a, a) = kernel_eval(kernel, data.inputs[a], data.inputs[a]);
    for (Eigen::Index b = 0; b < a; ++b) {
      const double k = kernel_eval(kernel, data.inputs[a], data.inputs[b]);
      gram(a, b) = k;
      gram(b, a) = k;
    }
  }

  const double noise_var = data.noise_bound * data.noise_bound;
  for (double jitter = kInitialJitter; jitter <= kMaxJitter * (1.0 + 1e-9); jitter *= 10.0) {
    Eigen::MatrixXd regularized = gram;
    regularized.diagonal().array() += noise_var + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(regularized);
    if (llt.info() == Eigen::Success) {
      model.lower_ = llt.matrixL();
      model.regularization_ = noise_var + jitter;
      const Eigen::Map<const Eigen::VectorXd> y(data.outputs.data(), n);
      model.alpha_ = llt.solve(y);
      // Nearly noise-free data leaves the Gram matrix badly conditioned;
      // a few refinement steps with an extended-precision residual recover
      // the weights to working precision.
      for (int step = 0; step < 3; ++step) {
        Eigen::VectorXd residual(n);
        for (Eigen::Index a = 0; a < n; ++a) {
          long double acc = static_cast<long double>(y[a]);
          for (Eigen::Index b = 0; b < n; ++b) {
            acc -= static_cast<long double>(regularized(a, b)) * static_cast<long double>(model.alpha_[b]);
          }
          residual[a] = static_cast<double>(acc);
        }
        model.alpha_ += llt.solve(residual);
      }
      return model;
    }
  }

  Eigen::MatrixXd regularized = gram;
  regularized.diagonal().array() += noise_var + kMaxJitter;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(regularized, Eigen::EigenvaluesOnly);
  std::ostringstream msg;
  msg << "gp fit: Cholesky failed up to jitter " << kMaxJitter << " (N=" << n
      << ", min eigenvalue=" << eig.eigenvalues().minCoeff()
      << ", max eigenvalue=" << eig.eigenvalues().maxCoeff() << ")";
  throw NumericalError(msg.str());
}

Eigen::VectorXd GpModel::cross_covariance(const ThetaPoint& theta) const {
  const auto n = static_cast<Eigen::Index>(data_.size());
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k[i] = kernel_eval(kernel_, theta, data_.inputs[i]);
  }
  return k;
}

Posterior GpModel::posterior(const ThetaPoint& theta) const {
  const Eigen::VectorXd k_star = cross_covariance(theta);
  const double prior = kernel_eval(kernel_, theta, theta);

  Posterior out;
  // The weights can be large with alternating signs; accumulate wide.
  long double mean = 0.0L;
  for (Eigen::Index i = 0; i < k_star.size(); ++i) {
    mean += static_cast<long double>(k_star[i]) * static_cast<long double>(alpha_[i]);
  }
  out.mean = static_cast<double>(mean);
  const Eigen::VectorXd v = lower_.triangularView<Eigen::Lower>().solve(k_star);
  double var = prior - v.squaredNorm();
  if (var < kVarianceFloor) var = 0.0;
  if (var > prior) var = prior;
  out.variance = var;
  return out;
}

Beta GpModel::beta(double rkhs_bound) const {
  if (!(rkhs_bound > 0.0)) {
    throw std::invalid_argument("beta: RKHS bound must be positive");
  }
  const auto n = static_cast<Eigen::Index>(data_.size());
  const Eigen::Map<const Eigen::VectorXd> y(data_.outputs.data(), n);

  Beta out;
  out.quadratic_form = y.dot(alpha_);
  double radicand = rkhs_bound * rkhs_bound - out.quadratic_form;
  if (radicand < 0.0) {
    out.clamped = true;
    radicand = 0.0;
  }
  out.value = std::sqrt(radicand + static_cast<double>(n));
  return out;
}

}  // namespace safe_etc
