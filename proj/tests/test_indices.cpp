#include <doctest.h>

#include <cmath>
#include <random>

#include "safe_etc/indices.hpp"

using namespace safe_etc;

namespace {

// A trajectory with the given states at times 0, dt, 2 dt, ...
Trajectory make_traj(const Eigen::MatrixXd& states, double dt) {
  Trajectory tr;
  tr.states = states;
  tr.inputs = Eigen::MatrixXd::Zero(1, states.cols());
  for (Eigen::Index i = 0; i < states.cols(); ++i) {
    tr.times.push_back(static_cast<double>(i) * dt);
    tr.events.push_back(i == 0);
  }
  tr.event_times = {0.0};
  return tr;
}

ConvergenceSpec default_convergence() { return ConvergenceSpec{Eigen::MatrixXd::Identity(2, 2), 2.0, 0.05, 1e-12}; }

}  // namespace

TEST_CASE("zero trajectory has nothing to bound") {
  const auto tr = make_traj(Eigen::MatrixXd::Zero(2, 101), 0.1);
  CHECK(convergence_index(tr, default_convergence()) == kPositiveSentinel);
  CHECK(safety_index(tr, SafetySpec{}) == 0.25);
}

TEST_CASE("constant state is limited by the envelope at the horizon") {
  const Eigen::MatrixXd states = Eigen::Vector2d(1, 0).replicate(1, 301);
  const auto tr = make_traj(states, 0.1);
  // min over t in (0, 30] of 2 exp(-0.05 t) / 1 - 1, reached at t = 30.
  CHECK(convergence_index(tr, default_convergence()) ==
        doctest::Approx(2.0 * std::exp(-1.5) - 1.0).epsilon(1e-12));
  CHECK(convergence_index(tr, default_convergence()) == doctest::Approx(-0.5537396).epsilon(1e-6));
}

TEST_CASE("initial sample is excluded from the convergence index") {
  Eigen::MatrixXd states = Eigen::MatrixXd::Zero(2, 11);
  states(0, 0) = 100.0;  // would give a hugely negative value at t = 0
  states(0, 5) = 0.1;
  const auto tr = make_traj(states, 1.0);
  CHECK(convergence_index(tr, default_convergence()) == doctest::Approx(2.0 * std::exp(-0.25) / 0.01 - 1.0));
}

TEST_CASE("safety index uses the peak of the monitored component") {
  Eigen::MatrixXd states = Eigen::MatrixXd::Zero(2, 50);
  for (Eigen::Index i = 0; i < 50; ++i) states(1, i) = 0.2 * std::sin(0.1 * static_cast<double>(i) + 0.3);
  states(1, 20) = -0.2;
  states(0, 20) = 5.0;  // irrelevant in component mode
  const auto tr = make_traj(states, 0.1);
  CHECK(safety_index(tr, SafetySpec{}) == doctest::Approx(0.05).epsilon(1e-14));

  SafetySpec norm{SafetySpec::Mode::norm_bound, 0, 10.0};
  CHECK(safety_index(tr, norm) == doctest::Approx(10.0 - std::hypot(5.0, 0.2)).epsilon(1e-14));
}

TEST_CASE("safety index includes the initial sample") {
  Eigen::MatrixXd states = Eigen::MatrixXd::Zero(2, 5);
  states(1, 0) = 0.3;
  CHECK(safety_index(make_traj(states, 0.1), SafetySpec{}) == doctest::Approx(-0.05));
}

TEST_CASE("diverged episodes map to the sentinels") {
  auto tr = make_traj(Eigen::MatrixXd::Zero(2, 3), 0.1);
  tr.diverged = true;
  CHECK(convergence_index(tr, default_convergence()) == kNegativeSentinel);
  CHECK(safety_index(tr, SafetySpec{}) == kNegativeSentinel);
}

TEST_CASE("index specs validate their parameters") {
  ConvergenceSpec c = default_convergence();
  c.weight(0, 1) = 5.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = default_convergence();
  c.weight(1, 1) = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK_THROWS_AS((SafetySpec{SafetySpec::Mode::norm_bound, 0, 0.0}).validate(), std::invalid_argument);
  SafetySpec s;
  s.component = 2;
  CHECK_THROWS_AS(safety_index(make_traj(Eigen::MatrixXd::Zero(2, 2), 0.1), s), std::invalid_argument);
}

TEST_CASE("safety index grows with the threshold; convergence index shrinks as the state grows") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 0.3);
  Eigen::MatrixXd states(2, 40);
  for (Eigen::Index i = 0; i < states.size(); ++i) states.data()[i] = n(rng);
  const auto tr = make_traj(states, 0.05);
  double prev = -1e300;
  for (double xi = 0.1; xi < 2.0; xi += 0.1) {
    const double s = safety_index(tr, SafetySpec{SafetySpec::Mode::component_abs_bound, 1, xi});
    CHECK(s > prev);
    prev = s;
  }
  prev = 1e300;
  for (double scale = 0.5; scale < 4.0; scale += 0.25) {
    const double g = convergence_index(make_traj(scale * states, 0.05), default_convergence());
    CHECK(g < prev);
    prev = g;
  }
}

TEST_CASE("observations are bounded and reproducible") {
  std::mt19937_64 rng(123);
  CHECK(observe(0.7, 0.0, rng) == 0.7);
  double lo = 1.0, hi = -1.0;
  for (int i = 0; i < 10000; ++i) {
    const double v = observe(0.0, 0.01, rng) ;
    CHECK(std::abs(v) <= 0.01);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo < -0.009);
  CHECK(hi > 0.009);
  std::mt19937_64 a(99), b(99);
  for (int i = 0; i < 100; ++i) CHECK(observe(1.0, 0.5, a) == observe(1.0, 0.5, b));
  CHECK_THROWS_AS(observe(0.0, -1.0, rng), std::invalid_argument);
}
