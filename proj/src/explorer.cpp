#include "safe_etc/explorer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace safe_etc {

bool Box::contains(const ThetaPoint& theta, double tol) const {
  if (theta.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (theta[i] < lower[i] - tol || theta[i] > upper[i] + tol) return false;
  }
  return true;
}

bool Box::contains(const Box& other) const {
  return contains(other.lower) && contains(other.upper);
}

ThetaPoint Box::sample(std::mt19937_64& rng) const {
  ThetaPoint theta(lower.size());
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    std::uniform_real_distribution<double> axis(lower[i], upper[i]);
    theta[i] = axis(rng);
  }
  return theta;
}

void Box::validate(const char* what) const {
  if (lower.size() == 0 || lower.size() != upper.size()) {
    throw std::invalid_argument(std::string(what) + ": bounds must be non-empty and equal length");
  }
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || lower[i] > upper[i]) {
      throw std::invalid_argument(std::string(what) + ": need finite lower <= upper");
    }
  }
}

Grid::Grid(Box domain, std::vector<std::size_t> resolution)
    : domain_(std::move(domain)), resolution_(std::move(resolution)) {
  domain_.validate("grid");
  if (resolution_.size() != domain_.dim()) {
    throw std::invalid_argument("grid: one resolution per dimension required");
  }
  std::size_t total = 1;
  for (std::size_t r : resolution_) {
    if (r == 0) throw std::invalid_argument("grid: resolution must be >= 1");
    total *= r;
  }
  const std::size_t dim = domain_.dim();
  points_.reserve(total);
  std::vector<std::size_t> counter(dim, 0);
  for (std::size_t n = 0; n < total; ++n) {
    ThetaPoint p(static_cast<Eigen::Index>(dim));
    for (std::size_t d = 0; d < dim; ++d) {
      const auto e = static_cast<Eigen::Index>(d);
      const double frac = resolution_[d] == 1
                              ? 0.0
                              : static_cast<double>(counter[d]) / static_cast<double>(resolution_[d] - 1);
      p[e] = domain_.lower[e] + frac * (domain_.upper[e] - domain_.lower[e]);
    }
    points_.push_back(std::move(p));
    for (std::size_t d = dim; d-- > 0;) {
      if (++counter[d] < resolution_[d]) break;
      counter[d] = 0;
    }
  }
}

Eigen::VectorXd Grid::spacing() const {
  Eigen::VectorXd h(static_cast<Eigen::Index>(resolution_.size()));
  for (std::size_t d = 0; d < resolution_.size(); ++d) {
    const auto e = static_cast<Eigen::Index>(d);
    h[e] = resolution_[d] > 1 ? (domain_.upper[e] - domain_.lower[e]) /
                                    static_cast<double>(resolution_[d] - 1)
                              : 0.0;
  }
  return h;
}

Box Grid::cell(std::size_t index) const {
  const Eigen::VectorXd half = 0.5 * spacing();
  const ThetaPoint& p = points_.at(index);
  Box box{(p - half).cwiseMax(domain_.lower), (p + half).cwiseMin(domain_.upper)};
  return box;
}

std::size_t GridSets::count_theta_s() const {
  return static_cast<std::size_t>(std::count(in_theta_s.begin(), in_theta_s.end(), 1));
}

std::size_t GridSets::count_theta() const {
  return static_cast<std::size_t>(std::count(in_theta.begin(), in_theta.end(), 1));
}

void RunConfig::validate() const {
  parameter_space.validate("parameter_space");
  initial_region.validate("initial_region");
  if (initial_region.dim() != parameter_space.dim()) {
    throw std::invalid_argument("initial_region: dimension differs from parameter_space");
  }
  if (!parameter_space.contains(initial_region)) {
    throw std::invalid_argument("initial_region must lie inside parameter_space");
  }
  if (grid_resolution.size() != parameter_space.dim()) {
    throw std::invalid_argument("grid_resolution: one entry per parameter dimension required");
  }
  if (n_init < 1) throw std::invalid_argument("n_init must be >= 1");
  convergence_gp.kernel.validate();
  safety_gp.kernel.validate();
  if (static_cast<std::size_t>(convergence_gp.kernel.lengthscales.size()) != parameter_space.dim() ||
      static_cast<std::size_t>(safety_gp.kernel.lengthscales.size()) != parameter_space.dim()) {
    throw std::invalid_argument("kernel lengthscales must match the parameter dimension");
  }
  if (!(convergence_gp.rkhs_bound > 0.0) || !(safety_gp.rkhs_bound > 0.0)) {
    throw std::invalid_argument("rkhs_bound must be positive");
  }
  if (!(convergence_gp.noise_bound >= 0.0) || !(safety_gp.noise_bound >= 0.0)) {
    throw std::invalid_argument("noise_bound must be non-negative");
  }
  if (!plant.dynamics || plant.state_dim() == 0) throw std::invalid_argument("plant is not set");
  if (controller.gain.rows() != static_cast<Eigen::Index>(plant.input_dim) ||
      controller.gain.cols() != static_cast<Eigen::Index>(plant.state_dim())) {
    throw std::invalid_argument("controller gain must be n_u x n_x");
  }
  if (!(trigger_decay > 0.0)) throw std::invalid_argument("trigger decay rate must be positive");
  convergence.validate();
  if (convergence.weight.rows() != static_cast<Eigen::Index>(plant.state_dim())) {
    throw std::invalid_argument("convergence weight must be n_x x n_x");
  }
  safety.validate();
  if (safety.mode == SafetySpec::Mode::component_abs_bound && safety.component >= plant.state_dim()) {
    throw std::invalid_argument("safety component out of range");
  }
  (void)simulation.steps();
}

Trajectory simulate_theta(const RunConfig& cfg, const ThetaPoint& theta) {
  return run_episode(cfg.plant, EtmSpec::from_theta(theta, cfg.trigger_decay), cfg.controller,
                     cfg.simulation);
}

EpisodeIndices evaluate_theta(const RunConfig& cfg, const ThetaPoint& theta) {
  const Trajectory traj = simulate_theta(cfg, theta);
  return {convergence_index(traj, cfg.convergence), safety_index(traj, cfg.safety), traj.diverged};
}

std::mt19937_64 make_rng(std::uint64_t seed, RngStream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

InitialData initial_phase(const RunConfig& cfg, std::mt19937_64& theta_rng,
                          std::mt19937_64& noise_rng) {
  InitialData out;
  out.convergence.noise_bound = cfg.convergence_gp.noise_bound;
  out.safety.noise_bound = cfg.safety_gp.noise_bound;
  for (std::size_t i = 0; i < cfg.n_init; ++i) {
    const ThetaPoint theta = cfg.initial_region.sample(theta_rng);
    const EpisodeIndices truth = evaluate_theta(cfg, theta);
    const double y_g = observe(truth.convergence, cfg.convergence_gp.noise_bound, noise_rng);
    const double y_s = observe(truth.safety, cfg.safety_gp.noise_bound, noise_rng);
    if (!(y_s > 0.0)) {
      std::ostringstream msg;
      msg << "initial region is not safe: sample " << i + 1 << " at theta=(" << theta.transpose()
          << ") has safety observation " << y_s << " <= 0";
      throw AssumptionViolation(msg.str());
    }
    out.convergence.add(theta, y_g);
    out.safety.add(theta, y_s);
    out.samples.push_back({theta, y_g, y_s});
  }
  return out;
}

SetDelta compute_sets(const GpModel& gp_g, const GpModel& gp_s, double rkhs_bound_g,
                      double rkhs_bound_s, const Grid& grid, unsigned threads) {
  SetDelta delta;
  delta.beta_g = gp_g.beta(rkhs_bound_g);
  delta.beta_s = gp_s.beta(rkhs_bound_s);
  delta.safe.assign(grid.size(), 0);
  delta.certified.assign(grid.size(), 0);
  const double bg = delta.beta_g.value;
  const double bs = delta.beta_s.value;
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    const Posterior ps = gp_s.posterior(grid.point(i));
    if (!(lower_confidence_bound(ps, bs) > 0.0)) return;
    delta.safe[i] = 1;
    const Posterior pg = gp_g.posterior(grid.point(i));
    if (lower_confidence_bound(pg, bg) > 0.0) delta.certified[i] = 1;
  });
  return delta;
}

Acquisition acquire(const GpModel& gp_g, const GpModel& gp_s, const Grid& grid,
                    const std::vector<char>& candidates, unsigned threads) {
  if (candidates.size() != grid.size()) {
    throw std::invalid_argument("acquire: candidate flags do not match the grid");
  }
  std::vector<double> score(grid.size(), -std::numeric_limits<double>::infinity());
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    if (!candidates[i]) return;
    score[i] = gp_g.posterior(grid.point(i)).variance + gp_s.posterior(grid.point(i)).variance;
  });
  // Sequential reduction keeps the tie rule independent of the thread count.
  bool found = false;
  Acquisition best;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!candidates[i]) continue;
    if (!found || score[i] > best.value) {
      best = {i, score[i]};
      found = true;
    }
  }
  if (!found) throw std::logic_error("acquire: the safe set is empty");
  return best;
}

namespace {

void absorb(GridSets& sets, const SetDelta& delta) {
  for (std::size_t i = 0; i < sets.grid.size(); ++i) {
    if (delta.safe[i]) sets.in_theta_s[i] = 1;
    if (delta.certified[i]) sets.in_theta[i] = 1;
  }
}

void note_clamp(std::vector<std::string>& warnings, const char* which, std::size_t n,
                const Beta& beta, double bound) {
  if (!beta.clamped) return;
  std::ostringstream msg;
  msg << "beta_" << which << " clamped at N=" << n << ": Y^T K^-1 Y=" << beta.quadratic_form
      << " exceeds B^2=" << bound * bound;
  warnings.push_back(msg.str());
}

}  // namespace

ExplorationResult explore(const RunConfig& cfg, const IterationObserver& observer) {
  cfg.validate();
  auto theta_rng = make_rng(cfg.seed, RngStream::initial_draws);
  auto noise_rng = make_rng(cfg.seed, RngStream::observation_noise);

  InitialData data = initial_phase(cfg, theta_rng, noise_rng);
  ExplorationResult result{GridSets(cfg.make_grid()), data.samples, {}, {}, true};
  GridSets& sets = result.sets;
  for (std::size_t i = 0; i < sets.grid.size(); ++i) {
    if (cfg.initial_region.contains(sets.grid.point(i))) sets.in_theta_s[i] = 1;
  }

  GpModel gp_g = GpModel::fit(cfg.convergence_gp.kernel, data.convergence);
  GpModel gp_s = GpModel::fit(cfg.safety_gp.kernel, data.safety);

  auto certify = [&] {
    SetDelta delta = compute_sets(gp_g, gp_s, cfg.convergence_gp.rkhs_bound,
                                  cfg.safety_gp.rkhs_bound, sets.grid, cfg.threads);
    note_clamp(result.warnings, "g", gp_g.size(), delta.beta_g, cfg.convergence_gp.rkhs_bound);
    note_clamp(result.warnings, "s", gp_s.size(), delta.beta_s, cfg.safety_gp.rkhs_bound);
    absorb(sets, delta);
    return delta;
  };

  for (std::size_t j = 1; j <= cfg.n_exp; ++j) {
    const SetDelta delta = certify();
    const Acquisition pick = acquire(gp_g, gp_s, sets.grid, sets.in_theta_s, cfg.threads);
    const ThetaPoint& theta = sets.grid.point(pick.index);

    const EpisodeIndices truth = evaluate_theta(cfg, theta);
    IterationRecord rec;
    rec.j = j;
    rec.theta = theta;
    rec.y_g = observe(truth.convergence, cfg.convergence_gp.noise_bound, noise_rng);
    rec.y_s = observe(truth.safety, cfg.safety_gp.noise_bound, noise_rng);
    rec.beta_g = delta.beta_g.value;
    rec.beta_s = delta.beta_s.value;
    rec.size_theta_s = sets.count_theta_s();
    rec.size_theta = sets.count_theta();
    rec.acq_value = pick.value;

    if (!(rec.y_s > 0.0)) {
      result.compliant = false;
      std::ostringstream msg;
      msg << "safety violation at iteration " << j << ": theta=(" << theta.transpose()
          << ") y_s=" << rec.y_s;
      result.warnings.push_back(msg.str());
    }
    result.records.push_back(rec);
    if (observer) observer(result.records.back(), sets);

    data.convergence.add(theta, rec.y_g);
    data.safety.add(theta, rec.y_s);
    gp_g = GpModel::fit(cfg.convergence_gp.kernel, data.convergence);
    gp_s = GpModel::fit(cfg.safety_gp.kernel, data.safety);
  }

  // The model refit after the last sample also contributes its certified set.
  certify();
  return result;
}

std::vector<IterationRecord> random_search_baseline(const RunConfig& cfg) {
  cfg.validate();
  auto theta_rng = make_rng(cfg.seed, RngStream::baseline_draws);
  auto noise_rng = make_rng(cfg.seed, RngStream::observation_noise);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<IterationRecord> records;
  records.reserve(cfg.n_exp);
  for (std::size_t j = 1; j <= cfg.n_exp; ++j) {
    IterationRecord rec;
    rec.j = j;
    rec.theta = cfg.parameter_space.sample(theta_rng);
    const EpisodeIndices truth = evaluate_theta(cfg, rec.theta);
    rec.y_g = observe(truth.convergence, cfg.convergence_gp.noise_bound, noise_rng);
    rec.y_s = observe(truth.safety, cfg.safety_gp.noise_bound, noise_rng);
    rec.beta_g = nan;
    rec.beta_s = nan;
    rec.acq_value = nan;
    records.push_back(rec);
  }
  return records;
}

}  // namespace safe_etc
