#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "fixtures.hpp"
#include "safe_etc/config.hpp"
#include "safe_etc/output.hpp"

using namespace safe_etc;
using nlohmann::json;

TEST_CASE("pendulum preset carries the experiment constants") {
  const auto loaded = parse_config(json{{"preset", "pendulum"}});
  const RunConfig& c = loaded.run;
  CHECK(c.seed == 1);
  CHECK(c.parameter_space.lower == Eigen::Vector2d(0.01, 0.01));
  CHECK(c.parameter_space.upper == Eigen::Vector2d(1.0, 1.0));
  CHECK(c.grid_resolution == std::vector<std::size_t>{50, 50});
  CHECK(c.initial_region.lower == Eigen::Vector2d(0.01, 0.01));
  CHECK(c.initial_region.upper == Eigen::Vector2d(0.05, 0.05));
  CHECK(c.n_init == 10);
  CHECK(c.n_exp == 100);
  CHECK(c.controller.gain == (Eigen::MatrixXd(1, 2) << -1.08, -1.43).finished());
  CHECK(c.plant.initial_state == Eigen::Vector2d(1.0, 0.0));
  CHECK(c.trigger_decay == 0.1);
  CHECK(c.convergence.weight == Eigen::MatrixXd::Identity(2, 2));
  CHECK(c.convergence.eta0 == 2.0);
  CHECK(c.convergence.decay == 0.05);
  CHECK(c.safety.mode == SafetySpec::Mode::component_abs_bound);
  CHECK(c.safety.component == 1);
  CHECK(c.safety.threshold == 0.25);
  CHECK(c.simulation.horizon == 30.0);
  CHECK(c.simulation.step == 1e-3);
  CHECK(c.convergence_gp.kernel.signal_variance == 1.0);
  CHECK(c.safety_gp.kernel.signal_variance == 0.0625);
  CHECK_FALSE(loaded.document.contains("preset"));
  CHECK(loaded.document == pendulum_preset());
}

TEST_CASE("the dynamics of the configured plant are the pendulum") {
  const auto c = parse_config(json{{"preset", "pendulum"}}).run;
  const Eigen::VectorXd dx = c.plant.dynamics(Eigen::Vector2d(0.3, -0.2), Eigen::VectorXd::Constant(1, 0.5));
  CHECK(dx[0] == -0.2);
  CHECK(dx[1] == doctest::Approx(std::sin(0.3) + 0.2 + 0.5).epsilon(1e-15));
}

TEST_CASE("document keys override the preset, nested keys merge") {
  const auto c = parse_config(json{{"preset", "pendulum"}, {"simulation", {{"horizon", 20.0}}}, {"n_exp", 7}}).run;
  CHECK(c.simulation.horizon == 20.0);
  CHECK(c.simulation.step == 1e-3);
  CHECK(c.n_exp == 7);
}

TEST_CASE("a full document without a preset is accepted") {
  const auto c = parse_config(pendulum_preset()).run;
  CHECK(c.n_exp == 100);
}

TEST_CASE("command-line overrides win") {
  ConfigOverrides o;
  o.seed = 77;
  o.grid_resolution = 30;
  o.horizon = 20.0;
  o.step = 5e-4;
  const auto l = parse_config(json{{"preset", "pendulum"}}, o);
  CHECK(l.run.seed == 77);
  CHECK(l.run.grid_resolution == std::vector<std::size_t>{30, 30});
  CHECK(l.run.simulation.horizon == 20.0);
  CHECK(l.run.simulation.step == 5e-4);
  CHECK(l.document["seed"] == 77);
}

TEST_CASE("config errors name the problem") {
  auto bad = [](json doc) { CHECK_THROWS_AS(parse_config(doc), ConfigError); };
  bad(json{{"preset", "cartpole"}});
  bad(json{{"preset", "pendulum"}, {"n_exps", 3}});
  bad(json{{"preset", "pendulum"}, {"simulation", {{"dt", 0.1}}}});
  bad(json{{"preset", "pendulum"}, {"simulation", {{"horizon", 1.0}, {"step", 0.3}}}});
  bad(json{{"preset", "pendulum"}, {"n_init", 0}});
  bad(json{{"preset", "pendulum"}, {"grid_resolution", {10}}});
  bad(json{{"preset", "pendulum"}, {"safety_index", {{"mode", "sometimes"}}}});
  bad(json{{"preset", "pendulum"}, {"initial_region", {{"lower", {0.0, 0.0}}}}});
  bad(json{{"preset", "pendulum"}, {"controller", {{"gain", {{1.0}}}}}});
  bad(json{{"preset", "pendulum"}, {"convergence_gp", {{"rkhs_bound", -1.0}}}});
  bad(json::array());
  json missing = pendulum_preset();
  missing.erase("n_exp");
  bad(missing);
  try {
    parse_config(json{{"preset", "pendulum"}, {"trigger", {{"decay", 1}}}});
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("trigger") != std::string::npos);
    CHECK(std::string(e.what()).find("decay") != std::string::npos);
  }
}

TEST_CASE("config files load and hash stably") {
  const auto dir = fixtures::scratch_dir("config");
  write_file(dir / "a.json", "{\"preset\": \"pendulum\", \"n_exp\": 5}");
  write_file(dir / "b.json", "{ \"n_exp\" : 5,\n  \"preset\":\"pendulum\" }");
  write_file(dir / "c.json", "{\"preset\": \"pendulum\", \"n_exp\": 6}");
  write_file(dir / "broken.json", "{\"preset\": ");
  const auto a = load_config(dir / "a.json");
  CHECK(a.hash.size() == 16);
  CHECK(a.hash == load_config(dir / "b.json").hash);
  CHECK(a.hash != load_config(dir / "c.json").hash);
  CHECK_THROWS_AS(load_config(dir / "broken.json"), ConfigError);
  CHECK_THROWS_AS(load_config(dir / "nope.json"), ConfigError);
  // Reloading the resolved document reproduces the hash.
  write_file(dir / "resolved.json", a.document.dump(2));
  CHECK(load_config(dir / "resolved.json").hash == a.hash);
}

TEST_CASE("FNV-1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("shipped configs parse") {
  const auto root = fixtures::source_dir();
  const auto full = load_config(root / "configs" / "pendulum.json");
  CHECK(full.document == pendulum_preset());
  const auto desk = load_config(root / "configs" / "desk.json").run;
  CHECK(desk.grid_resolution == std::vector<std::size_t>{30, 30});
  CHECK(desk.simulation.horizon == 20.0);
  CHECK(desk.simulation.step == 1e-3);
  CHECK(desk.n_init == 10);
  CHECK(desk.n_exp == 50);
}

TEST_CASE("doubles survive a format/parse round trip") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::uint64_t> bits;
  int tested = 0;
  while (tested < 20000) {
    const std::uint64_t b = bits(rng);
    double v;
    std::memcpy(&v, &b, sizeof v);
    if (!std::isfinite(v)) continue;
    ++tested;
    const double back = parse_double(format_double(v));
    CHECK(std::memcmp(&back, &v, sizeof v) == 0);
  }
  for (double v : {0.0, -0.0, 1e18, -1e18, 0.1, 1.0 / 3.0, std::numeric_limits<double>::denorm_min()}) {
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(format_double(1e18) == "1e+18");
  CHECK(format_double(-1e18) == "-1e+18");
  CHECK(format_double(0.25) == "0.25");
  CHECK(std::isnan(parse_double(format_double(std::nan("")))));
  CHECK(parse_double(format_double(HUGE_VAL)) == HUGE_VAL);
  CHECK_THROWS_AS(parse_double("1.5x"), IoError);
  CHECK_THROWS_AS(parse_double(""), IoError);
}

TEST_CASE("csv headers") {
  CHECK(kRunLogHeader == "j,theta1,theta2,y_g,y_s,beta_g,beta_s,size_theta_s,size_theta,acq_value");
  CHECK(kGridSetsHeader == "theta1,theta2,in_theta_s,in_theta");
  CHECK(kTrajectoryHeader == "t,x1,x2,u,event");
  CHECK(trajectory_header(2, 1) == kTrajectoryHeader);
  CHECK(trajectory_header(3, 2) == "t,x1,x2,x3,u1,u2,event");
}

TEST_CASE("run log round-trips through csv") {
  std::vector<IterationRecord> recs(3);
  for (std::size_t k = 0; k < recs.size(); ++k) {
    recs[k].j = k + 1;
    recs[k].theta = Eigen::Vector2d(0.1 * k + 0.01, 1.0 / 3.0);
    recs[k].y_g = k == 1 ? 1e18 : -0.123456789012345678;
    recs[k].y_s = 0.2 - 0.1 * k;
    recs[k].beta_g = std::sqrt(11.0 + k);
    recs[k].beta_s = std::nan("");
    recs[k].size_theta_s = 4 + k;
    recs[k].size_theta = k;
    recs[k].acq_value = 0.5;
  }
  const std::string text = run_log_csv(recs);
  CHECK(text.rfind(std::string(kRunLogHeader) + "\n", 0) == 0);
  const auto back = parse_run_log(text);
  REQUIRE(back.size() == recs.size());
  for (std::size_t k = 0; k < recs.size(); ++k) {
    CHECK(back[k].j == recs[k].j);
    CHECK(back[k].theta == recs[k].theta);
    CHECK(back[k].y_g == recs[k].y_g);
    CHECK(back[k].y_s == recs[k].y_s);
    CHECK(back[k].beta_g == recs[k].beta_g);
    CHECK(std::isnan(back[k].beta_s));
    CHECK(back[k].size_theta_s == recs[k].size_theta_s);
    CHECK(back[k].size_theta == recs[k].size_theta);
  }
  CHECK(run_log_csv(back) == text);
  CHECK_THROWS_AS(parse_run_log("j,theta1\n1,2\n"), IoError);
  CHECK_THROWS_AS(parse_run_log(std::string(kRunLogHeader) + "\n1,2,3\n"), IoError);
}

TEST_CASE("grid sets round-trip through csv") {
  GridSets sets(Grid(Box{Eigen::Vector2d(0.01, 0.01), Eigen::Vector2d(1, 1)}, {7, 5}));
  sets.in_theta_s[3] = sets.in_theta_s[4] = sets.in_theta[4] = 1;
  const auto rows = parse_grid_sets(grid_sets_csv(sets));
  REQUIRE(rows.size() == sets.grid.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].theta == sets.grid.point(i));
    CHECK(rows[i].in_theta_s == bool(sets.in_theta_s[i]));
    CHECK(rows[i].in_theta == bool(sets.in_theta[i]));
  }
}

TEST_CASE("trajectory csv decimates and keeps the last sample") {
  const auto cfg = fixtures::small_config();
  const auto tr = simulate_theta(cfg, Eigen::Vector2d(0.1, 0.1));
  const auto rows = parse_csv(trajectory_csv(tr, 7), kTrajectoryHeader);
  const std::size_t n = tr.samples();
  CHECK(rows.size() == (n - 1) / 7 + 1 + ((n - 1) % 7 != 0));
  CHECK(parse_double(rows.front()[0]) == 0.0);
  CHECK(rows.front()[4] == "1");
  CHECK(parse_double(rows.back()[0]) == tr.times.back());
  CHECK(parse_double(rows.back()[2]) == tr.states(1, tr.states.cols() - 1));
  CHECK(parse_csv(trajectory_csv(tr), kTrajectoryHeader).size() == n);
}
