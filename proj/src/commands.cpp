#include "safe_etc/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <sstream>
#include <string>

#include "safe_etc/output.hpp"

namespace safe_etc {

namespace fs = std::filesystem;
using nlohmann::json;

unsigned threads_from_env() {
  const char* raw = std::getenv("ETC_EXPLORE_THREADS");
  if (raw == nullptr) return 1;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || v < 1) return 1;
  return static_cast<unsigned>(std::min<long>(v, 1024));
}

std::vector<ThetaPoint> sample_certified_cells(const GridSets& sets, std::size_t count,
                                               std::mt19937_64& rng) {
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < sets.grid.size(); ++i) {
    if (sets.in_theta[i]) members.push_back(i);
  }
  std::vector<ThetaPoint> out;
  if (members.empty()) return out;
  std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back(sets.grid.cell(members[pick(rng)]).sample(rng));
  }
  return out;
}

namespace {

std::string episode_name(std::size_t j) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "episode_%04zu.csv", j);
  return buf;
}

GridSets load_grid_sets(const fs::path& file, const RunConfig& cfg) {
  const auto rows = parse_grid_sets(read_file(file));
  GridSets sets(cfg.make_grid());
  if (rows.size() != sets.grid.size()) {
    throw IoError("grid_sets.csv has " + std::to_string(rows.size()) + " rows, the configured grid has " +
                  std::to_string(sets.grid.size()));
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if ((rows[i].theta - sets.grid.point(i)).cwiseAbs().maxCoeff() > 1e-12) {
      throw IoError("grid_sets.csv row " + std::to_string(i + 1) + " does not match the configured grid");
    }
    sets.in_theta_s[i] = rows[i].in_theta_s ? 1 : 0;
    sets.in_theta[i] = rows[i].in_theta ? 1 : 0;
  }
  return sets;
}

}  // namespace

int run_explore(const RunOptions& options, std::ostream& log, std::ostream& err) {
  try {
    LoadedConfig loaded = load_config(options.config, options.overrides);
    RunConfig& cfg = loaded.run;
    cfg.threads = options.threads;

    fs::create_directories(options.out / "trajectories");
    const ExplorationResult result = explore(cfg);

    write_file(options.out / "config.json", loaded.document.dump(2) + "\n");
    write_file(options.out / "run_log.csv", run_log_csv(result.records));
    write_file(options.out / "grid_sets.csv", grid_sets_csv(result.sets));
    write_file(options.out / "initial_samples.csv", initial_samples_csv(result.initial_samples));
    for (const auto& rec : result.records) {
      write_file(options.out / "trajectories" / episode_name(rec.j),
                 trajectory_csv(simulate_theta(cfg, rec.theta), options.decimation));
    }

    json meta{
        {"seed", cfg.seed},
        {"config_hash", loaded.hash},
        {"status", result.compliant ? "compliant" : "non_compliant"},
        {"n_init", cfg.n_init},
        {"n_exp", cfg.n_exp},
        {"grid_points", result.sets.grid.size()},
        {"size_theta_s", result.sets.count_theta_s()},
        {"size_theta", result.sets.count_theta()},
        {"warnings", result.warnings},
    };
    write_file(options.out / "run_meta.json", meta.dump(2) + "\n");

    log << "explore: " << result.records.size() << " iterations, |Theta_s|=" << result.sets.count_theta_s()
        << ", |Theta|=" << result.sets.count_theta() << " of " << result.sets.grid.size()
        << " grid points, status " << meta["status"].get<std::string>() << "\n";
    for (const auto& w : result.warnings) err << "warning: " << w << "\n";
    return result.compliant ? kExitOk : kExitSafetyViolation;
  } catch (const std::exception& e) {
    err << "explore: " << e.what() << "\n";
  }
  return kExitError;
}

int run_baseline(const RunOptions& options, std::ostream& log, std::ostream& err) {
  try {
    const LoadedConfig loaded = load_config(options.config, options.overrides);
    fs::create_directories(options.out);
    const auto records = random_search_baseline(loaded.run);
    const auto violations = static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const IterationRecord& r) { return !(r.y_s > 0.0); }));

    write_file(options.out / "baseline_log.csv", run_log_csv(records));
    json meta{
        {"seed", loaded.run.seed},
        {"config_hash", loaded.hash},
        {"draws", records.size()},
        {"safety_violations", violations},
    };
    write_file(options.out / "baseline_meta.json", meta.dump(2) + "\n");
    log << "baseline: " << records.size() << " draws, " << violations << " with y_s <= 0\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "baseline: " << e.what() << "\n";
    return kExitError;
  }
}

int run_verify(const fs::path& run_dir, unsigned threads, std::ostream& log, std::ostream& err) {
  try {
    const LoadedConfig loaded = load_config(run_dir / "config.json");
    const RunConfig& cfg = loaded.run;
    const GridSets sets = load_grid_sets(run_dir / "grid_sets.csv", cfg);

    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < sets.grid.size(); ++i) {
      if (sets.in_theta[i] && !sets.in_theta_s[i]) {
        err << "verify: grid_sets.csv row " << i + 1 << " has in_theta without in_theta_s\n";
        return kExitError;
      }
      if (sets.in_theta[i]) members.push_back(i);
    }

    std::vector<EpisodeIndices> truth(members.size());
    parallel_for(members.size(), threads,
                 [&](std::size_t k) { truth[k] = evaluate_theta(cfg, sets.grid.point(members[k])); });

    std::ostringstream report;
    report << "theta1,theta2,convergence_index,safety_index,pass\n";
    std::size_t failures = 0;
    for (std::size_t k = 0; k < members.size(); ++k) {
      const ThetaPoint& p = sets.grid.point(members[k]);
      const bool pass = truth[k].convergence > 0.0 && truth[k].safety > 0.0;
      report << format_double(p[0]) << ',' << format_double(p[1]) << ',' << format_double(truth[k].convergence)
             << ',' << format_double(truth[k].safety) << ',' << int(pass) << '\n';
      if (!pass) {
        ++failures;
        err << "verify: offender theta=(" << format_double(p[0]) << ", " << format_double(p[1])
            << ") g=" << format_double(truth[k].convergence) << " s=" << format_double(truth[k].safety) << "\n";
      }
    }
    write_file(run_dir / "verify_report.csv", report.str());

    if (members.empty()) {
      log << "verify: Theta is empty; nothing to check\n";
      return kExitOk;
    }
    log << "verify: " << members.size() - failures << " of " << members.size()
        << " certified grid points satisfy both specifications\n";
    return failures == 0 ? kExitOk : kExitVerifyFailed;
  } catch (const std::exception& e) {
    err << "verify: " << e.what() << "\n";
    return kExitError;
  }
}

int run_plotdata(const fs::path& run_dir, std::size_t samples, std::size_t decimation, std::ostream& log,
                 std::ostream& err) {
  try {
    const LoadedConfig loaded = load_config(run_dir / "config.json");
    const RunConfig& cfg = loaded.run;
    const GridSets sets = load_grid_sets(run_dir / "grid_sets.csv", cfg);
    const auto algorithm = parse_run_log(read_file(run_dir / "run_log.csv"));
    std::vector<IterationRecord> baseline;
    const bool have_baseline = fs::exists(run_dir / "baseline_log.csv");
    if (have_baseline) baseline = parse_run_log(read_file(run_dir / "baseline_log.csv"));

    const fs::path out = run_dir / "plotdata";
    fs::create_directories(out);

    write_file(out / "fig2_parameter_space.csv", grid_sets_csv(sets));

    auto rng = make_rng(cfg.seed, RngStream::plot_sampling);
    const auto thetas = sample_certified_cells(sets, samples, rng);
    std::ostringstream fig3;
    fig3 << "sample,theta1,theta2," << trajectory_header(cfg.plant.state_dim(), cfg.plant.input_dim) << '\n';
    for (std::size_t k = 0; k < thetas.size(); ++k) {
      const std::string body = trajectory_csv(simulate_theta(cfg, thetas[k]), decimation);
      const std::string prefix =
          std::to_string(k + 1) + ',' + format_double(thetas[k][0]) + ',' + format_double(thetas[k][1]) + ',';
      std::istringstream lines(body);
      std::string line;
      std::getline(lines, line);  // header
      while (std::getline(lines, line)) fig3 << prefix << line << '\n';
    }
    write_file(out / "fig3_trajectories.csv", fig3.str());

    std::ostringstream fig4;
    fig4 << "j,y_s_algorithm" << (have_baseline ? ",y_s_baseline" : "") << '\n';
    const std::size_t rows = std::max(algorithm.size(), baseline.size());
    for (std::size_t k = 0; k < rows; ++k) {
      fig4 << k + 1 << ',';
      if (k < algorithm.size()) fig4 << format_double(algorithm[k].y_s);
      if (have_baseline) {
        fig4 << ',';
        if (k < baseline.size()) fig4 << format_double(baseline[k].y_s);
      }
      fig4 << '\n';
    }
    write_file(out / "fig4_safety_series.csv", fig4.str());

    log << "plotdata: wrote 3 files to " << out.string() << " (" << thetas.size() << " trajectories"
        << (have_baseline ? ", with baseline" : "") << ")\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "plotdata: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace safe_etc
