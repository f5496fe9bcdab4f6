#include "safe_etc/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>
#include <vector>

namespace safe_etc {

using nlohmann::json;

json pendulum_preset() {
  return json{
      {"seed", 1},
      {"parameter_space", {{"lower", {0.01, 0.01}}, {"upper", {1.0, 1.0}}}},
      {"grid_resolution", {50, 50}},
      {"initial_region", {{"lower", {0.01, 0.01}}, {"upper", {0.05, 0.05}}}},
      {"n_init", 10},
      {"n_exp", 100},
      {"convergence_gp",
       {{"lengthscales", {0.2, 0.2}}, {"signal_variance", 1.0}, {"rkhs_bound", 10.0}, {"noise_bound", 0.01}}},
      {"safety_gp",
       {{"lengthscales", {0.2, 0.2}}, {"signal_variance", 0.0625}, {"rkhs_bound", 10.0}, {"noise_bound", 0.01}}},
      {"plant", {{"model", "inverted_pendulum"}, {"initial_state", {1.0, 0.0}}}},
      {"controller", {{"gain", json::array({json::array({-1.08, -1.43})})}}},
      {"trigger", {{"decay_rate", 0.1}}},
      {"convergence_index",
       {{"weight", json::array({json::array({1.0, 0.0}), json::array({0.0, 1.0})})},
        {"eta0", 2.0},
        {"decay", 0.05},
        {"denominator_floor", 1e-12}}},
      {"safety_index", {{"mode", "component_abs_bound"}, {"component", 1}, {"threshold", 0.25}}},
      {"simulation", {{"horizon", 30.0}, {"step", 1e-3}}},
  };
}

namespace {

// Path-aware accessors; every failure names the offending key.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail("must be an object");
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& item : node_.items()) {
      if (!allowed.count(item.key())) fail("unknown key '" + item.key() + "'");
    }
  }

  Reader object(const char* key) const { return Reader(at(key), child(key)); }

  std::vector<std::size_t> sizes(const char* key) const {
    const json& v = at(key);
    if (!v.is_array() || v.empty()) fail_at(key, "must be a non-empty array");
    std::vector<std::size_t> out;
    for (const auto& e : v) {
      if (!e.is_number_integer() || e.get<std::int64_t>() < 1) fail_at(key, "entries must be integers >= 1");
      out.push_back(e.get<std::size_t>());
    }
    return out;
  }

  double number(const char* key) const {
    const json& v = at(key);
    if (!v.is_number()) fail_at(key, "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail_at(key, "must be finite");
    return d;
  }

  std::uint64_t count(const char* key) const {
    const json& v = at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail_at(key, "must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::string text(const char* key) const {
    const json& v = at(key);
    if (!v.is_string()) fail_at(key, "must be a string");
    return v.get<std::string>();
  }

  Eigen::VectorXd vector(const char* key) const {
    const json& v = at(key);
    if (!v.is_array() || v.empty()) fail_at(key, "must be a non-empty array of numbers");
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail_at(key, "must contain only numbers");
      out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    return out;
  }

  Eigen::MatrixXd matrix(const char* key) const {
    const json& v = at(key);
    if (!v.is_array() || v.empty() || !v[0].is_array() || v[0].empty()) {
      fail_at(key, "must be a non-empty array of rows");
    }
    const std::size_t cols = v[0].size();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < v.size(); ++r) {
      if (!v[r].is_array() || v[r].size() != cols) fail_at(key, "rows must have equal length");
      for (std::size_t c = 0; c < cols; ++c) {
        if (!v[r][c].is_number()) fail_at(key, "must contain only numbers");
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[r][c].get<double>();
      }
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("config: " + (path_.empty() ? std::string("<root>") : path_) + ": " + what);
  }

 private:
  const json& at(const char* key) const {
    auto it = node_.find(key);
    if (it == node_.end()) fail("missing key '" + std::string(key) + "'");
    return *it;
  }
  std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }
  [[noreturn]] void fail_at(const char* key, const std::string& what) const {
    throw ConfigError("config: " + child(key) + ": " + what);
  }

  const json& node_;
  std::string path_;
};

Box read_box(const Reader& r) {
  r.allow_only({"lower", "upper"});
  return Box{r.vector("lower"), r.vector("upper")};
}

GpSettings read_gp(const Reader& r) {
  r.allow_only({"lengthscales", "signal_variance", "rkhs_bound", "noise_bound"});
  GpSettings gp;
  gp.kernel.lengthscales = r.vector("lengthscales");
  gp.kernel.signal_variance = r.number("signal_variance");
  gp.rkhs_bound = r.number("rkhs_bound");
  gp.noise_bound = r.number("noise_bound");
  return gp;
}

RunConfig build(const json& doc) {
  const Reader root(doc, "");
  root.allow_only({"seed", "parameter_space", "grid_resolution", "initial_region", "n_init", "n_exp",
                   "convergence_gp", "safety_gp", "plant", "controller", "trigger", "convergence_index",
                   "safety_index", "simulation"});
  RunConfig cfg;
  cfg.seed = root.count("seed");
  cfg.parameter_space = read_box(root.object("parameter_space"));
  cfg.initial_region = read_box(root.object("initial_region"));
  cfg.grid_resolution = root.sizes("grid_resolution");
  cfg.n_init = root.count("n_init");
  cfg.n_exp = root.count("n_exp");
  cfg.convergence_gp = read_gp(root.object("convergence_gp"));
  cfg.safety_gp = read_gp(root.object("safety_gp"));

  const Reader plant = root.object("plant");
  plant.allow_only({"model", "initial_state"});
  const std::string model = plant.text("model");
  if (model != "inverted_pendulum") plant.fail("unknown model '" + model + "'");
  const Eigen::VectorXd x0 = plant.vector("initial_state");
  if (x0.size() != 2) plant.fail("initial_state: inverted_pendulum has two states");
  cfg.plant = inverted_pendulum(x0);

  const Reader ctrl = root.object("controller");
  ctrl.allow_only({"gain"});
  cfg.controller.gain = ctrl.matrix("gain");

  const Reader trig = root.object("trigger");
  trig.allow_only({"decay_rate"});
  cfg.trigger_decay = trig.number("decay_rate");

  const Reader conv = root.object("convergence_index");
  conv.allow_only({"weight", "eta0", "decay", "denominator_floor"});
  cfg.convergence.weight = conv.matrix("weight");
  cfg.convergence.eta0 = conv.number("eta0");
  cfg.convergence.decay = conv.number("decay");
  cfg.convergence.denominator_floor = conv.number("denominator_floor");

  const Reader safe = root.object("safety_index");
  safe.allow_only({"mode", "component", "threshold"});
  const std::string mode = safe.text("mode");
  if (mode == "component_abs_bound") {
    cfg.safety.mode = SafetySpec::Mode::component_abs_bound;
  } else if (mode == "norm_bound") {
    cfg.safety.mode = SafetySpec::Mode::norm_bound;
  } else {
    safe.fail("mode must be 'component_abs_bound' or 'norm_bound'");
  }
  cfg.safety.component = safe.count("component");
  cfg.safety.threshold = safe.number("threshold");

  const Reader sim = root.object("simulation");
  sim.allow_only({"horizon", "step"});
  cfg.simulation.horizon = sim.number("horizon");
  cfg.simulation.step = sim.number("step");

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

LoadedConfig parse_config(const json& doc, const ConfigOverrides& overrides) {
  if (!doc.is_object()) throw ConfigError("config: document must be a JSON object");
  json resolved;
  json patch = doc;
  if (auto it = patch.find("preset"); it != patch.end()) {
    if (!it->is_string() || it->get<std::string>() != "pendulum") {
      throw ConfigError("config: preset: unknown preset (known: 'pendulum')");
    }
    resolved = pendulum_preset();
    patch.erase("preset");
  } else {
    resolved = json::object();
  }
  resolved.merge_patch(patch);

  if (overrides.seed) resolved["seed"] = *overrides.seed;
  if (overrides.grid_resolution) {
    const auto dims = resolved.contains("parameter_space") && resolved["parameter_space"].contains("lower") &&
                              resolved["parameter_space"]["lower"].is_array()
                          ? resolved["parameter_space"]["lower"].size()
                          : std::size_t{2};
    resolved["grid_resolution"] = json(std::vector<std::size_t>(dims, *overrides.grid_resolution));
  }
  if (overrides.horizon) resolved["simulation"]["horizon"] = *overrides.horizon;
  if (overrides.step) resolved["simulation"]["step"] = *overrides.step;

  LoadedConfig out;
  out.run = build(resolved);
  out.document = resolved;
  out.hash = fnv1a_hex(resolved.dump());
  return out;
}

LoadedConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError("config: '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc, overrides);
}

}  // namespace safe_etc
