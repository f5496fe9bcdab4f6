#pragma once

// JSON run configuration. A document may name a preset; its own keys are then
// merged over the preset and the result is validated strictly (unknown keys
// and missing keys are both errors).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "safe_etc/explorer.hpp"

namespace safe_etc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Command-line overrides applied on top of the document before validation.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> grid_resolution;  // same count on every axis
  std::optional<double> horizon;
  std::optional<double> step;
};

struct LoadedConfig {
  RunConfig run;
  nlohmann::json document;  // fully resolved, preset key removed
  std::string hash;         // FNV-1a 64 of document.dump(), hex
};

/// The inverted-pendulum experiment: gain [-1.08, -1.43], x0 = [1, 0],
/// gamma = 0.1, K = [0.01, 1]^2, Q = I, eta0 = 2, decay 0.05, xi = 0.25 on
/// |x2|, initial region [0.01, 0.05]^2, N_init = 10, N_exp = 100.
nlohmann::json pendulum_preset();

LoadedConfig parse_config(const nlohmann::json& doc, const ConfigOverrides& overrides = {});
LoadedConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

std::string fnv1a_hex(const std::string& bytes);

}  // namespace safe_etc
