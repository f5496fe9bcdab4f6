#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "safe_etc/config.hpp"

namespace fixtures {

/// The pendulum experiment shrunk so a full exploration runs in about a second.
inline nlohmann::json small_document(std::uint64_t seed = 1) {
  return nlohmann::json{{"preset", "pendulum"},
                        {"seed", seed},
                        {"grid_resolution", {12, 12}},
                        {"n_init", 5},
                        {"n_exp", 8},
                        {"simulation", {{"horizon", 10.0}, {"step", 0.002}}}};
}

inline safe_etc::RunConfig small_config(std::uint64_t seed = 1) {
  return safe_etc::parse_config(small_document(seed)).run;
}

inline std::filesystem::path source_dir() {
  const char* env = std::getenv("SAFE_ETC_SOURCE_DIR");
  return env ? std::filesystem::path(env) : std::filesystem::current_path();
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("safe_etc_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
