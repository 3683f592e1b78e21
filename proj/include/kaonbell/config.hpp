#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

#include "kaonbell/optimize.hpp"

namespace kaonbell {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mean K_S lifetime in seconds, used only when displaying physical units.
inline constexpr double kTauSSeconds = 0.8954e-10;

struct RunConfig {
  KaonPhysics physics;
  OptimizerConfig optimizer;
  /// Report times in seconds instead of tau_S.
  bool physical_units = false;
};

/// Applies one `key = value` entry. Unknown keys and malformed values throw ConfigError.
void apply_config_entry(RunConfig& config, std::string_view key, std::string_view value);

/// Parses flat `key = value` text. Blank lines and `#` comments are skipped.
/// Keys: gamma_s, gamma_l, delta_m, epsilon_re, epsilon_im, restarts,
/// max_iterations, tolerance, seed, initial_step, physical_units.
RunConfig parse_config(std::istream& in, std::string_view source = "<config>");

/// Throws IoError if the file cannot be opened.
RunConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError if the physics or optimizer settings are out of range.
void validate_config(const RunConfig& config);

}  // namespace kaonbell
