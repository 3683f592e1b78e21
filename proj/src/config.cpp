#include "kaonbell/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>

namespace kaonbell {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("invalid value '" + std::string(text) + "' for key '" + std::string(key) + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("invalid boolean '" + std::string(text) + "' for key '" + std::string(key) + "'");
}

}  // namespace

void apply_config_entry(RunConfig& config, std::string_view key, std::string_view value) {
  auto& p = config.physics;
  auto& o = config.optimizer;
  if (key == "gamma_s") {
    p.gamma_s = parse_number<double>(key, value);
  } else if (key == "gamma_l") {
    p.gamma_l = parse_number<double>(key, value);
  } else if (key == "delta_m") {
    p.delta_m = parse_number<double>(key, value);
  } else if (key == "epsilon_re") {
    p.epsilon.real(parse_number<double>(key, value));
  } else if (key == "epsilon_im") {
    p.epsilon.imag(parse_number<double>(key, value));
  } else if (key == "restarts") {
    o.restarts = parse_number<int>(key, value);
  } else if (key == "max_iterations") {
    o.max_iterations = parse_number<int>(key, value);
  } else if (key == "tolerance") {
    o.tolerance = parse_number<double>(key, value);
  } else if (key == "seed") {
    o.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "initial_step") {
    o.initial_step = parse_number<double>(key, value);
  } else if (key == "physical_units") {
    config.physical_units = parse_bool(key, value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

RunConfig parse_config(std::istream& in, std::string_view source) {
  RunConfig config;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(source) + ":" + std::to_string(number) + ": expected key = value");
    }
    try {
      apply_config_entry(config, trim(view.substr(0, eq)), trim(view.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(source) + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  validate_config(config);
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  return parse_config(in, path.string());
}

void validate_config(const RunConfig& config) {
  try {
    config.physics.validate();
    effective_hamiltonian(config.physics);
    config.optimizer.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace kaonbell
