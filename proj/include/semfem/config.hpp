#pragma once

#include <charconv>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "semfem/adaptive.hpp"
#include "semfem/errors.hpp"

namespace semfem {

enum class DirectMode { automatic, on, off };

// Parsed run configuration. Defaults that depend on the experiment stay
// unset here and are resolved against the problem presets.
struct RunConfig {
  std::string experiment;
  std::optional<double> epsilon;
  double alpha = 0.5;
  double theta = 0.5;
  std::optional<double> dt;
  std::optional<double> max_dof;
  std::optional<int> initial_n;
  int quad_order = 4;
  DecayMode decay = DecayMode::approximate;
  int max_inner = 100;
  double cg_tol = 1e-12;
  std::optional<double> e_ref;
  bool vtk = false;
  bool timing = false;
  DirectMode direct = DirectMode::automatic;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] inline void config_fail(int line, const std::string& what) {
  std::ostringstream os;
  os << "line " << line << ": " << what;
  throw ConfigError(os.str());
}

inline double parse_number(int line, const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* b = v.data();
  auto [ptr, ec] = std::from_chars(b, b + v.size(), out);
  if (ec != std::errc{} || ptr != b + v.size())
    config_fail(line, "value of '" + key + "' is not a number: '" + v + "'");
  return out;
}

inline int parse_int(int line, const std::string& key, const std::string& v) {
  int out = 0;
  const char* b = v.data();
  auto [ptr, ec] = std::from_chars(b, b + v.size(), out);
  if (ec != std::errc{} || ptr != b + v.size())
    config_fail(line, "value of '" + key + "' is not an integer: '" + v + "'");
  return out;
}

inline bool parse_switch(int line, const std::string& key, const std::string& v) {
  if (v == "on") return true;
  if (v == "off") return false;
  config_fail(line, "value of '" + key + "' must be on or off");
}

}  // namespace detail

// Flat key = value format, '#' starts a comment, blank lines ignored.
// Unknown keys, duplicate keys, malformed values and out-of-range parameters
// are ConfigErrors naming the offending line.
inline RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  bool have_experiment = false;
  std::vector<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string s = detail::trim(line);
    if (s.empty()) continue;
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) detail::config_fail(lineno, "expected key = value");
    std::string key = detail::trim(s.substr(0, eq));
    std::string val = detail::trim(s.substr(eq + 1));
    if (key.empty()) detail::config_fail(lineno, "empty key");
    if (val.empty()) detail::config_fail(lineno, "empty value for '" + key + "'");
    for (const std::string& k : seen)
      if (k == key) detail::config_fail(lineno, "duplicate key '" + key + "'");
    seen.push_back(key);

    if (key == "experiment") {
      cfg.experiment = val;
      have_experiment = true;
    } else if (key == "epsilon") {
      cfg.epsilon = detail::parse_number(lineno, key, val);
      if (!(*cfg.epsilon > 0.0)) detail::config_fail(lineno, "epsilon must be positive");
    } else if (key == "alpha") {
      cfg.alpha = detail::parse_number(lineno, key, val);
      if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
        detail::config_fail(lineno, "alpha must be in (0,1)");
    } else if (key == "theta") {
      cfg.theta = detail::parse_number(lineno, key, val);
      if (!(cfg.theta > 0.0 && cfg.theta < 1.0))
        detail::config_fail(lineno, "theta must be in (0,1)");
    } else if (key == "dt") {
      cfg.dt = detail::parse_number(lineno, key, val);
      if (!(*cfg.dt > 0.0)) detail::config_fail(lineno, "dt must be positive");
    } else if (key == "max_dof") {
      cfg.max_dof = detail::parse_number(lineno, key, val);
      if (!(*cfg.max_dof > 0.0)) detail::config_fail(lineno, "max_dof must be positive");
    } else if (key == "initial_n") {
      cfg.initial_n = detail::parse_int(lineno, key, val);
      if (*cfg.initial_n < 1) detail::config_fail(lineno, "initial_n must be >= 1");
    } else if (key == "quad_order") {
      cfg.quad_order = detail::parse_int(lineno, key, val);
      if (cfg.quad_order != 1 && cfg.quad_order != 2 && cfg.quad_order != 4 &&
          cfg.quad_order != 6)
        detail::config_fail(lineno, "quad_order must be 1, 2, 4 or 6");
    } else if (key == "decay_mode") {
      if (val == "approximate")
        cfg.decay = DecayMode::approximate;
      else if (val == "exact")
        cfg.decay = DecayMode::exact;
      else
        detail::config_fail(lineno, "decay_mode must be approximate or exact");
    } else if (key == "max_inner") {
      cfg.max_inner = detail::parse_int(lineno, key, val);
      if (cfg.max_inner < 1) detail::config_fail(lineno, "max_inner must be >= 1");
    } else if (key == "cg_tol") {
      cfg.cg_tol = detail::parse_number(lineno, key, val);
      if (!(cfg.cg_tol > 0.0 && cfg.cg_tol < 1.0))
        detail::config_fail(lineno, "cg_tol must be in (0,1)");
    } else if (key == "e_ref") {
      cfg.e_ref = detail::parse_number(lineno, key, val);
    } else if (key == "vtk") {
      cfg.vtk = detail::parse_switch(lineno, key, val);
    } else if (key == "timing") {
      cfg.timing = detail::parse_switch(lineno, key, val);
    } else if (key == "direct") {
      if (val == "auto")
        cfg.direct = DirectMode::automatic;
      else
        cfg.direct = detail::parse_switch(lineno, key, val) ? DirectMode::on : DirectMode::off;
    } else {
      detail::config_fail(lineno, "unknown key '" + key + "'");
    }
  }
  if (!have_experiment) throw ConfigError("missing required key 'experiment'");
  return cfg;
}

inline RunConfig parse_config_string(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

}  // namespace semfem
