#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "birkhoff/errors.hpp"
#include "birkhoff/frequency.hpp"
#include "birkhoff/nonlinearity.hpp"
#include "birkhoff/polynomial.hpp"
#include "birkhoff/scan.hpp"

namespace birkhoff {

/// Flat run configuration shared by every command.  Zero in an optional
/// field means "derive": threshold from epsilon^{-r/(s-s0)} capped at the
/// cutoff, horizon from 1/epsilon (or the long-run exponent when enabled),
/// high_bound from 3 r N.
struct RunConfig {
  int dimension = 1;
  double mass = 1.0;
  double cutoff = 6.0;        // K
  double threshold = 0.0;     // N, 0 = derive
  int order = 3;              // r
  double s = 2.0;
  double s0 = 1.0;
  double epsilon = 0.05;
  double dt = 0.01;
  double horizon = 0.0;       // T, 0 = derive
  std::map<int, double> f_taylor;  // keys 2..6
  unsigned long long seed = 1;
  double divisor_floor = 1e-8;
  double dealias_factor = 1.0;
  int stride = 1;
  std::string condition = "H1";
  double high_bound = 0.0;    // 0 = derive
  std::vector<double> scan_thresholds = {2.0, 3.0, 4.0};
  std::vector<double> epsilons = {0.1, 0.05, 0.025};
  bool long_run = false;
  std::string init_state;     // optional path to a prescribed initial state
  std::vector<double> verify_radii = {1e-2, 5e-3, 2.5e-3};
  int verify_samples = 4;
  double flow_tol = 1e-12;
  double blowup_factor = 10.0;

  FrequencyModel model() const { return FrequencyModel(mass, dimension); }

  NonlinearityF nonlinearity() const { return NonlinearityF::from_taylor(f_taylor); }

  double derived_threshold() const {
    if (threshold > 0) return threshold;
    if (epsilon <= 0 || epsilon >= 1) return cutoff;
    return std::min(std::pow(epsilon, -double(order) / (s - s0)), cutoff);
  }

  double derived_horizon() const {
    if (horizon > 0) return horizon;
    if (epsilon <= 0) throw ConfigError("horizon derivation requires epsilon > 0");
    return long_run ? std::pow(epsilon, -double(order) / (s0 + 1.0)) : 1.0 / epsilon;
  }

  double derived_high_bound() const {
    return high_bound > 0 ? high_bound : 3.0 * order * derived_threshold();
  }
};

namespace detail {

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "dimension",      "mass",       "cutoff",          "threshold",   "order",
      "s",              "s0",         "epsilon",         "dt",          "horizon",
      "f2",             "f3",         "f4",              "f5",          "f6",
      "seed",           "divisor_floor", "dealias_factor", "stride",    "condition",
      "high_bound",     "scan_thresholds", "epsilons",   "long_run",    "init_state",
      "verify_radii",   "verify_samples", "flow_tol",    "blowup_factor"};
  return keys;
}

inline std::vector<double> parse_double_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("config: bad number '" + item + "' in list for key '" + key + "'");
    }
  }
  if (out.empty()) throw ConfigError("config: empty list for key '" + key + "'");
  return out;
}

inline std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += fmt17(v[i]);
  }
  return s;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Check every cross-field constraint; violations name the constraint.
inline void validate_config(const RunConfig& c) {
  auto refuse = [](const std::string& constraint) {
    throw ConfigError("config: violates " + constraint);
  };
  if (c.dimension < 1 || c.dimension > kMaxDim) refuse("dimension in {1,2,3}");
  if (!(c.mass > 0)) refuse("mass > 0");
  if (!(c.cutoff >= 1)) refuse("cutoff >= 1");
  if (c.order < 2) refuse("order >= 2");
  if (!(c.s > c.s0)) refuse("s > s0");
  if (!(c.s0 > 0.5 * c.dimension)) refuse("s0 > dimension/2");
  if (c.threshold != 0 && !(c.threshold >= 1)) refuse("threshold >= 1 (or 0 to derive)");
  if (c.threshold > c.cutoff) refuse("threshold <= cutoff");
  if (!(c.dt > 0)) refuse("dt > 0");
  if (!(c.epsilon >= 0)) refuse("epsilon >= 0");
  if (c.horizon < 0) refuse("horizon >= 0");
  if (!(c.divisor_floor > 0)) refuse("divisor_floor > 0");
  if (!(c.dealias_factor >= 1)) refuse("dealias_factor >= 1");
  if (c.stride < 1) refuse("stride >= 1");
  if (c.high_bound != 0 && !(c.high_bound > c.derived_threshold())) refuse("high_bound > threshold");
  if (!(c.blowup_factor > 1)) refuse("blowup_factor > 1");
  if (c.verify_samples < 1) refuse("verify_samples >= 1");
  if (!(c.flow_tol > 0)) refuse("flow_tol > 0");
  for (double n : c.scan_thresholds)
    if (!(n >= 1)) refuse("scan_thresholds entries >= 1");
  for (double e : c.epsilons)
    if (!(e > 0)) refuse("epsilons entries > 0");
  for (double rr : c.verify_radii)
    if (!(rr > 0)) refuse("verify_radii entries > 0");
  try {
    parse_condition(c.condition);
  } catch (const std::invalid_argument&) {
    refuse("condition in {H1, H2, H3}");
  }
}

/// Parse "key = value" lines ('#' starts a comment, '=' optional).  Unknown
/// keys are refused with the list of valid ones.
inline RunConfig parse_config(std::istream& is) {
  RunConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    std::string key, value;
    const auto eq = line.find('=');
    if (eq != std::string::npos) {
      key = detail::trim(line.substr(0, eq));
      value = detail::trim(line.substr(eq + 1));
    } else {
      const auto sp = line.find_first_of(" \t");
      if (sp == std::string::npos)
        throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
      key = detail::trim(line.substr(0, sp));
      value = detail::trim(line.substr(sp + 1));
    }
    const auto& keys = detail::config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      std::string known;
      for (const auto& k : keys) known += (known.empty() ? "" : ", ") + k;
      throw ConfigError("config: unknown key '" + key + "' (valid keys: " + known + ")");
    }
    auto as_double = [&](const char* what) {
      try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing");
        return v;
      } catch (const std::exception&) {
        throw ConfigError("config: bad " + std::string(what) + " for key '" + key + "': '" +
                          value + "'");
      }
    };
    auto as_int = [&](const char* what) {
      const double v = as_double(what);
      if (v != std::floor(v)) throw ConfigError("config: key '" + key + "' must be an integer");
      return static_cast<long long>(v);
    };
    if (key == "dimension") c.dimension = static_cast<int>(as_int("integer"));
    else if (key == "mass") c.mass = as_double("number");
    else if (key == "cutoff") c.cutoff = as_double("number");
    else if (key == "threshold") c.threshold = as_double("number");
    else if (key == "order") c.order = static_cast<int>(as_int("integer"));
    else if (key == "s") c.s = as_double("number");
    else if (key == "s0") c.s0 = as_double("number");
    else if (key == "epsilon") c.epsilon = as_double("number");
    else if (key == "dt") c.dt = as_double("number");
    else if (key == "horizon") c.horizon = as_double("number");
    else if (key == "f2" || key == "f3" || key == "f4" || key == "f5" || key == "f6") {
      const int p = key[1] - '0';
      const double v = as_double("number");
      if (v != 0.0) c.f_taylor[p] = v;
      else c.f_taylor.erase(p);
    } else if (key == "seed") c.seed = static_cast<unsigned long long>(as_int("integer"));
    else if (key == "divisor_floor") c.divisor_floor = as_double("number");
    else if (key == "dealias_factor") c.dealias_factor = as_double("number");
    else if (key == "stride") c.stride = static_cast<int>(as_int("integer"));
    else if (key == "condition") c.condition = value;
    else if (key == "high_bound") c.high_bound = as_double("number");
    else if (key == "scan_thresholds") c.scan_thresholds = detail::parse_double_list(value, key);
    else if (key == "epsilons") c.epsilons = detail::parse_double_list(value, key);
    else if (key == "long_run") c.long_run = as_int("flag") != 0;
    else if (key == "init_state") c.init_state = value;
    else if (key == "verify_radii") c.verify_radii = detail::parse_double_list(value, key);
    else if (key == "verify_samples") c.verify_samples = static_cast<int>(as_int("integer"));
    else if (key == "flow_tol") c.flow_tol = as_double("number");
    else if (key == "blowup_factor") c.blowup_factor = as_double("number");
  }
  validate_config(c);
  return c;
}

inline RunConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

/// Emit every key; parse(serialize(c)) reproduces c exactly.
inline void serialize_config(std::ostream& os, const RunConfig& c) {
  os << "dimension = " << c.dimension << '\n';
  os << "mass = " << fmt17(c.mass) << '\n';
  os << "cutoff = " << fmt17(c.cutoff) << '\n';
  os << "threshold = " << fmt17(c.threshold) << '\n';
  os << "order = " << c.order << '\n';
  os << "s = " << fmt17(c.s) << '\n';
  os << "s0 = " << fmt17(c.s0) << '\n';
  os << "epsilon = " << fmt17(c.epsilon) << '\n';
  os << "dt = " << fmt17(c.dt) << '\n';
  os << "horizon = " << fmt17(c.horizon) << '\n';
  for (int p = 2; p <= 6; ++p) {
    auto it = c.f_taylor.find(p);
    os << 'f' << p << " = " << fmt17(it == c.f_taylor.end() ? 0.0 : it->second) << '\n';
  }
  os << "seed = " << c.seed << '\n';
  os << "divisor_floor = " << fmt17(c.divisor_floor) << '\n';
  os << "dealias_factor = " << fmt17(c.dealias_factor) << '\n';
  os << "stride = " << c.stride << '\n';
  os << "condition = " << c.condition << '\n';
  os << "high_bound = " << fmt17(c.high_bound) << '\n';
  os << "scan_thresholds = " << detail::join_doubles(c.scan_thresholds) << '\n';
  os << "epsilons = " << detail::join_doubles(c.epsilons) << '\n';
  os << "long_run = " << (c.long_run ? 1 : 0) << '\n';
  os << "init_state = " << c.init_state << '\n';
  os << "verify_radii = " << detail::join_doubles(c.verify_radii) << '\n';
  os << "verify_samples = " << c.verify_samples << '\n';
  os << "flow_tol = " << fmt17(c.flow_tol) << '\n';
  os << "blowup_factor = " << fmt17(c.blowup_factor) << '\n';
}

inline std::string serialize_config_string(const RunConfig& c) {
  std::ostringstream os;
  serialize_config(os, c);
  return os.str();
}

}  // namespace birkhoff
