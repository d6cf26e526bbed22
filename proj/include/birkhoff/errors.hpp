#pragma once

#include <stdexcept>
#include <string>

namespace birkhoff {

/// Malformed or inconsistent run configuration.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A required division by a small divisor fell below the configured floor,
/// or a scan hit an exactly resonant frequency combination.
struct NearResonanceError : std::runtime_error {
  explicit NearResonanceError(const std::string& what) : std::runtime_error(what) {}
};

/// Adaptive integration failed (step-size underflow, radius guard, NaN).
struct IntegrationError : std::runtime_error {
  explicit IntegrationError(const std::string& what) : std::runtime_error(what) {}
};

/// A trajectory left the stability ball (norm grew past the abort factor).
struct BlowupError : std::runtime_error {
  double time = 0.0;
  BlowupError(const std::string& what, double t) : std::runtime_error(what), time(t) {}
};

/// Internal consistency violation (corrupted normal form data, non-real field).
struct ConsistencyError : std::runtime_error {
  explicit ConsistencyError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace birkhoff
