#pragma once

#include <cmath>
#include <stdexcept>

#include "birkhoff/modes.hpp"

namespace birkhoff {

/// Dispersion relation omega_a = sqrt(|a|^2 + m) of the Klein-Gordon wave
/// operator with mass m > 0.
struct FrequencyModel {
  double mass = 1.0;
  int dim = 1;

  FrequencyModel() = default;
  FrequencyModel(double m, int d) : mass(m), dim(d) {
    if (!(m > 0)) throw std::invalid_argument("FrequencyModel: mass must be positive");
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("FrequencyModel: dim must be 1..3");
  }

  double frequency(const ModeIndex& a) const { return std::sqrt(double(a.norm_sq()) + mass); }
};

/// Small divisor Omega(k) = -sum_i s_i omega_{a_i}.  Vanishes identically on
/// resonant multi-indices for every mass.
inline double small_divisor(const MultiIndex& k, const FrequencyModel& model) {
  if (k.dim() != model.dim) throw std::invalid_argument("small_divisor: dimension mismatch");
  double s = 0.0;
  for (const auto& e : k) s -= e.sign * model.frequency(e.index);
  return s;
}

}  // namespace birkhoff
