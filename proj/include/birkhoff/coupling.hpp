#pragma once

#include <algorithm>
#include <complex>
#include <map>
#include <utility>
#include <vector>

#include "birkhoff/errors.hpp"
#include "birkhoff/polynomial.hpp"
#include "birkhoff/state.hpp"

namespace birkhoff {

/// High-high coupling S = sum B_ab xi_a conj(xi_b) with the low modes frozen.
/// Hermitian by construction; zero outside the band |a-b| <= 3 r N that the
/// momentum constraint enforces.
struct CouplingMatrix {
  double threshold_N = 1.0;
  int order_r = 3;
  std::map<std::pair<ModeIndex, ModeIndex>, Complex> entries;

  Complex at(const ModeIndex& a, const ModeIndex& b) const {
    auto it = entries.find({a, b});
    return it == entries.end() ? Complex(0.0, 0.0) : it->second;
  }

  double band_limit() const { return 3.0 * order_r * threshold_N; }
};

namespace detail {

/// Low-factor product evaluated in site-major order, so a key and its
/// conjugate multiply exactly conjugate factor sequences.
inline Complex low_product(std::vector<SignedMode> lows, const SpectralState& low_state) {
  std::sort(lows.begin(), lows.end(), [](const SignedMode& x, const SignedMode& y) {
    if (!(x.index == y.index)) return x.index < y.index;
    return x.sign > y.sign;
  });
  Complex v(1.0, 0.0);
  for (const auto& e : lows) v *= HomogeneousPolynomial::factor_value(e, low_state);
  return v;
}

}  // namespace detail

/// Freeze the low modes of the symmetric normal-form part into the coupling
/// matrix.  Each key must carry exactly two modes above N with opposite signs;
/// anything else means the input is not a symmetric part.  Unordered high
/// pairs are processed once and mirrored, which keeps B exactly Hermitian.
inline CouplingMatrix extract_coupling_matrix(const GradedPolynomial& s_sym,
                                              const SpectralState& low_state, double N, int r) {
  if (N < 1.0) throw std::invalid_argument("extract_coupling_matrix: N must be >= 1");
  const double nsq = N * N;
  for (std::size_t i = 0; i < low_state.size(); ++i)
    if (low_state[i] != Complex(0.0, 0.0) &&
        double(low_state.lattice().mode(i).weight_sq()) > nsq)
      throw std::invalid_argument("extract_coupling_matrix: low state has support above N");

  CouplingMatrix B;
  B.threshold_N = N;
  B.order_r = r;
  for (const auto& [m, part] : s_sym.parts()) {
    (void)m;
    for (const auto& [k, c] : part.terms()) {
      const SignedMode* plus_high = nullptr;
      const SignedMode* minus_high = nullptr;
      int high_count = 0;
      std::vector<SignedMode> lows;
      for (const auto& e : k) {
        if (double(e.weight_sq()) > nsq) {
          ++high_count;
          (e.sign > 0 ? plus_high : minus_high) = &e;
        } else {
          lows.push_back(e);
        }
      }
      if (high_count != 2 || !plus_high || !minus_high)
        throw ConsistencyError("extract_coupling_matrix: key " + k.str() +
                               " is not a symmetric two-high term");
      const ModeIndex& a = plus_high->index;
      const ModeIndex& b = minus_high->index;
      if (b < a) continue;  // the conjugate key carries the transposed entry
      const Complex v = c * detail::low_product(std::move(lows), low_state);
      B.entries[{a, b}] += v;
      if (a == b) continue;
      B.entries[{b, a}] += std::conj(v);
    }
  }
  // drop exact zeros, force the diagonal real
  for (auto it = B.entries.begin(); it != B.entries.end();) {
    if (it->first.first == it->first.second) it->second = Complex(it->second.real(), 0.0);
    it = (it->second == Complex(0.0, 0.0)) ? B.entries.erase(it) : std::next(it);
  }
  return B;
}

}  // namespace birkhoff
