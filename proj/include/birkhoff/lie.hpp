#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "birkhoff/errors.hpp"
#include "birkhoff/frequency.hpp"
#include "birkhoff/polynomial.hpp"
#include "birkhoff/state.hpp"

namespace birkhoff {

/// {H2, P} termwise via the closed form {H2, z_k} = -i Omega(k) z_k with
/// Omega(k) = -sum_i s_i omega_{a_i}.  H2 itself is never materialized.
inline HomogeneousPolynomial h2_bracket(const HomogeneousPolynomial& p,
                                        const FrequencyModel& model) {
  HomogeneousPolynomial out(p.degree());
  for (const auto& [k, c] : p.terms()) {
    const double omega = small_divisor(k, model);
    if (omega != 0.0) out.add_term(k, Complex(0.0, -omega) * c);
  }
  return out;
}

inline GradedPolynomial h2_bracket(const GradedPolynomial& g, const FrequencyModel& model) {
  GradedPolynomial out;
  for (const auto& [m, p] : g.parts()) {
    (void)m;
    out.set_part(h2_bracket(p, model));
  }
  return out;
}

/// {G, chi} for graded operands, truncated to degrees <= r.
inline GradedPolynomial graded_bracket(const GradedPolynomial& G, const GradedPolynomial& chi,
                                       int r) {
  GradedPolynomial out;
  for (const auto& [mg, pg] : G.parts()) {
    if (pg.empty()) continue;
    for (const auto& [mc, pc] : chi.parts()) {
      if (pc.empty()) continue;
      if (mg + mc - 2 > r) continue;
      out.add(poisson_bracket(pg, pc));
    }
  }
  return out;
}

/// Degrees <= r of exp(ad_chi)(H2 + P) minus H2, where ad_chi F = {F, chi}
/// is the derivative of F along the chi flow.  The H2 branch starts from the
/// closed-form bracket; each further ad raises the minimum degree, so the
/// series terminates.  chi must have degrees >= 3.
inline GradedPolynomial lie_series_compose(const FrequencyModel& model, const GradedPolynomial& P,
                                           const GradedPolynomial& chi, int r) {
  if (r < 2) throw std::invalid_argument("lie_series_compose: r must be >= 2");
  if (!chi.empty() && chi.min_degree() < 3)
    throw std::invalid_argument("lie_series_compose: chi must have degrees >= 3");
  GradedPolynomial result;
  for (const auto& [m, p] : P.parts())
    if (m <= r) result.add(p);
  if (chi.empty()) return result;

  // H2 branch: ad H2 = {H2, chi}, then repeated generic brackets.
  GradedPolynomial term = h2_bracket(chi, model);
  term.drop_above(r);
  double factorial = 1.0;
  result.add(term);
  for (int k = 2; !term.empty(); ++k) {
    term = graded_bracket(term, chi, r);
    factorial *= double(k);
    if (term.empty()) break;
    result.add(term.scaled(Complex(1.0 / factorial, 0.0)));
  }

  // P branch.
  term = P;
  term.drop_above(r);
  factorial = 1.0;
  for (int k = 1; !term.empty(); ++k) {
    term = graded_bracket(term, chi, r);
    factorial *= double(k);
    if (term.empty()) break;
    result.add(term.scaled(Complex(1.0 / factorial, 0.0)));
  }
  result.drop_above(r);
  return result;
}

struct LieFlowOptions {
  double tol = 1e-12;       // adaptive error target (mixed absolute/relative)
  double radius = 1.0;      // refuse states whose l2 norm leaves this ball
  double initial_dt = 0.1;
  double min_dt = 1e-13;
  int max_steps = 2000000;
};

/// Time-t map of the Hamiltonian flow of chi, via an embedded Dormand-Prince
/// 5(4) pair on the xi components.
inline SpectralState lie_flow(const GradedPolynomial& chi, const SpectralState& z0, double t,
                              const LieFlowOptions& opts = {}) {
  if (mixed_norm(z0, 0.0) > opts.radius)
    throw IntegrationError("lie_flow: initial state outside configured radius");
  if (t == 0.0 || chi.empty()) return z0;

  static constexpr double a2 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                          e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                          e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

  const double dir = t > 0 ? 1.0 : -1.0;
  const double t_end = std::abs(t);
  SpectralState y = z0;
  const std::size_t n = y.size();
  auto field = [&](const SpectralState& s) {
    SpectralState f = chi.vector_field(s);
    f *= dir;
    return f;
  };
  double time = 0.0;
  double h = std::min(opts.initial_dt, t_end);
  SpectralState k1 = field(y);
  for (int step = 0; step < opts.max_steps; ++step) {
    if (time >= t_end) return y;
    h = std::min(h, t_end - time);
    if (h < opts.min_dt) throw IntegrationError("lie_flow: step size underflow");

    SpectralState w(y.lattice_ptr());
    for (std::size_t i = 0; i < n; ++i) w[i] = y[i] + h * a2 * k1[i];
    SpectralState k2 = field(w);
    for (std::size_t i = 0; i < n; ++i) w[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    SpectralState k3 = field(w);
    for (std::size_t i = 0; i < n; ++i)
      w[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    SpectralState k4 = field(w);
    for (std::size_t i = 0; i < n; ++i)
      w[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    SpectralState k5 = field(w);
    for (std::size_t i = 0; i < n; ++i)
      w[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    SpectralState k6 = field(w);
    SpectralState y1(y.lattice_ptr());
    for (std::size_t i = 0; i < n; ++i)
      y1[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    SpectralState k7 = field(y1);

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Complex e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                             e7 * k7[i]);
      const double sc = opts.tol * (1.0 + std::max(std::abs(y[i]), std::abs(y1[i])));
      err = std::max(err, std::abs(e) / sc);
    }
    if (err <= 1.0) {
      time += h;
      y = std::move(y1);
      k1 = std::move(k7);  // first-same-as-last
      if (mixed_norm(y, 0.0) > 2.0 * opts.radius)
        throw IntegrationError("lie_flow: trajectory left the stability ball");
    }
    const double grow = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    h *= std::min(5.0, std::max(0.2, grow));
  }
  throw IntegrationError("lie_flow: step budget exhausted");
}

}  // namespace birkhoff
