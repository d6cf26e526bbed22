#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "birkhoff/frequency.hpp"
#include "birkhoff/polynomial.hpp"
#include "birkhoff/state.hpp"

namespace birkhoff {

/// Analytic nonlinearity f with f(0) = f'(0) = 0, kept as Taylor coefficients
/// f_p for p >= 2, so f(u) = sum_p f_p u^p.  The primitive F has F(0) = 0.
class NonlinearityF {
 public:
  NonlinearityF() = default;

  static NonlinearityF from_taylor(const std::map<int, double>& coeffs) {
    NonlinearityF f;
    for (const auto& [p, c] : coeffs) {
      if (p < 2) throw std::invalid_argument("NonlinearityF: coefficients start at degree 2");
      if (c == 0.0) continue;
      if (f.coeff_.size() < std::size_t(p + 1)) f.coeff_.resize(std::size_t(p + 1), 0.0);
      f.coeff_[std::size_t(p)] = c;
    }
    return f;
  }

  bool is_zero() const { return coeff_.empty(); }

  /// Highest degree with a nonzero coefficient, 0 when f == 0.
  int top_degree() const { return coeff_.empty() ? 0 : static_cast<int>(coeff_.size()) - 1; }

  double coeff(int p) const {
    return (p >= 0 && std::size_t(p) < coeff_.size()) ? coeff_[std::size_t(p)] : 0.0;
  }

  double f(double u) const {
    double acc = 0.0;
    for (int p = top_degree(); p >= 2; --p) acc = acc * u + coeff_[std::size_t(p)];
    return acc * u * u;
  }

  /// Primitive F(u) = sum_p f_p u^{p+1}/(p+1).
  double primitive(double u) const {
    double acc = 0.0;
    for (int p = top_degree(); p >= 2; --p) acc = acc * u + coeff_[std::size_t(p)] / double(p + 1);
    return acc * u * u * u;
  }

 private:
  std::vector<double> coeff_;
};

namespace detail {

/// All signed modes over the lattice in canonical order.
inline std::vector<SignedMode> signed_modes(const Lattice& lat) {
  std::vector<SignedMode> v;
  v.reserve(2 * lat.size());
  for (const auto& a : lat.modes()) v.emplace_back(+1, a);
  for (const auto& a : lat.modes()) v.emplace_back(-1, a);
  std::sort(v.begin(), v.end());
  return v;
}

/// Enumerate canonical (non-decreasing) multisets of the given length with
/// zero total momentum.  Pruning: remaining entries shift each momentum
/// component by at most remaining * max_comp.
template <typename Visit>
void for_each_zero_momentum_multiset(const std::vector<SignedMode>& pool, int dim, int length,
                                     int max_comp, Visit&& visit) {
  std::vector<SignedMode> current;
  current.reserve(std::size_t(length));
  std::array<long long, kMaxDim> mom{0, 0, 0};
  auto rec = [&](auto&& self, std::size_t start, int remaining) -> void {
    if (remaining == 0) {
      bool zero = true;
      for (int i = 0; i < dim; ++i) zero = zero && mom[std::size_t(i)] == 0;
      if (zero) visit(current);
      return;
    }
    const long long reach = static_cast<long long>(remaining) * max_comp;
    for (int i = 0; i < dim; ++i)
      if (std::llabs(mom[std::size_t(i)]) > reach) return;
    for (std::size_t j = start; j < pool.size(); ++j) {
      current.push_back(pool[j]);
      for (int i = 0; i < dim; ++i) mom[std::size_t(i)] += pool[j].sign * pool[j].index[i];
      self(self, j, remaining - 1);
      for (int i = 0; i < dim; ++i) mom[std::size_t(i)] -= pool[j].sign * pool[j].index[i];
      current.pop_back();
    }
  };
  rec(rec, 0, length);
}

}  // namespace detail

/// Taylor expansion of the wave Hamiltonian's nonlinear part through degree r
/// on the cutoff lattice: P = sum_q F_q integral-average of u^q, with
/// u = sum_a (xi_a e^{iax} + conj(xi_a) e^{-iax}) / sqrt(2 omega_a).
/// Each canonical key gets coefficient F_q * (ordered arrangements) *
/// prod_i (2 omega_{a_i})^{-1/2}.
inline GradedPolynomial taylor_expand_nlw(const NonlinearityF& f, const FrequencyModel& model,
                                          double cutoff, int r) {
  if (r < 3) throw std::invalid_argument("taylor_expand_nlw: r must be >= 3");
  GradedPolynomial out;
  if (f.is_zero()) return out;
  const Lattice lat(model.dim, cutoff);
  const auto pool = detail::signed_modes(lat);
  const int max_comp = lat.max_component();
  std::map<ModeIndex, double> inv_sqrt_2w;
  for (const auto& a : lat.modes()) inv_sqrt_2w[a] = 1.0 / std::sqrt(2.0 * model.frequency(a));
  for (int q = 3; q <= r; ++q) {
    const double fq = f.coeff(q - 1) / double(q);  // primitive coefficient F_q
    if (fq == 0.0) continue;
    HomogeneousPolynomial part(q);
    std::vector<ModeIndex> sites;
    detail::for_each_zero_momentum_multiset(
        pool, model.dim, q, max_comp, [&](const std::vector<SignedMode>& entries) {
          MultiIndex k(entries);
          double amp = fq * arrangement_count(k);
          // multiply in site order, so conjugate keys get bit-identical
          // coefficients and the parts are real exactly
          sites.clear();
          for (const auto& e : k) sites.push_back(e.index);
          std::sort(sites.begin(), sites.end());
          for (const auto& s : sites) amp *= inv_sqrt_2w[s];
          part.add_term(k, Complex(amp, 0.0));
        });
    if (!part.empty()) out.set_part(std::move(part));
  }
  return out;
}

}  // namespace birkhoff
