#pragma once

#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "birkhoff/errors.hpp"
#include "birkhoff/frequency.hpp"
#include "birkhoff/lie.hpp"
#include "birkhoff/polynomial.hpp"

namespace birkhoff {

struct NormalFormOptions {
  double divisor_floor = 1e-8;  // refuse divisions below this |Omega|
};

/// One degree of the homological splitting.  The generator is kept per class;
/// z_res collects resonant fully-low terms, s_sym the opposite-sign two-high
/// terms, p_remainder everything with three or more high modes.
struct HomologicalSplit {
  HomogeneousPolynomial chi_low, chi_one, chi_two;
  HomogeneousPolynomial z_res, s_sym, p_remainder;
  double min_divisor = std::numeric_limits<double>::infinity();

  explicit HomologicalSplit(int degree)
      : chi_low(degree), chi_one(degree), chi_two(degree), z_res(degree), s_sym(degree),
        p_remainder(degree) {}
};

/// Solve {H2, chi} + Q = X degreewise: eliminated keys get chi_k = q_k/(i Omega(k)),
/// kept keys land in the normal part X.  Two-high keys keep their symmetric
/// (opposite-sign) half; same-sign two-high keys are eliminated.
inline HomologicalSplit solve_homological(const HomogeneousPolynomial& Q,
                                          const FrequencyModel& model, double N,
                                          const NormalFormOptions& opts = {}) {
  if (N < 1.0) throw std::invalid_argument("solve_homological: N must be >= 1");
  HomologicalSplit split(Q.degree());
  for (const auto& [k, q] : Q.terms()) {
    const ModeClass cls = classify_by_high_modes(k, N);
    HomogeneousPolynomial* chi_target = nullptr;
    switch (cls) {
      case ModeClass::low:
        if (is_resonant(k)) {
          split.z_res.add_term(k, q);
          continue;
        }
        chi_target = &split.chi_low;
        break;
      case ModeClass::one_high:
        chi_target = &split.chi_one;
        break;
      case ModeClass::two_high: {
        int sign_sum = 0;
        const double nsq = N * N;
        for (const auto& e : k)
          if (double(e.weight_sq()) > nsq) sign_sum += e.sign;
        if (sign_sum == 0) {  // opposite signs: stays in the normal part
          split.s_sym.add_term(k, q);
          continue;
        }
        chi_target = &split.chi_two;
        break;
      }
      case ModeClass::many_high:
        split.p_remainder.add_term(k, q);
        continue;
    }
    const double omega = small_divisor(k, model);
    if (std::abs(omega) < opts.divisor_floor)
      throw NearResonanceError("solve_homological: divisor " + fmt17(omega) + " below floor " +
                               fmt17(opts.divisor_floor) + " at k = " + k.str());
    split.min_divisor = std::min(split.min_divisor, std::abs(omega));
    chi_target->add_term(k, q / Complex(0.0, omega));
  }
  return split;
}

/// Full normal form data through order r.
struct NormalFormResult {
  FrequencyModel model;
  double threshold_N = 1.0;
  int order_r = 3;
  double divisor_floor = 1e-8;

  GradedPolynomial chi_low, chi_one, chi_two;
  GradedPolynomial z_res, s_sym, p_remainder;

  std::map<int, double> chi_norm;     // linf record per generator degree
  std::map<int, double> normal_norm;  // linf record per normal-part degree
  double min_divisor = std::numeric_limits<double>::infinity();

  GradedPolynomial generator() const {
    GradedPolynomial g = chi_low;
    g.add(chi_one);
    g.add(chi_two);
    return g;
  }

  GradedPolynomial normal_part() const {
    GradedPolynomial g = z_res;
    g.add(s_sym);
    g.add(p_remainder);
    return g;
  }
};

/// Iterate the homological equation for m = 3..r against a single generator:
/// Q_m is the degree-m part of exp(ad_chi)(H2 + P) with the generator known so
/// far, and each degree's split removes what can be removed.
inline NormalFormResult birkhoff_normal_form(const GradedPolynomial& P, const FrequencyModel& model,
                                             double N, int r, const NormalFormOptions& opts = {}) {
  if (r < 3) throw std::invalid_argument("birkhoff_normal_form: r must be >= 3");
  if (!P.empty() && P.min_degree() < 3)
    throw std::invalid_argument("birkhoff_normal_form: P must have degrees >= 3");
  NormalFormResult out;
  out.model = model;
  out.threshold_N = N;
  out.order_r = r;
  out.divisor_floor = opts.divisor_floor;
  GradedPolynomial chi;
  for (int m = 3; m <= r; ++m) {
    GradedPolynomial composed = lie_series_compose(model, P, chi, m);
    HomogeneousPolynomial Q(m);
    if (composed.has_degree(m)) Q = composed.part(m);
    HomologicalSplit split = solve_homological(Q, model, N, opts);
    out.min_divisor = std::min(out.min_divisor, split.min_divisor);

    GradedPolynomial chi_m;
    chi_m.add(split.chi_low);
    chi_m.add(split.chi_one);
    chi_m.add(split.chi_two);
    if (!chi_m.empty()) out.chi_norm[m] = chi_m.part(m).linf_norm();
    chi.add(chi_m);

    HomogeneousPolynomial normal_m(m);
    normal_m += split.z_res;
    normal_m += split.s_sym;
    normal_m += split.p_remainder;
    if (!normal_m.empty()) out.normal_norm[m] = normal_m.linf_norm();

    out.chi_low.add(split.chi_low);
    out.chi_one.add(split.chi_one);
    out.chi_two.add(split.chi_two);
    out.z_res.add(split.z_res);
    out.s_sym.add(split.s_sym);
    out.p_remainder.add(split.p_remainder);
  }
  return out;
}

/// Max coefficient of {H2, chi_m} + Q_m - X_m, which vanishes when the
/// degree-m homological equation holds.
inline double homological_residual(const HomogeneousPolynomial& chi_m,
                                   const HomogeneousPolynomial& Q_m,
                                   const HomogeneousPolynomial& X_m, const FrequencyModel& model) {
  HomogeneousPolynomial res = h2_bracket(chi_m, model);
  res += Q_m;
  res += X_m.scaled(Complex(-1.0, 0.0));
  return res.max_abs_coeff();
}

inline double h2_value(const SpectralState& z, const FrequencyModel& model) {
  double acc = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i)
    acc += model.frequency(z.lattice().mode(i)) * std::norm(z[i]);
  return acc;
}

struct VerifyReport {
  std::vector<double> radii;
  std::vector<double> max_defect;  // max |Delta| per radius
  double exponent = 0.0;           // fitted log-log slope of the defect
};

/// Defect Delta(z) = [H2+P](Phi_chi(z)) - [H2+Z+S+Pr](z) sampled on random
/// states of prescribed l2 norm; the H2 part enters as the closed-form
/// difference sum omega_a (|xi'_a|^2 - |xi_a|^2).  For an order-r normal form
/// the fitted slope approaches r+1.
inline VerifyReport verify_normal_form(const NormalFormResult& nf, const GradedPolynomial& P,
                                       std::shared_ptr<const Lattice> lattice,
                                       const std::vector<double>& radii, int samples_per_radius,
                                       std::uint64_t seed, LieFlowOptions flow = {}) {
  if (radii.size() < 2) throw std::invalid_argument("verify_normal_form: need >= 2 radii");
  if (samples_per_radius < 1)
    throw std::invalid_argument("verify_normal_form: need >= 1 sample per radius");
  const GradedPolynomial chi = nf.generator();
  const GradedPolynomial normal = nf.normal_part();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  VerifyReport report;
  report.radii = radii;
  for (double radius : radii) {
    flow.radius = std::max(flow.radius, 16.0 * radius);
    double worst = 0.0;
    for (int s = 0; s < samples_per_radius; ++s) {
      SpectralState z(lattice);
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = Complex(gauss(rng), gauss(rng));
      const double nrm = mixed_norm(z, 0.0);
      if (nrm == 0.0) continue;
      z *= radius / nrm;
      SpectralState image = lie_flow(chi, z, 1.0, flow);
      double delta = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i)
        delta += nf.model.frequency(z.lattice().mode(i)) * (std::norm(image[i]) - std::norm(z[i]));
      delta += P.evaluate(image) - normal.evaluate(z);
      worst = std::max(worst, std::abs(delta));
    }
    report.max_defect.push_back(worst);
  }
  // log-log least squares for the decay exponent
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const std::size_t n = radii.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(radii[i]);
    const double y = std::log(std::max(report.max_defect[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  report.exponent = (double(n) * sxy - sx * sy) / (double(n) * sxx - sx * sx);
  return report;
}

// --- serialization -----------------------------------------------------------
//
// Metadata lines, then one "section <name>" block per stored class, each in
// the polynomial text format.

inline void write_normal_form(std::ostream& os, const NormalFormResult& nf) {
  os << "# birkhoff normal form\n";
  os << "meta dim " << nf.model.dim << '\n';
  os << "meta mass " << fmt17(nf.model.mass) << '\n';
  os << "meta N " << fmt17(nf.threshold_N) << '\n';
  os << "meta r " << nf.order_r << '\n';
  os << "meta divisor_floor " << fmt17(nf.divisor_floor) << '\n';
  os << "meta min_divisor " << fmt17(nf.min_divisor) << '\n';
  for (const auto& [m, v] : nf.chi_norm) os << "meta chi_norm " << m << ' ' << fmt17(v) << '\n';
  for (const auto& [m, v] : nf.normal_norm)
    os << "meta normal_norm " << m << ' ' << fmt17(v) << '\n';
  const std::pair<const char*, const GradedPolynomial*> sections[] = {
      {"chi_low", &nf.chi_low},   {"chi_one", &nf.chi_one}, {"chi_two", &nf.chi_two},
      {"z_res", &nf.z_res},       {"s_sym", &nf.s_sym},     {"p_remainder", &nf.p_remainder}};
  for (const auto& [name, poly] : sections) {
    os << "section " << name << '\n';
    write_polynomial(os, *poly);
  }
}

inline NormalFormResult read_normal_form(std::istream& is) {
  NormalFormResult nf;
  double mass = 1.0;
  int dim = 1;
  GradedPolynomial* section = nullptr;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream in(line);
    std::string tag;
    in >> tag;
    if (tag == "meta") {
      std::string key;
      in >> key;
      if (key == "dim")
        in >> dim;
      else if (key == "mass")
        in >> mass;
      else if (key == "N")
        in >> nf.threshold_N;
      else if (key == "r")
        in >> nf.order_r;
      else if (key == "divisor_floor")
        in >> nf.divisor_floor;
      else if (key == "min_divisor")
        in >> nf.min_divisor;
      else if (key == "chi_norm") {
        int m;
        double v;
        in >> m >> v;
        nf.chi_norm[m] = v;
      } else if (key == "normal_norm") {
        int m;
        double v;
        in >> m >> v;
        nf.normal_norm[m] = v;
      } else {
        throw std::invalid_argument("read_normal_form: unknown meta key " + key);
      }
    } else if (tag == "section") {
      std::string name;
      in >> name;
      if (name == "chi_low")
        section = &nf.chi_low;
      else if (name == "chi_one")
        section = &nf.chi_one;
      else if (name == "chi_two")
        section = &nf.chi_two;
      else if (name == "z_res")
        section = &nf.z_res;
      else if (name == "s_sym")
        section = &nf.s_sym;
      else if (name == "p_remainder")
        section = &nf.p_remainder;
      else
        throw std::invalid_argument("read_normal_form: unknown section " + name);
    } else if (tag == "deg") {
      if (!section) throw std::invalid_argument("read_normal_form: monomial before any section");
      int degree = 0;
      MultiIndex key;
      Complex coeff;
      if (parse_polynomial_line(line, degree, key, coeff)) section->add_term(degree, key, coeff);
    } else {
      throw std::invalid_argument("read_normal_form: unrecognized line: " + line);
    }
  }
  nf.model = FrequencyModel(mass, dim);
  return nf;
}

}  // namespace birkhoff
