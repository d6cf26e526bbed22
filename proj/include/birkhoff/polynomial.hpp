#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "birkhoff/errors.hpp"
#include "birkhoff/modes.hpp"
#include "birkhoff/state.hpp"

namespace birkhoff {

/// %.17g rendering, enough digits for exact double round-trips.
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Number of ordered arrangements of the multiset k (multinomial count).
inline double arrangement_count(const MultiIndex& k) {
  double count = 1.0;
  std::size_t slot = 1;  // running position while walking equal-entry runs
  std::size_t run = 1;
  for (std::size_t i = 1; i < k.size(); ++i) {
    run = (k[i] == k[i - 1]) ? run + 1 : 1;
    ++slot;
    count *= double(slot) / double(run);
  }
  return count;
}

/// Homogeneous polynomial of degree m >= 2 in the doubled variables,
/// stored as one canonical sorted key per monomial.  The stored coefficient
/// is the total coefficient of the monomial function, i.e. it absorbs the
/// arrangement count of the ordered-sum picture.  Every key has zero momentum.
class HomogeneousPolynomial {
 public:
  explicit HomogeneousPolynomial(int degree) : degree_(degree) {
    if (degree < 2) throw std::invalid_argument("HomogeneousPolynomial: degree must be >= 2");
  }

  int degree() const { return degree_; }
  bool empty() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }
  const std::map<MultiIndex, Complex>& terms() const { return terms_; }

  void add_term(const MultiIndex& k, Complex c) {
    if (static_cast<int>(k.size()) != degree_)
      throw std::invalid_argument("add_term: key length does not match degree");
    if (!has_zero_momentum(k))
      throw std::invalid_argument("add_term: key " + k.str() + " has nonzero momentum");
    auto [it, inserted] = terms_.emplace(k, c);
    if (!inserted) {
      it->second += c;
      if (it->second == Complex(0.0, 0.0)) terms_.erase(it);
    } else if (c == Complex(0.0, 0.0)) {
      terms_.erase(it);
    }
  }

  Complex coefficient(const MultiIndex& k) const {
    auto it = terms_.find(k);
    return it == terms_.end() ? Complex(0.0, 0.0) : it->second;
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (const auto& [k, c] : terms_) {
      (void)k;
      m = std::max(m, std::abs(c));
    }
    return m;
  }

  /// Sup norm of the symmetrized ordered-sum coefficients, |c_k| divided by
  /// the arrangement count.  This is the normalization the bracket bound
  /// 2 m n ||c|| ||c'|| refers to.
  double linf_norm() const {
    double m = 0.0;
    for (const auto& [k, c] : terms_) m = std::max(m, std::abs(c) / arrangement_count(k));
    return m;
  }

  Complex evaluate_complex(const SpectralState& z) const {
    Complex acc(0.0, 0.0);
    for (const auto& [k, c] : terms_) acc += c * monomial_value(k, z);
    return acc;
  }

  /// Value of the polynomial; real polynomials give a vanishing imaginary
  /// part, available through evaluate_complex.
  double evaluate(const SpectralState& z) const { return evaluate_complex(z).real(); }

  /// Hamiltonian vector field in the xi coordinates: (X_P)_a = -i dP/d(conj xi_a).
  SpectralState vector_field(const SpectralState& z) const {
    SpectralState out(z.lattice_ptr());
    const Complex minus_i(0.0, -1.0);
    for (const auto& [k, c] : terms_) {
      for (std::size_t i = 0; i < k.size(); ++i) {
        if (i > 0 && k[i] == k[i - 1]) continue;  // one pass per distinct entry
        if (k[i].sign != -1) continue;
        const double mult = multiplicity(k, i);
        out.at(k[i].index) += minus_i * mult * c * monomial_value_without(k, i, z);
      }
    }
    return out;
  }

  HomogeneousPolynomial scaled(Complex f) const {
    HomogeneousPolynomial p(degree_);
    if (f == Complex(0.0, 0.0)) return p;
    for (const auto& [k, c] : terms_) p.terms_[k] = f * c;
    return p;
  }

  HomogeneousPolynomial& operator+=(const HomogeneousPolynomial& o) {
    if (o.degree_ != degree_) throw std::invalid_argument("operator+=: degree mismatch");
    for (const auto& [k, c] : o.terms_) add_term(k, c);
    return *this;
  }

  HomogeneousPolynomial conjugated() const {
    HomogeneousPolynomial p(degree_);
    for (const auto& [k, c] : terms_) p.terms_[k.conjugated()] = std::conj(c);
    return p;
  }

  /// Largest |c_k - conj(c_{conj k})| over the stored keys.
  double reality_defect() const {
    double d = 0.0;
    for (const auto& [k, c] : terms_) {
      const MultiIndex kc = k.conjugated();
      d = std::max(d, std::abs(c - std::conj(coefficient(kc))));
    }
    return d;
  }

  /// Restore exact reality by averaging mirror pairs.  Mirrored floating
  /// accumulation can differ in the last ulps; a defect beyond the tolerance
  /// means a genuine asymmetry upstream and is refused.
  void enforce_reality(double rel_tol = 1e-9) {
    const double scale = std::max(1e-300, max_abs_coeff());
    if (reality_defect() > rel_tol * scale)
      throw ConsistencyError("enforce_reality: coefficients are not conjugate-symmetric");
    std::map<MultiIndex, Complex> fixed;
    for (const auto& [k, c] : terms_) {
      const MultiIndex kc = k.conjugated();
      if (kc == k) {
        if (c.real() != 0.0) fixed[k] = Complex(c.real(), 0.0);
      } else if (k < kc) {
        const Complex avg = 0.5 * (c + std::conj(coefficient(kc)));
        if (avg != Complex(0.0, 0.0)) {
          fixed[k] = avg;
          fixed[kc] = std::conj(avg);
        }
      }
    }
    terms_ = std::move(fixed);
  }

  static double multiplicity(const MultiIndex& k, std::size_t i) {
    double m = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j)
      if (k[j] == k[i]) m += 1.0;
    return m;
  }

  static Complex monomial_value(const MultiIndex& k, const SpectralState& z) {
    Complex v(1.0, 0.0);
    for (const auto& e : k) v *= factor_value(e, z);
    return v;
  }

  static Complex monomial_value_without(const MultiIndex& k, std::size_t skip,
                                        const SpectralState& z) {
    Complex v(1.0, 0.0);
    for (std::size_t j = 0; j < k.size(); ++j) {
      if (j == skip) continue;
      v *= factor_value(k[j], z);
    }
    return v;
  }

  static Complex factor_value(const SignedMode& e, const SpectralState& z) {
    const Complex xi = z.at(e.index);
    return e.sign > 0 ? xi : std::conj(xi);
  }

 private:
  int degree_;
  std::map<MultiIndex, Complex> terms_;
};

/// Canonical Poisson bracket {F,G} = -i sum_a (dF/dxi_a dG/dconj_a - dF/dconj_a dG/dxi_a).
/// Homogeneous inputs of degrees m and n give degree m+n-2, and the
/// ordered-normalized sup norms obey ||{F,G}|| <= 2 m n ||F|| ||G||.
inline HomogeneousPolynomial poisson_bracket(const HomogeneousPolynomial& F,
                                             const HomogeneousPolynomial& G) {
  const int m = F.degree(), n = G.degree();
  HomogeneousPolynomial out(m + n - 2);
  for (const auto& [kf, cf] : F.terms()) {
    for (const auto& [kg, cg] : G.terms()) {
      for (std::size_t i = 0; i < kf.size(); ++i) {
        if (i > 0 && kf[i] == kf[i - 1]) continue;
        const SignedMode& e = kf[i];
        const SignedMode partner = e.conjugate();
        double mult_g = 0.0;
        for (std::size_t j = 0; j < kg.size(); ++j)
          if (kg[j] == partner) mult_g += 1.0;
        if (mult_g == 0.0) continue;
        const double mult_f = HomogeneousPolynomial::multiplicity(kf, i);
        // +1 entry differentiated in F pairs with the -i term, -1 with +i.
        const Complex factor(0.0, e.sign > 0 ? -mult_f * mult_g : mult_f * mult_g);
        out.add_term(kf.without(e).merged(kg.without(partner)), factor * cf * cg);
      }
    }
  }
  if (!out.empty() && F.reality_defect() == 0.0 && G.reality_defect() == 0.0)
    out.enforce_reality();
  return out;
}

/// Polynomial graded by degree; absent degrees are zero.
class GradedPolynomial {
 public:
  GradedPolynomial() = default;

  bool empty() const {
    for (const auto& [m, p] : parts_) {
      (void)m;
      if (!p.empty()) return false;
    }
    return true;
  }

  const std::map<int, HomogeneousPolynomial>& parts() const { return parts_; }

  std::vector<int> degrees() const {
    std::vector<int> d;
    for (const auto& [m, p] : parts_)
      if (!p.empty()) d.push_back(m);
    return d;
  }

  bool has_degree(int m) const {
    auto it = parts_.find(m);
    return it != parts_.end() && !it->second.empty();
  }

  const HomogeneousPolynomial& part(int m) const {
    auto it = parts_.find(m);
    if (it == parts_.end()) throw std::invalid_argument("GradedPolynomial: degree absent");
    return it->second;
  }

  void set_part(HomogeneousPolynomial p) {
    const int m = p.degree();
    auto it = parts_.find(m);
    if (it == parts_.end())
      parts_.emplace(m, std::move(p));
    else
      it->second = std::move(p);
  }

  void add(const HomogeneousPolynomial& p) {
    auto it = parts_.find(p.degree());
    if (it == parts_.end())
      parts_.emplace(p.degree(), p);
    else
      it->second += p;
  }

  void add(const GradedPolynomial& g) {
    for (const auto& [m, p] : g.parts_) {
      (void)m;
      add(p);
    }
  }

  void add_term(int degree, const MultiIndex& k, Complex c) {
    auto it = parts_.find(degree);
    if (it == parts_.end()) it = parts_.emplace(degree, HomogeneousPolynomial(degree)).first;
    it->second.add_term(k, c);
  }

  int min_degree() const {
    for (const auto& [m, p] : parts_)
      if (!p.empty()) return m;
    return 0;
  }
  int max_degree() const {
    int r = 0;
    for (const auto& [m, p] : parts_)
      if (!p.empty()) r = m;
    return r;
  }

  std::size_t term_count() const {
    std::size_t n = 0;
    for (const auto& [m, p] : parts_) {
      (void)m;
      n += p.term_count();
    }
    return n;
  }

  double evaluate(const SpectralState& z) const {
    double acc = 0.0;
    for (const auto& [m, p] : parts_) {
      (void)m;
      acc += p.evaluate(z);
    }
    return acc;
  }

  SpectralState vector_field(const SpectralState& z) const {
    SpectralState out(z.lattice_ptr());
    for (const auto& [m, p] : parts_) {
      (void)m;
      out += p.vector_field(z);
    }
    return out;
  }

  GradedPolynomial scaled(Complex f) const {
    GradedPolynomial g;
    for (const auto& [m, p] : parts_) {
      (void)m;
      g.set_part(p.scaled(f));
    }
    return g;
  }

  void drop_above(int r) {
    for (auto it = parts_.begin(); it != parts_.end();)
      it = (it->first > r) ? parts_.erase(it) : std::next(it);
  }

 private:
  std::map<int, HomogeneousPolynomial> parts_;
};

// --- text serialization ------------------------------------------------------
//
// One monomial per line:
//   deg 3 | (+1,1) (+1,1) (-1,2) | 2.5000000000000000e-01 0
// Entries appear in canonical order; the two trailing fields are Re and Im of
// the stored coefficient at 17 significant digits.

inline void write_polynomial_line(std::ostream& os, int degree, const MultiIndex& k, Complex c) {
  os << "deg " << degree << " | " << k.str() << " | " << fmt17(c.real()) << ' '
     << fmt17(c.imag()) << '\n';
}

inline void write_polynomial(std::ostream& os, const HomogeneousPolynomial& p) {
  for (const auto& [k, c] : p.terms()) write_polynomial_line(os, p.degree(), k, c);
}

inline void write_polynomial(std::ostream& os, const GradedPolynomial& g) {
  for (const auto& [m, p] : g.parts()) {
    (void)m;
    write_polynomial(os, p);
  }
}

inline SignedMode parse_signed_mode(const std::string& tok) {
  if (tok.size() < 6 || tok.front() != '(' || tok.back() != ')')
    throw std::invalid_argument("parse_signed_mode: bad token '" + tok + "'");
  std::string body = tok.substr(1, tok.size() - 2);
  std::vector<int> parts;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    std::size_t comma = body.find(',', pos);
    std::string piece = body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    std::size_t used = 0;
    int v = std::stoi(piece, &used);
    if (used != piece.size()) throw std::invalid_argument("parse_signed_mode: bad token '" + tok + "'");
    parts.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (parts.size() < 2 || parts.size() > 1 + kMaxDim)
    throw std::invalid_argument("parse_signed_mode: bad arity in '" + tok + "'");
  std::array<int, kMaxDim> a{0, 0, 0};
  for (std::size_t i = 1; i < parts.size(); ++i) a[i - 1] = parts[i];
  return SignedMode(parts[0], ModeIndex(a, static_cast<int>(parts.size()) - 1));
}

/// Parse one serialized line; returns false on blank/comment lines.
inline bool parse_polynomial_line(const std::string& line, int& degree, MultiIndex& key,
                                  Complex& coeff) {
  std::string trimmed = line;
  const auto b = trimmed.find_first_not_of(" \t\r");
  if (b == std::string::npos) return false;
  if (trimmed[b] == '#') return false;
  std::istringstream in(trimmed);
  std::string tag, bar;
  int deg = 0;
  if (!(in >> tag >> deg) || tag != "deg")
    throw std::invalid_argument("polynomial parse: expected 'deg <m>' in: " + line);
  if (!(in >> bar) || bar != "|")
    throw std::invalid_argument("polynomial parse: expected '|' in: " + line);
  std::vector<SignedMode> entries;
  std::string tok;
  while (in >> tok && tok != "|") entries.push_back(parse_signed_mode(tok));
  if (tok != "|") throw std::invalid_argument("polynomial parse: missing closing '|' in: " + line);
  double re = 0, im = 0;
  if (!(in >> re >> im))
    throw std::invalid_argument("polynomial parse: missing coefficient in: " + line);
  if (static_cast<int>(entries.size()) != deg)
    throw std::invalid_argument("polynomial parse: entry count != degree in: " + line);
  degree = deg;
  key = MultiIndex(std::move(entries));
  coeff = Complex(re, im);
  return true;
}

inline GradedPolynomial read_polynomial(std::istream& is) {
  GradedPolynomial g;
  std::string line;
  while (std::getline(is, line)) {
    int degree = 0;
    MultiIndex key;
    Complex coeff;
    if (parse_polynomial_line(line, degree, key, coeff)) g.add_term(degree, key, coeff);
  }
  return g;
}

}  // namespace birkhoff
