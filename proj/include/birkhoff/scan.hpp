#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "birkhoff/errors.hpp"
#include "birkhoff/frequency.hpp"
#include "birkhoff/modes.hpp"
#include "birkhoff/state.hpp"

namespace birkhoff {

/// Families of small-divisor bounds: interior-only (H1), one exterior mode
/// closing the momentum (H2), two exterior modes (H3).
enum class ResonanceCondition { h1, h2, h3 };

inline const char* condition_name(ResonanceCondition c) {
  switch (c) {
    case ResonanceCondition::h1: return "H1";
    case ResonanceCondition::h2: return "H2";
    case ResonanceCondition::h3: return "H3";
  }
  return "?";
}

inline ResonanceCondition parse_condition(const std::string& s) {
  if (s == "H1" || s == "h1") return ResonanceCondition::h1;
  if (s == "H2" || s == "h2") return ResonanceCondition::h2;
  if (s == "H3" || s == "h3") return ResonanceCondition::h3;
  throw std::invalid_argument("parse_condition: expected H1, H2 or H3, got '" + s + "'");
}

struct DivisorScanResult {
  ResonanceCondition condition = ResonanceCondition::h1;
  int r = 2;
  double N = 2.0;
  double mass = 1.0;
  int dim = 1;
  double min_abs_divisor = std::numeric_limits<double>::infinity();
  MultiIndex witness;                 // full tuple, exterior modes included with sign +1
  std::vector<ModeIndex> exterior;    // the appended exterior modes, if any
  std::uint64_t tuples_scanned = 0;

  bool empty_domain() const { return tuples_scanned == 0; }
};

namespace detail {

template <typename Visit>
void for_each_multiset(const std::vector<SignedMode>& pool, int length, Visit&& visit) {
  std::vector<SignedMode> current;
  current.reserve(std::size_t(length));
  auto rec = [&](auto&& self, std::size_t start, int remaining) -> void {
    if (remaining == 0) {
      visit(current);
      return;
    }
    for (std::size_t j = start; j < pool.size(); ++j) {
      current.push_back(pool[j]);
      self(self, j, remaining - 1);
      current.pop_back();
    }
  };
  rec(rec, 0, length);
}

/// Site order for witness ties: weight first, positive representative first
/// within a weight (0 < 1 < -1 < 2 < -2 ...), matching hand enumeration.
inline bool scan_site_less(const ModeIndex& x, const ModeIndex& y) {
  if (x.weight_sq() != y.weight_sq()) return x.weight_sq() < y.weight_sq();
  for (int i = 0; i < x.dim; ++i) {
    if (std::abs(x[i]) != std::abs(y[i])) return std::abs(x[i]) < std::abs(y[i]);
    if (x[i] != y[i]) return x[i] > y[i];
  }
  return false;
}

inline bool scan_entry_less(const SignedMode& x, const SignedMode& y) {
  if (x.sign != y.sign) return x.sign > y.sign;
  return scan_site_less(x.index, y.index);
}

/// Lexicographic witness order over entries re-sorted by the scan order.
inline bool witness_less(const MultiIndex& x, const MultiIndex& y) {
  if (x.size() != y.size()) return x.size() < y.size();
  std::vector<SignedMode> xs = x.entries(), ys = y.entries();
  std::sort(xs.begin(), xs.end(), scan_entry_less);
  std::sort(ys.begin(), ys.end(), scan_entry_less);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (scan_entry_less(xs[i], ys[i])) return true;
    if (scan_entry_less(ys[i], xs[i])) return false;
  }
  return false;
}

inline void consider(DivisorScanResult& best, const MultiIndex& full,
                     const std::vector<ModeIndex>& exterior, double value) {
  ++best.tuples_scanned;
  if (value < best.min_abs_divisor ||
      (value == best.min_abs_divisor && witness_less(full, best.witness))) {
    best.min_abs_divisor = value;
    best.witness = full;
    best.exterior = exterior;
  }
}

}  // namespace detail

/// Minimum |Omega| over the condition's tuple family at interior range N.
/// H1 ranges over all sign/index tuples with weights <= N, resonant tuples
/// excluded; H2 and H3 close the momentum with one or two exterior modes of
/// weight > N.  high_bound caps the enumerated exterior shell for H3
/// (default 3 r N); H2's exterior mode is fully determined by momentum.
inline DivisorScanResult min_divisor_scan(const FrequencyModel& model, int r, double N,
                                          ResonanceCondition condition, double high_bound = 0.0) {
  if (r < 1) throw std::invalid_argument("min_divisor_scan: r must be >= 1");
  if (N < 1.0) throw std::invalid_argument("min_divisor_scan: N must be >= 1");
  DivisorScanResult best;
  best.condition = condition;
  best.r = r;
  best.N = N;
  best.mass = model.mass;
  best.dim = model.dim;

  const Lattice interior(model.dim, N);
  std::vector<SignedMode> pool;
  pool.reserve(2 * interior.size());
  for (const auto& a : interior.modes()) pool.emplace_back(+1, a);
  for (const auto& a : interior.modes()) pool.emplace_back(-1, a);
  std::sort(pool.begin(), pool.end());

  const double nsq = N * N;
  switch (condition) {
    case ResonanceCondition::h1:
      detail::for_each_multiset(pool, r, [&](const std::vector<SignedMode>& entries) {
        MultiIndex k(entries);
        if (is_resonant(k)) return;
        detail::consider(best, k, {}, std::abs(small_divisor(k, model)));
      });
      break;
    case ResonanceCondition::h2:
      detail::for_each_multiset(pool, r, [&](const std::vector<SignedMode>& entries) {
        MultiIndex k(entries);
        const ModeIndex b = momentum(k).negated();
        if (double(b.weight_sq()) <= nsq) return;  // exterior mode must sit above N
        std::vector<SignedMode> full = entries;
        full.emplace_back(+1, b);
        MultiIndex fk(std::move(full));
        detail::consider(best, fk, {b}, std::abs(small_divisor(fk, model)));
      });
      break;
    case ResonanceCondition::h3: {
      const double bound = high_bound > 0 ? high_bound : 3.0 * r * N;
      if (bound <= N) throw std::invalid_argument("min_divisor_scan: high_bound must exceed N");
      const Lattice shell_lattice(model.dim, bound);
      std::vector<ModeIndex> shell;
      for (const auto& b : shell_lattice.modes())
        if (double(b.weight_sq()) > nsq) shell.push_back(b);
      detail::for_each_multiset(pool, r, [&](const std::vector<SignedMode>& entries) {
        MultiIndex k(entries);
        const ModeIndex m = momentum(k);
        for (const auto& b1 : shell) {
          const ModeIndex b2 = m.plus(b1).negated();
          if (double(b2.weight_sq()) <= nsq) continue;
          if (b2 < b1) continue;  // unordered exterior pair, count once
          std::vector<SignedMode> full = entries;
          full.emplace_back(+1, b1);
          full.emplace_back(+1, b2);
          MultiIndex fk(std::move(full));
          detail::consider(best, fk, {b1, b2}, std::abs(small_divisor(fk, model)));
        }
      });
      break;
    }
  }
  return best;
}

struct AlphaGammaFit {
  double alpha = 0.0;     // decay exponent of the fitted power law N^{-alpha}
  double gamma = 0.0;     // lower-envelope constant: gamma N^{-alpha} <= every minimum
  double rms_residual = 0.0;
};

/// Log-log least squares through scan minima over an N grid, with gamma
/// tightened to the lower envelope of the supplied points.
inline AlphaGammaFit fit_alpha_gamma(const std::vector<DivisorScanResult>& points) {
  if (points.size() < 3) throw std::invalid_argument("fit_alpha_gamma: need >= 3 scan points");
  for (const auto& p : points) {
    if (p.empty_domain()) throw std::invalid_argument("fit_alpha_gamma: scan with empty domain");
    if (!(p.min_abs_divisor > 0.0))
      throw NearResonanceError("fit_alpha_gamma: zero minimum at N = " + fmt17(p.N) +
                               ", mass " + fmt17(p.mass));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(points.size());
  for (const auto& p : points) {
    const double x = std::log(p.N), y = std::log(p.min_abs_divisor);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  AlphaGammaFit fit;
  fit.alpha = -slope;
  double envelope = std::numeric_limits<double>::infinity();
  double ss = 0;
  for (const auto& p : points) {
    envelope = std::min(envelope, p.min_abs_divisor * std::pow(p.N, fit.alpha));
    const double resid = std::log(p.min_abs_divisor) - (intercept + slope * std::log(p.N));
    ss += resid * resid;
  }
  fit.gamma = envelope;
  fit.rms_residual = std::sqrt(ss / n);
  return fit;
}

/// Regularity threshold s_*(r) = 6 r^2 alpha(3r) + 2 d r above which the
/// stability horizon holds.
inline double smoothness_threshold(int r, int dim, double alpha_3r) {
  if (r < 1 || dim < 1) throw std::invalid_argument("smoothness_threshold: r, dim must be >= 1");
  if (alpha_3r < 0) throw std::invalid_argument("smoothness_threshold: alpha must be >= 0");
  return 6.0 * r * r * alpha_3r + 2.0 * dim * r;
}

struct MassScanPoint {
  double mass = 0.0;
  double min_abs_divisor = 0.0;
  bool flagged_resonant = false;
};

/// Sample the H1 minimum over a uniform mass grid; masses whose minimum falls
/// below the floor are flagged resonant-at-range.
inline std::vector<MassScanPoint> mass_grid_scan(int dim, int r, double N, double mass_lo,
                                                 double mass_hi, int count,
                                                 double floor = 1e-6) {
  if (count < 1) throw std::invalid_argument("mass_grid_scan: count must be >= 1");
  if (!(mass_lo > 0) || !(mass_hi >= mass_lo))
    throw std::invalid_argument("mass_grid_scan: need 0 < mass_lo <= mass_hi");
  std::vector<MassScanPoint> out;
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : double(i) / double(count - 1);
    const double mass = mass_lo + t * (mass_hi - mass_lo);
    const auto scan = min_divisor_scan(FrequencyModel(mass, dim), r, N, ResonanceCondition::h1);
    out.push_back({mass, scan.min_abs_divisor, scan.min_abs_divisor < floor});
  }
  return out;
}

/// Rows are "condition,r,N,m,min_abs_divisor,witness"; the witness uses the
/// polynomial index syntax and is quoted because sites in d >= 2 carry commas.
inline void write_scan_csv(std::ostream& os, const std::vector<DivisorScanResult>& rows) {
  os << "condition,r,N,m,min_abs_divisor,witness\n";
  for (const auto& row : rows) {
    os << condition_name(row.condition) << ',' << row.r << ',' << fmt17(row.N) << ','
       << fmt17(row.mass) << ',' << fmt17(row.min_abs_divisor) << ",\"" << row.witness.str()
       << "\"\n";
  }
}

}  // namespace birkhoff
