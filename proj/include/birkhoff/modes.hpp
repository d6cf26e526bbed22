#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "birkhoff/errors.hpp"

namespace birkhoff {

inline constexpr int kMaxDim = 3;

/// A lattice site a in Z^d, d <= 3.  Unused components stay zero so that
/// comparisons and hashing can ignore dim beyond sanity checks.
struct ModeIndex {
  std::array<int, kMaxDim> a{0, 0, 0};
  int dim = 1;

  ModeIndex() = default;
  explicit ModeIndex(int x) : a{x, 0, 0}, dim(1) {}
  ModeIndex(int x, int y) : a{x, y, 0}, dim(2) {}
  ModeIndex(int x, int y, int z) : a{x, y, z}, dim(3) {}
  ModeIndex(std::array<int, kMaxDim> c, int d) : a(c), dim(d) {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("ModeIndex: dim must be 1..3");
    for (int i = d; i < kMaxDim; ++i) a[i] = 0;
  }

  int operator[](int i) const { return a[static_cast<std::size_t>(i)]; }

  /// Squared norm |a|^2 as an exact integer.
  std::int64_t norm_sq() const {
    std::int64_t s = 0;
    for (int i = 0; i < dim; ++i) s += std::int64_t(a[i]) * a[i];
    return s;
  }

  /// Squared weight <a>^2 = 1 + |a|^2, exact integer.
  std::int64_t weight_sq() const { return 1 + norm_sq(); }

  double weight() const { return std::sqrt(double(weight_sq())); }

  ModeIndex negated() const {
    ModeIndex n = *this;
    for (int i = 0; i < dim; ++i) n.a[i] = -a[i];
    return n;
  }

  ModeIndex plus(const ModeIndex& o) const {
    ModeIndex s = *this;
    for (int i = 0; i < dim; ++i) s.a[i] = a[i] + o.a[i];
    return s;
  }

  bool is_zero() const { return norm_sq() == 0; }

  friend bool operator==(const ModeIndex& x, const ModeIndex& y) {
    return x.dim == y.dim && x.a == y.a;
  }
  friend auto operator<=>(const ModeIndex& x, const ModeIndex& y) {
    return x.a <=> y.a;  // lexicographic; padded components are zero
  }

  std::string str() const {
    std::string s;
    for (int i = 0; i < dim; ++i) {
      if (i) s += ',';
      s += std::to_string(a[i]);
    }
    return s;
  }
};

/// One factor of a monomial: sign +1 tags xi_a, sign -1 tags conj(xi_a).
struct SignedMode {
  int sign = +1;
  ModeIndex index;

  SignedMode() = default;
  SignedMode(int s, ModeIndex idx) : sign(s), index(idx) {
    if (s != +1 && s != -1) throw std::invalid_argument("SignedMode: sign must be +-1");
  }

  SignedMode conjugate() const { return SignedMode(-sign, index); }
  std::int64_t weight_sq() const { return index.weight_sq(); }
  double weight() const { return index.weight(); }

  friend bool operator==(const SignedMode& x, const SignedMode& y) {
    return x.sign == y.sign && x.index == y.index;
  }
  // Canonical entry order: +1 entries first, then lexicographic site.
  friend bool operator<(const SignedMode& x, const SignedMode& y) {
    if (x.sign != y.sign) return x.sign > y.sign;
    return x.index < y.index;
  }

  std::string str() const {
    return std::string("(") + (sign > 0 ? "+1," : "-1,") + index.str() + ")";
  }
};

/// A multi-index k = ((s1,a1),...,(sm,am)) stored as the sorted canonical
/// representative of its unordered multiset.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<SignedMode> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw std::invalid_argument("MultiIndex: empty");
    const int d = entries_.front().index.dim;
    for (const auto& e : entries_)
      if (e.index.dim != d) throw std::invalid_argument("MultiIndex: mixed dimensions");
    std::sort(entries_.begin(), entries_.end());
  }

  std::size_t size() const { return entries_.size(); }
  int dim() const { return entries_.front().index.dim; }
  const SignedMode& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<SignedMode>& entries() const { return entries_; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  MultiIndex conjugated() const {
    std::vector<SignedMode> v;
    v.reserve(entries_.size());
    for (const auto& e : entries_) v.push_back(e.conjugate());
    return MultiIndex(std::move(v));
  }

  /// Erase one copy of the given entry; the entry must be present.
  MultiIndex without(const SignedMode& e) const {
    std::vector<SignedMode> v = entries_;
    auto it = std::find(v.begin(), v.end(), e);
    if (it == v.end()) throw std::invalid_argument("MultiIndex::without: entry absent");
    v.erase(it);
    return MultiIndex(std::move(v));
  }

  MultiIndex merged(const MultiIndex& o) const {
    std::vector<SignedMode> v = entries_;
    v.insert(v.end(), o.entries_.begin(), o.entries_.end());
    return MultiIndex(std::move(v));
  }

  friend bool operator==(const MultiIndex& x, const MultiIndex& y) {
    return x.entries_ == y.entries_;
  }
  friend bool operator<(const MultiIndex& x, const MultiIndex& y) {
    if (x.entries_.size() != y.entries_.size()) return x.entries_.size() < y.entries_.size();
    for (std::size_t i = 0; i < x.entries_.size(); ++i) {
      if (x.entries_[i] == y.entries_[i]) continue;
      return x.entries_[i] < y.entries_[i];
    }
    return false;
  }

  std::string str() const {
    std::string s;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (i) s += ' ';
      s += entries_[i].str();
    }
    return s;
  }

 private:
  std::vector<SignedMode> entries_;
};

/// Momentum M(k) = sum_i s_i * a_i as an integer d-tuple.
inline ModeIndex momentum(const MultiIndex& k) {
  std::array<int, kMaxDim> m{0, 0, 0};
  const int d = k.dim();
  for (const auto& e : k)
    for (int i = 0; i < d; ++i) m[static_cast<std::size_t>(i)] += e.sign * e.index[i];
  return ModeIndex(m, d);
}

inline bool has_zero_momentum(const MultiIndex& k) { return momentum(k).is_zero(); }

/// Sorted squared weights of the entries, largest first.
inline std::vector<std::int64_t> sorted_weight_sq(const MultiIndex& k) {
  std::vector<std::int64_t> w;
  w.reserve(k.size());
  for (const auto& e : k) w.push_back(e.weight_sq());
  std::sort(w.begin(), w.end(), std::greater<>());
  return w;
}

/// n-th largest weight mu_n(k); mu_0 = +infinity by convention.
inline double mu(std::size_t n, const MultiIndex& k) {
  if (n == 0) return std::numeric_limits<double>::infinity();
  if (n > k.size()) throw std::invalid_argument("mu: order exceeds multi-index length");
  auto w = sorted_weight_sq(k);
  return std::sqrt(double(w[n - 1]));
}

/// Pairing permutation sigma with sign(sigma_j) = -sign(j) and equal weights,
/// if one exists.  Matching is per squared-weight class: a class is pairable
/// iff its +1 and -1 entry counts agree.
inline std::optional<std::vector<std::size_t>> resonance_pairing(const MultiIndex& k) {
  if (k.size() % 2 != 0) return std::nullopt;
  std::map<std::int64_t, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> cls;
  for (std::size_t i = 0; i < k.size(); ++i) {
    auto& bucket = cls[k[i].weight_sq()];
    (k[i].sign > 0 ? bucket.first : bucket.second).push_back(i);
  }
  std::vector<std::size_t> sigma(k.size());
  for (const auto& [w, bucket] : cls) {
    (void)w;
    const auto& plus = bucket.first;
    const auto& minus = bucket.second;
    if (plus.size() != minus.size()) return std::nullopt;
    for (std::size_t i = 0; i < plus.size(); ++i) {
      sigma[plus[i]] = minus[i];
      sigma[minus[i]] = plus[i];
    }
  }
  return sigma;
}

inline bool is_resonant(const MultiIndex& k) { return resonance_pairing(k).has_value(); }

/// Partition by the number of entries with weight strictly above N.
enum class ModeClass { low, one_high, two_high, many_high };

inline const char* mode_class_name(ModeClass c) {
  switch (c) {
    case ModeClass::low: return "low";
    case ModeClass::one_high: return "one_high";
    case ModeClass::two_high: return "two_high";
    case ModeClass::many_high: return "many_high";
  }
  return "?";
}

/// Count of entries with <a> > N; the comparison is exact because squared
/// weights are integers.
inline int high_mode_count(const MultiIndex& k, double N) {
  const double nsq = N * N;
  int c = 0;
  for (const auto& e : k)
    if (double(e.weight_sq()) > nsq) ++c;
  return c;
}

inline ModeClass classify_by_high_modes(const MultiIndex& k, double N) {
  if (N <= 0) throw std::invalid_argument("classify_by_high_modes: N must be positive");
  switch (high_mode_count(k, N)) {
    case 0: return ModeClass::low;
    case 1: return ModeClass::one_high;
    case 2: return ModeClass::two_high;
    default: return ModeClass::many_high;
  }
}

}  // namespace birkhoff
