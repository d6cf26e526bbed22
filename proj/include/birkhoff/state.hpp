#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include "birkhoff/modes.hpp"

namespace birkhoff {

using Complex = std::complex<double>;

/// The finite mode set {a in Z^d : <a> <= K}, in lexicographic order.
class Lattice {
 public:
  Lattice(int dim, double cutoff) : dim_(dim), cutoff_(cutoff) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("Lattice: dim must be 1..3");
    if (!(cutoff >= 1.0)) throw std::invalid_argument("Lattice: cutoff must be >= 1");
    const double ksq = cutoff * cutoff;
    const int bound = static_cast<int>(std::floor(std::sqrt(ksq - 1.0)));
    std::array<int, kMaxDim> a{0, 0, 0};
    enumerate(0, bound, ksq, a);
    for (std::size_t i = 0; i < modes_.size(); ++i) slot_[modes_[i]] = i;
  }

  int dim() const { return dim_; }
  double cutoff() const { return cutoff_; }
  std::size_t size() const { return modes_.size(); }
  const std::vector<ModeIndex>& modes() const { return modes_; }
  const ModeIndex& mode(std::size_t i) const { return modes_[i]; }

  bool contains(const ModeIndex& m) const { return slot_.find(m) != slot_.end(); }

  std::size_t slot(const ModeIndex& m) const {
    auto it = slot_.find(m);
    if (it == slot_.end())
      throw std::invalid_argument("Lattice: mode (" + m.str() + ") outside truncation");
    return it->second;
  }

  /// Largest |a_i| over the lattice, per axis (same value for all axes).
  int max_component() const {
    int b = 0;
    for (const auto& m : modes_)
      for (int i = 0; i < dim_; ++i) b = std::max(b, std::abs(m[i]));
    return b;
  }

 private:
  void enumerate(int axis, int bound, double ksq, std::array<int, kMaxDim>& a) {
    if (axis == dim_) {
      ModeIndex m(a, dim_);
      if (double(m.weight_sq()) <= ksq) modes_.push_back(m);
      return;
    }
    for (int x = -bound; x <= bound; ++x) {
      a[static_cast<std::size_t>(axis)] = x;
      enumerate(axis + 1, bound, ksq, a);
    }
  }

  int dim_;
  double cutoff_;
  std::vector<ModeIndex> modes_;
  std::map<ModeIndex, std::size_t> slot_;
};

inline std::shared_ptr<const Lattice> make_lattice(int dim, double cutoff) {
  return std::make_shared<const Lattice>(dim, cutoff);
}

/// Truncated sequence xi = (xi_a), one complex amplitude per lattice mode.
class SpectralState {
 public:
  explicit SpectralState(std::shared_ptr<const Lattice> lattice)
      : lattice_(std::move(lattice)), coeff_(lattice_->size(), Complex(0.0, 0.0)) {}

  SpectralState(std::shared_ptr<const Lattice> lattice, std::vector<Complex> coeff)
      : lattice_(std::move(lattice)), coeff_(std::move(coeff)) {
    if (coeff_.size() != lattice_->size())
      throw std::invalid_argument("SpectralState: coefficient count mismatch");
  }

  const Lattice& lattice() const { return *lattice_; }
  std::shared_ptr<const Lattice> lattice_ptr() const { return lattice_; }
  std::size_t size() const { return coeff_.size(); }

  Complex& operator[](std::size_t i) { return coeff_[i]; }
  const Complex& operator[](std::size_t i) const { return coeff_[i]; }
  Complex& at(const ModeIndex& m) { return coeff_[lattice_->slot(m)]; }
  const Complex& at(const ModeIndex& m) const { return coeff_[lattice_->slot(m)]; }

  std::vector<Complex>& coeffs() { return coeff_; }
  const std::vector<Complex>& coeffs() const { return coeff_; }

  SpectralState& operator+=(const SpectralState& o) {
    check_same(o);
    for (std::size_t i = 0; i < coeff_.size(); ++i) coeff_[i] += o.coeff_[i];
    return *this;
  }
  SpectralState& operator*=(double c) {
    for (auto& z : coeff_) z *= c;
    return *this;
  }

 private:
  void check_same(const SpectralState& o) const {
    if (lattice_ != o.lattice_ &&
        (lattice_->dim() != o.lattice_->dim() || lattice_->cutoff() != o.lattice_->cutoff()))
      throw std::invalid_argument("SpectralState: lattice mismatch");
  }

  std::shared_ptr<const Lattice> lattice_;
  std::vector<Complex> coeff_;
};

enum class NormPart { all, low, high };

/// Weighted l2 norm (sum over a of <a>^{2s} |xi_a|^2)^{1/2}, restricted to the
/// requested part of the spectrum.  Splitting thresholds compare squared
/// weights so classification is exact.
inline double mixed_norm(const SpectralState& z, double s, NormPart part = NormPart::all,
                         double N = 0.0) {
  if (s < 0) throw std::invalid_argument("mixed_norm: s must be >= 0");
  if (part != NormPart::all) {
    if (N <= 0) throw std::invalid_argument("mixed_norm: part split requires N > 0");
    if (N > z.lattice().cutoff())
      throw std::invalid_argument("mixed_norm: split threshold N exceeds cutoff K");
  }
  const double nsq = N * N;
  double acc = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double wsq = double(z.lattice().mode(i).weight_sq());
    if (part == NormPart::low && wsq > nsq) continue;
    if (part == NormPart::high && wsq <= nsq) continue;
    acc += std::pow(wsq, s) * std::norm(z[i]);
  }
  return std::sqrt(acc);
}

/// Doubled-variable norm ||z||_s = sqrt(2) ||xi||_s.
inline double doubled_norm(const SpectralState& z, double s, NormPart part = NormPart::all,
                           double N = 0.0) {
  return std::sqrt(2.0) * mixed_norm(z, s, part, N);
}

/// Zero out one side of the split; low keeps <a> <= N, high keeps <a> > N.
inline std::pair<SpectralState, SpectralState> split_low_high(const SpectralState& z, double N) {
  if (N <= 0 || N > z.lattice().cutoff())
    throw std::invalid_argument("split_low_high: need 0 < N <= K");
  const double nsq = N * N;
  SpectralState low(z.lattice_ptr()), high(z.lattice_ptr());
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (double(z.lattice().mode(i).weight_sq()) <= nsq)
      low[i] = z[i];
    else
      high[i] = z[i];
  }
  return {low, high};
}

}  // namespace birkhoff
