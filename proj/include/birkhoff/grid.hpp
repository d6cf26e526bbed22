#pragma once

#include <fftw3.h>

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "birkhoff/frequency.hpp"
#include "birkhoff/state.hpp"

namespace birkhoff {

/// Smallest integer >= n whose prime factors are all in {2, 3, 5}.
inline int next_smooth_size(int n) {
  if (n < 1) throw std::invalid_argument("next_smooth_size: n must be positive");
  for (int m = n;; ++m) {
    int rest = m;
    for (int p : {2, 3, 5})
      while (rest % p == 0) rest /= p;
    if (rest == 1) return m;
  }
}

/// Per-axis grid size large enough that products of top_degree truncated
/// fields never alias back into the retained window [-max_component,
/// max_component].  The factor widens the margin; the result is 5-smooth.
inline int dealias_grid_size(int top_degree, int max_component, double factor = 1.0) {
  if (top_degree < 1) throw std::invalid_argument("dealias_grid_size: degree must be positive");
  if (max_component < 0) throw std::invalid_argument("dealias_grid_size: negative component bound");
  if (!(factor >= 1.0)) throw std::invalid_argument("dealias_grid_size: factor must be >= 1");
  const double raw = factor * ((top_degree + 1.0) * max_component + 1.0);
  const int base = std::max(2 * max_component + 1, static_cast<int>(std::ceil(raw)));
  return next_smooth_size(base);
}

/// Complex samples of a periodic field on a uniform size^dim grid,
/// row-major with the last axis fastest (the layout fftw expects).
struct GridField {
  int dim = 1;
  int size = 1;
  std::vector<Complex> values;

  GridField() = default;
  GridField(int d, int n) : dim(d), size(n) {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("GridField: dim must be in 1..3");
    if (n < 1) throw std::invalid_argument("GridField: size must be positive");
    std::int64_t total = 1;
    for (int i = 0; i < d; ++i) total *= n;
    values.assign(static_cast<std::size_t>(total), Complex(0.0, 0.0));
  }

  std::size_t total() const { return values.size(); }

  /// Largest |imag| over the grid; rounding noise for fields synthesized
  /// from conjugate-paired coefficients.
  double imag_residue() const {
    double m = 0.0;
    for (const Complex& v : values) m = std::max(m, std::abs(v.imag()));
    return m;
  }
};

/// c2c transforms between truncated Fourier coefficients and grid samples.
/// Plans use FFTW_ESTIMATE so planning never depends on buffer contents.
/// Forward analysis carries the 1/size^dim normalization, so
/// analyze(synthesize(c)) == c up to rounding whenever the grid resolves
/// the truncation.
class SpectralTransform {
 public:
  SpectralTransform(std::shared_ptr<const Lattice> lattice, int grid_size)
      : lattice_(std::move(lattice)), size_(grid_size) {
    if (!lattice_) throw std::invalid_argument("SpectralTransform: null lattice");
    if (size_ < 2 * lattice_->max_component() + 1)
      throw std::invalid_argument("SpectralTransform: grid does not resolve the truncation");
    std::int64_t total = 1;
    for (int i = 0; i < lattice_->dim(); ++i) total *= size_;
    buffer_.assign(static_cast<std::size_t>(total), Complex(0.0, 0.0));
    slots_.reserve(lattice_->modes().size());
    for (const ModeIndex& a : lattice_->modes()) slots_.push_back(flat_index(a));
    int n[kMaxDim] = {size_, size_, size_};
    auto* raw = reinterpret_cast<fftw_complex*>(buffer_.data());
    forward_ = fftw_plan_dft(lattice_->dim(), n, raw, raw, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft(lattice_->dim(), n, raw, raw, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (forward_ == nullptr || backward_ == nullptr)
      throw std::runtime_error("SpectralTransform: fftw plan creation failed");
  }

  ~SpectralTransform() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  SpectralTransform(const SpectralTransform&) = delete;
  SpectralTransform& operator=(const SpectralTransform&) = delete;

  const Lattice& lattice() const { return *lattice_; }
  int grid_size() const { return size_; }

  /// u(x_j) = sum_a c_a exp(i a.x_j) over the truncation.
  GridField synthesize(const std::vector<Complex>& coeffs) const {
    check_length(coeffs);
    std::fill(buffer_.begin(), buffer_.end(), Complex(0.0, 0.0));
    for (std::size_t i = 0; i < slots_.size(); ++i) buffer_[slots_[i]] = coeffs[i];
    fftw_execute(backward_);
    GridField out(lattice_->dim(), size_);
    out.values = buffer_;
    return out;
  }

  /// c_a = size^-dim sum_j u(x_j) exp(-i a.x_j), restricted to the truncation.
  std::vector<Complex> analyze(const GridField& field) const {
    if (field.dim != lattice_->dim() || field.size != size_)
      throw std::invalid_argument("analyze: field shape mismatch");
    buffer_ = field.values;
    fftw_execute(forward_);
    const double scale = 1.0 / static_cast<double>(buffer_.size());
    std::vector<Complex> out(slots_.size());
    for (std::size_t i = 0; i < slots_.size(); ++i) out[i] = buffer_[slots_[i]] * scale;
    return out;
  }

 private:
  void check_length(const std::vector<Complex>& coeffs) const {
    if (coeffs.size() != slots_.size())
      throw std::invalid_argument("SpectralTransform: coefficient count mismatch");
  }

  std::size_t flat_index(const ModeIndex& a) const {
    std::size_t flat = 0;
    for (int i = 0; i < lattice_->dim(); ++i) {
      const int w = ((a[i] % size_) + size_) % size_;
      flat = flat * static_cast<std::size_t>(size_) + static_cast<std::size_t>(w);
    }
    return flat;
  }

  std::shared_ptr<const Lattice> lattice_;
  int size_;
  mutable std::vector<Complex> buffer_;
  std::vector<std::size_t> slots_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

/// Pack real position/velocity spectra into the complex variable
/// xi_a = (w^{1/2} u_a + i w^{-1/2} v_a) / sqrt(2) with w = frequency(a).
inline SpectralState to_spectral(const std::vector<Complex>& u_hat,
                                 const std::vector<Complex>& v_hat,
                                 std::shared_ptr<const Lattice> lattice,
                                 const FrequencyModel& model) {
  if (!lattice) throw std::invalid_argument("to_spectral: null lattice");
  const auto& modes = lattice->modes();
  if (u_hat.size() != modes.size() || v_hat.size() != modes.size())
    throw std::invalid_argument("to_spectral: coefficient count mismatch");
  SpectralState z(lattice);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const double w = model.frequency(modes[i]);
    const double rw = std::sqrt(w);
    z[i] = (rw * u_hat[i] + Complex(0.0, 1.0) * (v_hat[i] / rw)) * inv_sqrt2;
  }
  return z;
}

/// Invert to_spectral: u_a = (xi_a + conj(xi_{-a})) / (sqrt(2) w^{1/2}),
/// v_a = -i w^{1/2} (xi_a - conj(xi_{-a})) / sqrt(2).
inline std::pair<std::vector<Complex>, std::vector<Complex>> from_spectral(
    const SpectralState& z, const FrequencyModel& model) {
  const Lattice& lat = z.lattice();
  const auto& modes = lat.modes();
  std::vector<Complex> u_hat(modes.size()), v_hat(modes.size());
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const double w = model.frequency(modes[i]);
    const double rw = std::sqrt(w);
    const Complex mirror = std::conj(z[lat.slot(modes[i].negated())]);
    u_hat[i] = (z[i] + mirror) * (inv_sqrt2 / rw);
    v_hat[i] = Complex(0.0, -1.0) * rw * (z[i] - mirror) * inv_sqrt2;
  }
  return {u_hat, v_hat};
}

}  // namespace birkhoff
