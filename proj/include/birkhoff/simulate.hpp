#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "birkhoff/config.hpp"
#include "birkhoff/errors.hpp"
#include "birkhoff/frequency.hpp"
#include "birkhoff/grid.hpp"
#include "birkhoff/nonlinearity.hpp"
#include "birkhoff/state.hpp"

namespace birkhoff {

/// Strang splitting for the truncated wave flow in the complex variables:
/// exact linear rotation xi_a -> exp(-i omega_a t) xi_a around a pseudo-
/// spectral kick xi_a -= i dt w_a / sqrt(2 omega_a), where w = fourier(f(u)).
/// The kick grid is dealiased, so the only step errors are the O(dt^2)
/// splitting error and rounding.
class NlwIntegrator {
 public:
  NlwIntegrator(std::shared_ptr<const Lattice> lattice, const FrequencyModel& model,
                const NonlinearityF& f, double dt, double dealias_factor = 1.0)
      : lattice_(std::move(lattice)), model_(model), f_(f), dt_(dt) {
    if (!lattice_) throw std::invalid_argument("NlwIntegrator: null lattice");
    if (lattice_->dim() != model.dim)
      throw std::invalid_argument("NlwIntegrator: lattice/frequency dimension mismatch");
    if (!(dt > 0)) throw std::invalid_argument("NlwIntegrator: dt must be positive");
    const auto& modes = lattice_->modes();
    omega_.reserve(modes.size());
    inv_sqrt_2w_.reserve(modes.size());
    phase_half_.reserve(modes.size());
    mirror_.reserve(modes.size());
    for (const auto& a : modes) {
      const double w = model_.frequency(a);
      omega_.push_back(w);
      inv_sqrt_2w_.push_back(1.0 / std::sqrt(2.0 * w));
      phase_half_.push_back(std::polar(1.0, -w * dt_ / 2.0));
      mirror_.push_back(lattice_->slot(a.negated()));
    }
    if (!f_.is_zero()) {
      const int size =
          dealias_grid_size(f_.top_degree(), lattice_->max_component(), dealias_factor);
      transform_ = std::make_unique<SpectralTransform>(lattice_, size);
    }
  }

  const Lattice& lattice() const { return *lattice_; }
  double dt() const { return dt_; }
  int grid_size() const { return transform_ ? transform_->grid_size() : 0; }

  /// One Strang step: half rotation, kick, half rotation.
  void step(SpectralState& z) const {
    half_rotate(z);
    if (!f_.is_zero()) kick(z, dt_);
    half_rotate(z);
  }

  /// Exact linear flow over an arbitrary time.
  void rotate(SpectralState& z, double t) const {
    check_state(z);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] *= std::polar(1.0, -omega_[i] * t);
  }

  /// Nonlinear impulse with the field u frozen at the current state.
  void kick(SpectralState& z, double dt) const {
    check_state(z);
    if (f_.is_zero()) return;
    position_coeffs(z);
    GridField u = transform_->synthesize(scratch_);
    for (Complex& v : u.values) v = Complex(f_.f(v.real()), 0.0);
    const std::vector<Complex> w_hat = transform_->analyze(u);
    for (std::size_t i = 0; i < z.size(); ++i)
      z[i] += Complex(0.0, -dt) * w_hat[i] * inv_sqrt_2w_[i];
  }

  /// H2 part sum omega_a |xi_a|^2.
  double quadratic_energy(const SpectralState& z) const {
    check_state(z);
    double acc = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) acc += omega_[i] * std::norm(z[i]);
    return acc;
  }

  /// Grid average of the primitive F(u); zero for a linear wave.
  double potential_mean(const SpectralState& z) const {
    check_state(z);
    if (f_.is_zero()) return 0.0;
    position_coeffs(z);
    const GridField u = transform_->synthesize(scratch_);
    double acc = 0.0;
    for (const Complex& v : u.values) acc += f_.primitive(v.real());
    return acc / double(u.total());
  }

  /// Conserved (up to splitting error) total energy.
  double energy(const SpectralState& z) const { return quadratic_energy(z) + potential_mean(z); }

 private:
  void check_state(const SpectralState& z) const {
    if (z.size() != lattice_->size())
      throw std::invalid_argument("NlwIntegrator: state size mismatch");
  }

  void half_rotate(SpectralState& z) const {
    check_state(z);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] *= phase_half_[i];
  }

  /// u_a = (xi_a + conj(xi_{-a})) / sqrt(2 omega_a), written into scratch_.
  void position_coeffs(const SpectralState& z) const {
    scratch_.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
      scratch_[i] = (z[i] + std::conj(z[mirror_[i]])) * inv_sqrt_2w_[i];
  }

  std::shared_ptr<const Lattice> lattice_;
  FrequencyModel model_;
  NonlinearityF f_;
  double dt_;
  std::vector<double> omega_;
  std::vector<double> inv_sqrt_2w_;
  std::vector<Complex> phase_half_;
  std::vector<std::size_t> mirror_;
  std::unique_ptr<SpectralTransform> transform_;
  mutable std::vector<Complex> scratch_;
};

/// Super-actions J_w = sum over <a>^2 == w of |xi_a|^2, keyed by the exact
/// integer squared weight.
inline std::map<std::int64_t, double> super_actions(const SpectralState& z) {
  std::map<std::int64_t, double> J;
  for (std::size_t i = 0; i < z.size(); ++i) J[z.lattice().mode(i).weight_sq()] += std::norm(z[i]);
  return J;
}

/// Weighted low-frequency action drift sum over <a>^2 <= N^2 of
/// <a>^{2s} |J_w - J0_w|.
inline double weighted_drift(const std::map<std::int64_t, double>& J,
                             const std::map<std::int64_t, double>& J0, double s, double N) {
  const double nsq = N * N;
  double acc = 0.0;
  for (const auto& [w, j0] : J0) {
    if (double(w) > nsq) continue;
    const auto it = J.find(w);
    const double j = it == J.end() ? 0.0 : it->second;
    acc += std::pow(double(w), s) * std::abs(j - j0);
  }
  return acc;
}

/// Worst single low class: max over <a>^2 <= N^2 of <a>^{2s} |J_w - J0_w|.
inline double peak_class_drift(const std::map<std::int64_t, double>& J,
                               const std::map<std::int64_t, double>& J0, double s, double N) {
  const double nsq = N * N;
  double worst = 0.0;
  for (const auto& [w, j0] : J0) {
    if (double(w) > nsq) continue;
    const auto it = J.find(w);
    const double j = it == J.end() ? 0.0 : it->second;
    worst = std::max(worst, std::pow(double(w), s) * std::abs(j - j0));
  }
  return worst;
}

/// One sampled observation of a running experiment.
struct DiagnosticsRow {
  double t = 0.0;
  double energy = 0.0;
  double low_norm_s = 0.0;
  double high_norm_s0 = 0.0;
  double drift_sum = 0.0;
  std::map<std::int64_t, double> actions;  // all classes, keyed by <a>^2
};

/// Streams diagnostics rows as CSV with one fixed J_<w> column per low
/// weight class, so the header is a function of lattice and threshold only.
class DiagnosticsWriter {
 public:
  DiagnosticsWriter(std::ostream& os, const Lattice& lattice, double threshold_N) : os_(os) {
    const double nsq = threshold_N * threshold_N;
    std::set<std::int64_t> classes;
    for (const auto& a : lattice.modes())
      if (double(a.weight_sq()) <= nsq) classes.insert(a.weight_sq());
    classes_.assign(classes.begin(), classes.end());
    os_ << "t,energy,low_norm_s,high_norm_s0,drift_sum";
    for (const auto w : classes_) os_ << ",J_" << w;
    os_ << '\n';
  }

  void write(const DiagnosticsRow& row) {
    os_ << fmt17(row.t) << ',' << fmt17(row.energy) << ',' << fmt17(row.low_norm_s) << ','
        << fmt17(row.high_norm_s0) << ',' << fmt17(row.drift_sum);
    for (const auto w : classes_) {
      const auto it = row.actions.find(w);
      os_ << ',' << fmt17(it == row.actions.end() ? 0.0 : it->second);
    }
    os_ << '\n';
  }

  const std::vector<std::int64_t>& classes() const { return classes_; }

 private:
  std::ostream& os_;
  std::vector<std::int64_t> classes_;
};

/// Mode-per-line state serialization: "mode <a> <re> <im>".
inline void write_state(std::ostream& os, const SpectralState& z) {
  os << "dim " << z.lattice().dim() << '\n';
  os << "cutoff " << fmt17(z.lattice().cutoff()) << '\n';
  for (std::size_t i = 0; i < z.size(); ++i)
    os << "mode " << z.lattice().mode(i).str() << ' ' << fmt17(z[i].real()) << ' '
       << fmt17(z[i].imag()) << '\n';
}

/// Read a state onto the given lattice; unlisted modes stay zero, modes
/// outside the truncation or a dimension mismatch are refused.
inline SpectralState read_state(std::istream& is, std::shared_ptr<const Lattice> lattice) {
  if (!lattice) throw std::invalid_argument("read_state: null lattice");
  SpectralState z(lattice);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream in(line);
    std::string tag;
    in >> tag;
    if (tag == "dim") {
      int d = 0;
      in >> d;
      if (!in || d != lattice->dim())
        throw ConfigError("read_state: dimension mismatch at line " + std::to_string(lineno));
    } else if (tag == "cutoff") {
      double k = 0;
      in >> k;  // informational
    } else if (tag == "mode") {
      std::string site;
      double re = 0, im = 0;
      in >> site >> re >> im;
      if (!in) throw ConfigError("read_state: malformed mode line " + std::to_string(lineno));
      std::array<int, kMaxDim> comp{0, 0, 0};
      int arity = 0;
      std::istringstream cs(site);
      std::string piece;
      while (std::getline(cs, piece, ',')) {
        if (arity >= kMaxDim) throw ConfigError("read_state: too many components, line " +
                                                std::to_string(lineno));
        try {
          comp[std::size_t(arity++)] = std::stoi(piece);
        } catch (const std::exception&) {
          throw ConfigError("read_state: bad component '" + piece + "' at line " +
                            std::to_string(lineno));
        }
      }
      if (arity != lattice->dim())
        throw ConfigError("read_state: mode arity mismatch at line " + std::to_string(lineno));
      const ModeIndex a(comp, arity);
      if (!lattice->contains(a))
        throw ConfigError("read_state: mode (" + a.str() + ") outside truncation, line " +
                          std::to_string(lineno));
      z.at(a) = Complex(re, im);
    } else {
      throw ConfigError("read_state: unknown tag '" + tag + "' at line " + std::to_string(lineno));
    }
  }
  return z;
}

/// Random small state: amplitudes <a>^{-(2s + d/2 + 1)} with uniform phases,
/// rescaled so the 2s-norm equals epsilon.  Deterministic in the seed.
inline SpectralState random_initial_state(std::shared_ptr<const Lattice> lattice, double s,
                                          double epsilon, unsigned long long seed) {
  if (!lattice) throw std::invalid_argument("random_initial_state: null lattice");
  if (!(epsilon >= 0)) throw std::invalid_argument("random_initial_state: epsilon must be >= 0");
  SpectralState z(lattice);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::acos(-1.0));
  const double decay = -(2.0 * s + 0.5 * lattice->dim() + 1.0) / 2.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double amp = std::pow(double(lattice->mode(i).weight_sq()), decay);
    z[i] = std::polar(amp, phase(rng));
  }
  const double norm = mixed_norm(z, 2.0 * s);
  z *= epsilon / norm;
  return z;
}

/// Everything a finished run reports besides the sampled rows.
struct ExperimentResult {
  SpectralState final_state;
  long long steps = 0;
  double dt = 0.0;
  double horizon = 0.0;
  double threshold = 0.0;
  double initial_norm_s = 0.0;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  double max_drift = 0.0;      // peak over time of the worst single class
  double max_drift_sum = 0.0;  // peak over time of the weighted sum
  double final_drift = 0.0;    // worst single class at the final sample
};

/// Integrate one configured run, feeding every stride-th sample (plus the
/// first and last) to the sink.  Throws BlowupError when the s-norm exceeds
/// blowup_factor times its initial value.
inline ExperimentResult run_experiment(const RunConfig& config,
                                       const std::function<void(const DiagnosticsRow&)>& sink = {}) {
  validate_config(config);
  auto lattice = make_lattice(config.dimension, config.cutoff);
  const FrequencyModel model = config.model();
  const NonlinearityF f = config.nonlinearity();
  const double N = std::min(std::max(config.derived_threshold(), 1.0), config.cutoff);
  const double T = config.derived_horizon();
  const long long steps = std::max(1LL, static_cast<long long>(std::ceil(T / config.dt - 1e-12)));
  if (steps > 200000000LL) throw ConfigError("config: horizon/dt exceeds the step budget");
  const double dt = T / double(steps);

  SpectralState z(lattice);
  if (!config.init_state.empty()) {
    std::ifstream in(config.init_state);
    if (!in) throw ConfigError("config: cannot open init_state '" + config.init_state + "'");
    z = read_state(in, lattice);
  } else {
    z = random_initial_state(lattice, config.s, config.epsilon, config.seed);
  }

  NlwIntegrator integrator(lattice, model, f, dt, config.dealias_factor);
  const std::map<std::int64_t, double> J0 = super_actions(z);
  const double initial_norm = mixed_norm(z, config.s);
  const double blowup_limit = config.blowup_factor * std::max(initial_norm, 1e-300);

  ExperimentResult result{SpectralState(lattice), steps, dt, T, N, initial_norm,
                          integrator.energy(z), 0.0, 0.0, 0.0, 0.0};

  auto sample = [&](double t) {
    DiagnosticsRow row;
    row.t = t;
    row.energy = integrator.energy(z);
    row.low_norm_s = mixed_norm(z, config.s, NormPart::low, N);
    row.high_norm_s0 = mixed_norm(z, config.s0, NormPart::high, N);
    row.actions = super_actions(z);
    row.drift_sum = weighted_drift(row.actions, J0, config.s, N);
    const double peak = peak_class_drift(row.actions, J0, config.s, N);
    result.max_drift = std::max(result.max_drift, peak);
    result.max_drift_sum = std::max(result.max_drift_sum, row.drift_sum);
    result.final_drift = peak;
    result.final_energy = row.energy;
    if (sink) sink(row);
  };

  sample(0.0);
  for (long long k = 1; k <= steps; ++k) {
    integrator.step(z);
    const double norm = mixed_norm(z, config.s);
    const double t = dt * double(k);
    if (!(norm <= blowup_limit))
      throw BlowupError("run_experiment: s-norm " + fmt17(norm) + " exceeded " +
                            fmt17(blowup_limit) + " at t = " + fmt17(t),
                        t);
    if (k % config.stride == 0 || k == steps) sample(t);
  }
  result.final_state = z;
  return result;
}

/// One epsilon's outcome in a drift scaling study.
struct DriftPoint {
  double epsilon = 0.0;
  double horizon = 0.0;
  double max_drift = 0.0;
  double final_drift = 0.0;
};

struct DriftStudy {
  std::vector<DriftPoint> points;
  double slope = 0.0;  // d log(max_drift) / d log(epsilon); NaN when degenerate
};

/// Re-run the experiment over config.epsilons with the derived horizon per
/// epsilon and fit the log-log slope of the worst observed drift.
inline DriftStudy drift_scaling_study(const RunConfig& config) {
  if (config.epsilons.size() < 2)
    throw ConfigError("config: drift study needs at least two epsilons");
  DriftStudy study;
  for (double eps : config.epsilons) {
    RunConfig c = config;
    c.epsilon = eps;
    c.horizon = 0.0;  // derive per epsilon
    const ExperimentResult r = run_experiment(c);
    study.points.push_back({eps, r.horizon, r.max_drift, r.final_drift});
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& p : study.points) {
    // maxima at rounding level (the linear-flow noise floor) carry no signal
    if (!(p.max_drift > 1e-12 * p.epsilon * p.epsilon)) continue;
    const double x = std::log(p.epsilon), y = std::log(p.max_drift);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  study.slope = n >= 2 ? (double(n) * sxy - sx * sy) / (double(n) * sxx - sx * sx)
                       : std::numeric_limits<double>::quiet_NaN();
  return study;
}

inline void write_drift_csv(std::ostream& os, const DriftStudy& study) {
  os << "epsilon,horizon,max_drift,final_drift\n";
  for (const auto& p : study.points)
    os << fmt17(p.epsilon) << ',' << fmt17(p.horizon) << ',' << fmt17(p.max_drift) << ','
       << fmt17(p.final_drift) << '\n';
}

}  // namespace birkhoff
