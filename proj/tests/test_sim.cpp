#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "birkhoff/birkhoff.hpp"
#include "oracle.hpp"

using namespace birkhoff;

namespace {

RunConfig base_config() {
  RunConfig c;
  c.dimension = 1;
  c.mass = 1.0;
  c.cutoff = 6.0;
  c.threshold = 2.0;
  c.order = 3;
  c.s = 2.0;
  c.s0 = 1.0;
  c.epsilon = 0.05;
  c.dt = 0.01;
  c.horizon = 1.0;
  c.f_taylor = {{2, 1.0}};
  c.seed = 7;
  c.stride = 10;
  return c;
}

double sup_diff(const SpectralState& a, const SpectralState& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("linear flow rotates each mode exactly") {
  const auto lat = std::make_shared<const Lattice>(1, 6.0);
  const FrequencyModel model(1.0, 1);
  const NlwIntegrator lin(lat, model, NonlinearityF(), 0.01);
  CHECK(lin.grid_size() == 0);  // no transform without a nonlinearity

  std::mt19937_64 rng(3);
  SpectralState z = oracle::random_state(lat, 0.1, rng);
  const SpectralState z0 = z;
  const int steps = 2000;
  for (int k = 0; k < steps; ++k) lin.step(z);

  // amplitude drift stays at rounding level per step
  for (std::size_t i = 0; i < z.size(); ++i)
    CHECK(std::abs(std::abs(z[i]) - std::abs(z0[i])) <= steps * 1e-14);

  // phases match the exact solution exp(-i omega t)
  const double t = steps * 0.01;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const Complex expected = z0[i] * std::polar(1.0, -model.frequency(lat->mode(i)) * t);
    CHECK(std::abs(z[i] - expected) <= 1e-11);
  }
}

TEST_CASE("pseudo-spectral kick equals the polynomial vector field") {
  const auto lat = std::make_shared<const Lattice>(1, 6.0);
  const FrequencyModel model(1.0, 1);
  const NonlinearityF f = NonlinearityF::from_taylor({{2, 1.0}, {3, 0.5}});
  const GradedPolynomial P = taylor_expand_nlw(f, model, 6.0, 4);  // exact for this f
  const double dt = 0.37;
  const NlwIntegrator integ(lat, model, f, dt);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    SpectralState z = oracle::random_state(lat, 0.3, rng);
    const SpectralState z0 = z;
    integ.kick(z, dt);
    const SpectralState field = P.vector_field(z0);
    double scale = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) scale = std::max(scale, std::abs(field[i]));
    for (std::size_t i = 0; i < z.size(); ++i)
      CHECK(std::abs((z[i] - z0[i]) - dt * field[i]) <= 1e-13 * std::max(1.0, dt * scale));
  }
}

TEST_CASE("split step self-converges at second order") {
  const auto lat = std::make_shared<const Lattice>(1, 6.0);
  const FrequencyModel model(1.0, 1);
  const NonlinearityF f = NonlinearityF::from_taylor({{2, 1.0}});
  const SpectralState z0 = random_initial_state(lat, 2.0, 0.1, 11);
  const double T = 1.0;

  auto integrate = [&](double dt) {
    const long long n = std::llround(T / dt);
    const NlwIntegrator integ(lat, model, f, dt);
    SpectralState z = z0;
    for (long long k = 0; k < n; ++k) integ.step(z);
    return z;
  };

  const SpectralState ref = integrate(T / 3200.0);
  const double e1 = sup_diff(integrate(T / 100.0), ref);
  const double e2 = sup_diff(integrate(T / 200.0), ref);
  const double factor = e1 / e2;
  CHECK(factor > 3.5);
  CHECK(factor < 4.5);
}

TEST_CASE("energy stays level over long runs") {
  RunConfig c = base_config();
  c.epsilon = 1e-2;
  c.dt = 1e-2;
  c.horizon = 50.0;
  c.stride = 100;
  c.threshold = 0.0;

  std::vector<double> ts, es;
  const ExperimentResult r = run_experiment(c, [&](const DiagnosticsRow& row) {
    ts.push_back(row.t);
    es.push_back(row.energy);
  });
  REQUIRE(ts.size() >= 10);
  CHECK(std::abs(oracle::lsq_slope(ts, es)) <= 1e-8);
  CHECK(r.final_energy == es.back());
  for (double e : es)
    CHECK(std::abs(e - r.initial_energy) <= 1e-6 * std::max(1.0, std::abs(r.initial_energy)));
}

TEST_CASE("random initial states are deterministic with the prescribed norm") {
  const auto lat = std::make_shared<const Lattice>(1, 6.0);
  const double s = 2.0, eps = 0.05;
  const SpectralState a = random_initial_state(lat, s, eps, 42);
  const SpectralState b = random_initial_state(lat, s, eps, 42);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

  CHECK(mixed_norm(a, 2.0 * s) == Catch::Approx(eps).epsilon(1e-14));

  const SpectralState other = random_initial_state(lat, s, eps, 43);
  CHECK(sup_diff(a, other) > 0.0);

  // amplitude profile: |xi_a| times <a>^{2s + d/2 + 1} is constant across modes
  const double p = 2.0 * s + 0.5 + 1.0;
  const double ref = std::abs(a[0]) * std::pow(double(lat->mode(0).weight_sq()), p / 2.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double v = std::abs(a[i]) * std::pow(double(lat->mode(i).weight_sq()), p / 2.0);
    CHECK(v == Catch::Approx(ref).epsilon(1e-12));
  }

  const SpectralState zero = random_initial_state(lat, s, 0.0, 42);
  CHECK(mixed_norm(zero, 0.0) == 0.0);
  CHECK_THROWS_AS(random_initial_state(lat, s, -0.1, 42), std::invalid_argument);
}

TEST_CASE("action drift summaries follow their definitions") {
  std::map<std::int64_t, double> J0{{1, 0.10}, {2, 0.20}, {5, 0.30}};
  std::map<std::int64_t, double> J{{1, 0.15}, {2, 0.10}, {5, 0.90}};
  const double s = 2.0, N = 2.0;  // class 5 sits above N^2 = 4 and is excluded
  const double expected_sum = std::pow(1.0, s) * 0.05 + std::pow(2.0, s) * 0.10;
  const double expected_peak = std::max(std::pow(1.0, s) * 0.05, std::pow(2.0, s) * 0.10);
  CHECK(weighted_drift(J, J0, s, N) == Catch::Approx(expected_sum).epsilon(1e-15));
  CHECK(peak_class_drift(J, J0, s, N) == Catch::Approx(expected_peak).epsilon(1e-15));
  CHECK(peak_class_drift(J, J0, s, N) <= weighted_drift(J, J0, s, N));
}

TEST_CASE("super-actions partition the squared l2 norm") {
  const auto lat = std::make_shared<const Lattice>(2, 3.0);
  std::mt19937_64 rng(9);
  const SpectralState z = oracle::random_state(lat, 0.7, rng);
  const auto J = super_actions(z);
  double sum = 0.0;
  for (const auto& [w, j] : J) {
    (void)w;
    sum += j;
  }
  const double norm_sq = mixed_norm(z, 0.0) * mixed_norm(z, 0.0);
  CHECK(sum == Catch::Approx(norm_sq).epsilon(1e-13));
}

TEST_CASE("state files round-trip and reject foreign content") {
  const auto lat = std::make_shared<const Lattice>(1, 4.0);
  std::mt19937_64 rng(15);
  const SpectralState z = oracle::random_state(lat, 0.2, rng);

  std::stringstream buf;
  write_state(buf, z);
  const SpectralState back = read_state(buf, lat);
  for (std::size_t i = 0; i < z.size(); ++i) CHECK(back[i] == z[i]);

  auto parse = [&](const std::string& text) {
    std::istringstream in(text);
    return read_state(in, lat);
  };
  CHECK_THROWS_AS(parse("dim 2\n"), ConfigError);
  CHECK_THROWS_AS(parse("mode 9 0.1 0.2\n"), ConfigError);      // outside the truncation
  CHECK_THROWS_AS(parse("mode 1 0.1\n"), ConfigError);          // missing component
  CHECK_THROWS_AS(parse("mode 1,2 0.1 0.2\n"), ConfigError);    // arity mismatch
  CHECK_THROWS_AS(parse("bogus 1 2 3\n"), ConfigError);
  const SpectralState sparse = parse("mode 1 0.5 -0.25\n");     // unlisted modes stay zero
  CHECK(sparse.at(ModeIndex({1, 0, 0}, 1)) == Complex(0.5, -0.25));
  CHECK(sparse.at(ModeIndex({0, 0, 0}, 1)) == Complex(0.0, 0.0));
}

TEST_CASE("experiments honor steps, stride, and thresholds") {
  RunConfig c = base_config();
  c.dt = 0.3;
  c.horizon = 1.0;
  c.stride = 2;
  int rows = 0;
  const ExperimentResult r = run_experiment(c, [&](const DiagnosticsRow&) { ++rows; });
  CHECK(r.steps == 4);
  CHECK(r.dt == Catch::Approx(0.25).epsilon(1e-15));
  CHECK(r.threshold == 2.0);
  CHECK(rows == 3);  // t = 0, 0.5(step 2), 1.0(step 4)

  c.threshold = 0.0;  // derive: epsilon^{-r/(s-s0)} well past the cutoff
  const ExperimentResult d = run_experiment(c);
  CHECK(d.threshold == c.cutoff);
}

TEST_CASE("zero epsilon runs report identically zero diagnostics") {
  RunConfig c = base_config();
  c.epsilon = 0.0;
  c.horizon = 0.5;
  const ExperimentResult r = run_experiment(c, [&](const DiagnosticsRow& row) {
    CHECK(row.energy == 0.0);
    CHECK(row.low_norm_s == 0.0);
    CHECK(row.high_norm_s0 == 0.0);
    CHECK(row.drift_sum == 0.0);
  });
  CHECK(r.max_drift == 0.0);
  CHECK(r.max_drift_sum == 0.0);
  CHECK(mixed_norm(r.final_state, 0.0) == 0.0);
}

TEST_CASE("linear runs keep the drift sum at rounding level") {
  RunConfig c = base_config();
  c.f_taylor.clear();
  c.horizon = 1.0;
  const ExperimentResult r = run_experiment(c);
  CHECK(r.max_drift_sum <= 1e-12 * c.epsilon * c.epsilon);
}

TEST_CASE("blow-up aborts with the offending time") {
  RunConfig c = base_config();
  c.f_taylor = {{2, 3.0}};
  c.epsilon = 0.5;
  c.blowup_factor = 1.0 + 1e-9;
  c.horizon = 2.0;
  CHECK_THROWS_AS(run_experiment(c), BlowupError);
  try {
    run_experiment(c);
  } catch (const BlowupError& e) {
    CHECK(e.time > 0.0);
    CHECK(e.time <= 2.0);
  }
}

TEST_CASE("prescribed initial states come from files") {
  const auto lat = std::make_shared<const Lattice>(1, 6.0);
  SpectralState z(lat);
  z.at(ModeIndex({1, 0, 0}, 1)) = Complex(0.02, 0.01);
  z.at(ModeIndex({-1, 0, 0}, 1)) = Complex(-0.01, 0.005);

  const std::string path = "test_sim_init_state.txt";
  {
    std::ofstream out(path);
    write_state(out, z);
  }
  RunConfig c = base_config();
  c.init_state = path;
  c.horizon = 0.1;
  double first_norm = -1.0;
  run_experiment(c, [&](const DiagnosticsRow& row) {
    if (row.t == 0.0) first_norm = row.low_norm_s;
  });
  CHECK(first_norm == Catch::Approx(mixed_norm(z, c.s, NormPart::low, 2.0)).epsilon(1e-14));
  std::remove(path.c_str());

  c.init_state = "definitely_missing_state_file.txt";
  CHECK_THROWS_AS(run_experiment(c), ConfigError);
}

TEST_CASE("diagnostics stream with one column per low class") {
  const Lattice lat(1, 6.0);
  std::stringstream buf;
  DiagnosticsWriter writer(buf, lat, 2.0);
  CHECK(writer.classes() == std::vector<std::int64_t>{1, 2});
  DiagnosticsRow row;
  row.t = 0.5;
  row.actions = {{1, 0.25}, {2, 0.5}, {5, 0.75}};
  writer.write(row);

  std::string header, line;
  std::getline(buf, header);
  CHECK(header == "t,energy,low_norm_s,high_norm_s0,drift_sum,J_1,J_2");
  std::getline(buf, line);
  CHECK(line == "0.5,0,0,0,0,0.25,0.5");
}

TEST_CASE("evolved states keep the displacement field real") {
  RunConfig c = base_config();
  c.horizon = 2.0;
  const ExperimentResult r = run_experiment(c);
  const auto [u_hat, v_hat] = from_spectral(r.final_state, c.model());
  const auto lat = r.final_state.lattice_ptr();
  const SpectralTransform fft(lat, next_smooth_size(2 * lat->max_component() + 1));
  const GridField u = fft.synthesize(u_hat);
  double amp = 0.0;
  for (const Complex& v : u.values) amp = std::max(amp, std::abs(v));
  CHECK(u.imag_residue() <= 1e-12 * std::max(1.0, amp));
}

TEST_CASE("drift studies fit the epsilon scaling and flag degenerate data") {
  RunConfig c = base_config();
  c.threshold = 0.0;
  c.horizon = 0.0;  // derive T = 1/epsilon
  c.dt = 0.01;
  c.epsilons = {0.1, 0.05, 0.025};

  const DriftStudy study = drift_scaling_study(c);
  REQUIRE(study.points.size() == 3);
  for (std::size_t i = 0; i < study.points.size(); ++i) {
    CHECK(study.points[i].epsilon == c.epsilons[i]);
    CHECK(study.points[i].horizon == Catch::Approx(1.0 / c.epsilons[i]).epsilon(1e-12));
    CHECK(study.points[i].max_drift > 0.0);
    CHECK(study.points[i].final_drift <= study.points[i].max_drift);
  }
  CHECK(study.slope >= 2.5);

  RunConfig lin = c;
  lin.f_taylor.clear();
  const DriftStudy degenerate = drift_scaling_study(lin);
  CHECK(std::isnan(degenerate.slope));

  RunConfig short_list = c;
  short_list.epsilons = {0.1};
  CHECK_THROWS_AS(drift_scaling_study(short_list), ConfigError);

  std::stringstream csv;
  write_drift_csv(csv, study);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "epsilon,horizon,max_drift,final_drift");
}
