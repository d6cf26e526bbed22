#include <cmath>
#include <complex>
#include <memory>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "birkhoff/birkhoff.hpp"
#include "oracle.hpp"

using namespace birkhoff;

namespace {

ModeIndex site(int x) { return ModeIndex({x, 0, 0}, 1); }

MultiIndex key(std::vector<SignedMode> entries) { return MultiIndex(std::move(entries)); }

/// Random state supported on the low modes only.
SpectralState random_low_state(std::shared_ptr<const Lattice> lat, double N, double radius,
                               std::mt19937_64& rng) {
  SpectralState z = oracle::random_state(lat, radius, rng);
  for (std::size_t i = 0; i < z.size(); ++i)
    if (double(z.lattice().mode(i).weight_sq()) > N * N) z[i] = Complex(0.0, 0.0);
  return z;
}

}  // namespace

TEST_CASE("a single symmetric term freezes into one matrix entry") {
  const double N = 2.0;
  const auto lat = std::make_shared<const Lattice>(1, 6.0);
  const ModeIndex a = site(3), b = site(4), ell = site(1);

  const Complex c(0.4, -0.7);
  GradedPolynomial s_sym;
  HomogeneousPolynomial part(3);
  const MultiIndex k =
      key({SignedMode(+1, a), SignedMode(-1, b), SignedMode(+1, ell)});
  part.add_term(k, c);
  part.add_term(k.conjugated(), std::conj(c));
  s_sym.set_part(part);

  SpectralState low(lat);
  const Complex zl(0.3, 0.2);
  low[lat->slot(ell)] = zl;

  const CouplingMatrix B = extract_coupling_matrix(s_sym, low, N, 3);
  CHECK(B.at(a, b) == c * zl);
  CHECK(B.at(b, a) == std::conj(c * zl));
  CHECK(B.entries.size() == 2);

  // freezing against the zero state leaves no entries
  const CouplingMatrix empty = extract_coupling_matrix(s_sym, SpectralState(lat), N, 3);
  CHECK(empty.entries.empty());
}

TEST_CASE("coupling extraction rejects non-symmetric input") {
  const double N = 2.0;
  const auto lat = std::make_shared<const Lattice>(1, 6.0);
  const SpectralState zero(lat);

  GradedPolynomial same_sign;
  HomogeneousPolynomial p4(4);
  p4.add_term(key({SignedMode(+1, site(3)), SignedMode(+1, site(-3)), SignedMode(-1, site(0)),
                   SignedMode(-1, site(0))}),
              Complex(1.0, 0.0));
  same_sign.set_part(p4);
  CHECK_THROWS_AS(extract_coupling_matrix(same_sign, zero, N, 3), ConsistencyError);

  GradedPolynomial one_high;
  HomogeneousPolynomial p3(3);
  p3.add_term(key({SignedMode(+1, site(2)), SignedMode(-1, site(1)), SignedMode(-1, site(1))}),
              Complex(1.0, 0.0));
  one_high.set_part(p3);
  CHECK_THROWS_AS(extract_coupling_matrix(one_high, zero, N, 3), ConsistencyError);

  std::mt19937_64 rng(5);
  SpectralState tainted = oracle::random_state(lat, 1.0, rng);  // support above N
  GradedPolynomial empty;
  CHECK_THROWS_AS(extract_coupling_matrix(empty, tainted, N, 3), std::invalid_argument);
  CHECK_THROWS_AS(extract_coupling_matrix(empty, zero, 0.5, 3), std::invalid_argument);
}

TEST_CASE("normal form coupling matrix is Hermitian and band-limited") {
  const FrequencyModel model(1.0, 1);
  const double N = 2.0;
  const int r = 4;
  const auto lat = std::make_shared<const Lattice>(1, 5.0);
  const NonlinearityF f = NonlinearityF::from_taylor({{2, 1.0}, {3, 1.0}});
  const GradedPolynomial P = taylor_expand_nlw(f, model, 5.0, r);
  const NormalFormResult nf = birkhoff_normal_form(P, model, N, r);
  REQUIRE_FALSE(nf.s_sym.empty());

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const SpectralState low = random_low_state(lat, N, 0.5, rng);
    const CouplingMatrix B = extract_coupling_matrix(nf.s_sym, low, N, r);
    CHECK(B.band_limit() == 3.0 * r * N);
    CHECK_FALSE(B.entries.empty());
    for (const auto& [ab, v] : B.entries) {
      const auto& [a, b] = ab;
      CHECK(B.at(b, a) == std::conj(v));  // exact, not approximate
      if (a == b) CHECK(v.imag() == 0.0);
      double dist_sq = 0.0;
      for (int i = 0; i < a.dim; ++i) {
        const double diff = double(a[i] - b[i]);
        dist_sq += diff * diff;
      }
      CHECK(dist_sq <= B.band_limit() * B.band_limit());
    }
  }
}

TEST_CASE("coupling matrix reproduces the symmetric part as a quadratic form") {
  const FrequencyModel model(1.0, 1);
  const double N = 2.0;
  const int r = 4;
  const auto lat = std::make_shared<const Lattice>(1, 5.0);
  const NonlinearityF f = NonlinearityF::from_taylor({{2, 1.0}, {3, 1.0}});
  const GradedPolynomial P = taylor_expand_nlw(f, model, 5.0, r);
  const NormalFormResult nf = birkhoff_normal_form(P, model, N, r);

  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const SpectralState low = random_low_state(lat, N, 0.5, rng);
    const CouplingMatrix B = extract_coupling_matrix(nf.s_sym, low, N, r);

    // combined state: low part plus random amplitudes on the high modes
    SpectralState z = low;
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 0; i < z.size(); ++i)
      if (double(z.lattice().mode(i).weight_sq()) > N * N)
        z[i] = 0.3 * Complex(gauss(rng), gauss(rng));

    Complex form(0.0, 0.0);
    for (const auto& [ab, v] : B.entries)
      form += v * z.at(ab.first) * std::conj(z.at(ab.second));

    const double direct = nf.s_sym.evaluate(z);
    CHECK(std::abs(form.imag()) <= 1e-12 * std::max(1.0, std::abs(direct)));
    CHECK(form.real() == Catch::Approx(direct).margin(1e-12 * std::max(1.0, std::abs(direct))));
  }
}

TEST_CASE("coupling extraction is deterministic") {
  const FrequencyModel model(1.0, 1);
  const double N = 2.0;
  const auto lat = std::make_shared<const Lattice>(1, 5.0);
  const NonlinearityF f = NonlinearityF::from_taylor({{2, 1.0}});
  const GradedPolynomial P = taylor_expand_nlw(f, model, 5.0, 4);
  const NormalFormResult nf = birkhoff_normal_form(P, model, N, 4);

  std::mt19937_64 rng(17);
  const SpectralState low = random_low_state(lat, N, 0.5, rng);
  const CouplingMatrix once = extract_coupling_matrix(nf.s_sym, low, N, 4);
  const CouplingMatrix twice = extract_coupling_matrix(nf.s_sym, low, N, 4);
  REQUIRE(once.entries.size() == twice.entries.size());
  for (const auto& [ab, v] : once.entries) CHECK(twice.at(ab.first, ab.second) == v);
}
