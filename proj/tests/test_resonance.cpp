#include <cmath>
#include <random>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "birkhoff/birkhoff.hpp"
#include "oracle.hpp"

using namespace birkhoff;

namespace {

ModeIndex site(int x) { return ModeIndex({x, 0, 0}, 1); }

MultiIndex key(std::vector<SignedMode> entries) { return MultiIndex(std::move(entries)); }

}  // namespace

TEST_CASE("frequencies follow the dispersion relation") {
  const FrequencyModel unit(1.0, 2);
  CHECK(unit.frequency(ModeIndex({0, 0, 0}, 2)) == 1.0);
  CHECK(unit.frequency(ModeIndex({3, 4, 0}, 2)) == Catch::Approx(std::sqrt(26.0)).epsilon(1e-15));
  CHECK(unit.frequency(ModeIndex({-3, -4, 0}, 2)) == unit.frequency(ModeIndex({3, 4, 0}, 2)));
  CHECK(FrequencyModel(2.0, 1).frequency(site(0)) == Catch::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("small divisor carries the documented sign convention") {
  const FrequencyModel model(1.0, 1);
  CHECK(small_divisor(key({SignedMode(+1, site(3)), SignedMode(-1, site(3))}), model) == 0.0);

  const MultiIndex k =
      key({SignedMode(+1, site(1)), SignedMode(+1, site(1)), SignedMode(-1, site(2))});
  CHECK(small_divisor(k, model) ==
        Catch::Approx(-(2.0 * std::sqrt(2.0) - std::sqrt(5.0))).epsilon(1e-15));
  CHECK(small_divisor(k.conjugated(), model) == -small_divisor(k, model));

  const FrequencyModel plane(1.0, 2);
  const MultiIndex planar = MultiIndex(std::vector<SignedMode>{
      SignedMode(+1, ModeIndex({3, 4, 0}, 2)), SignedMode(-1, ModeIndex({5, 0, 0}, 2))});
  CHECK(small_divisor(planar, plane) == 0.0);

  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> comp(-5, 5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SignedMode> entries;
    for (int i = 0; i < 2 + trial % 3; ++i)
      entries.emplace_back((rng() & 1) ? +1 : -1, site(comp(rng)));
    const MultiIndex r(entries);
    // conjugation reorders the canonical entries, so the sum only matches
    // to rounding
    CHECK_THAT(small_divisor(r.conjugated(), model),
               Catch::Matchers::WithinAbs(-small_divisor(r, model), 1e-14));
  }
}

TEST_CASE("scan reproduces the hand-enumerated minima") {
  const FrequencyModel model(1.0, 1);

  const DivisorScanResult two = min_divisor_scan(model, 2, 2.0, ResonanceCondition::h1);
  CHECK(two.min_abs_divisor == Catch::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-15));
  CHECK(two.witness.str() == "(+1,0) (-1,1)");
  CHECK_FALSE(two.empty_domain());

  const DivisorScanResult one = min_divisor_scan(model, 1, 2.0, ResonanceCondition::h1);
  CHECK(one.min_abs_divisor == 1.0);  // omega_0 with unit mass

  CHECK_THROWS_AS(min_divisor_scan(model, 0, 2.0, ResonanceCondition::h1), std::invalid_argument);
  CHECK_THROWS_AS(min_divisor_scan(model, 2, 0.5, ResonanceCondition::h1), std::invalid_argument);
}

TEST_CASE("scan witness reproduces the minimum exactly") {
  for (double mass : {1.0, 2.5}) {
    const FrequencyModel model(mass, 1);
    for (int r : {1, 2, 3})
      for (double N : {2.0, 3.0})
        for (auto cond :
             {ResonanceCondition::h1, ResonanceCondition::h2, ResonanceCondition::h3}) {
          const DivisorScanResult scan = min_divisor_scan(model, r, N, cond);
          if (scan.empty_domain()) continue;
          CHECK(std::abs(small_divisor(scan.witness, model)) == scan.min_abs_divisor);
        }
  }
}

TEST_CASE("scan agrees with the naive enumerator") {
  for (double mass : {1.0, 2.5}) {
    const FrequencyModel model(mass, 1);
    for (int r : {1, 2, 3})
      for (double N : {2.0, 3.0})
        for (auto cond :
             {ResonanceCondition::h1, ResonanceCondition::h2, ResonanceCondition::h3}) {
          const DivisorScanResult scan = min_divisor_scan(model, r, N, cond);
          const oracle::NaiveScan naive = oracle::naive_min_divisor(model, r, N, cond);
          if (naive.tuples == 0) {
            CHECK(scan.empty_domain());
          } else {
            CHECK(scan.min_abs_divisor == naive.min_divisor);
          }
        }
  }
}

TEST_CASE("exterior completions respect the momentum bounds") {
  const FrequencyModel model(1.0, 1);
  for (int r : {1, 2, 3})
    for (double N : {2.0, 3.0}) {
      const DivisorScanResult scan = min_divisor_scan(model, r, N, ResonanceCondition::h2);
      if (scan.empty_domain()) continue;
      REQUIRE(scan.exterior.size() == 1);
      CHECK(double(scan.exterior[0].weight_sq()) <= double(r) * N * double(r) * N);
      CHECK(double(scan.exterior[0].weight_sq()) > N * N);
      CHECK(has_zero_momentum(scan.witness));
    }

  const DivisorScanResult h3 = min_divisor_scan(model, 2, 2.0, ResonanceCondition::h3);
  REQUIRE(h3.exterior.size() == 2);
  for (const auto& b : h3.exterior) CHECK(double(b.weight_sq()) > 4.0);
  CHECK(has_zero_momentum(h3.witness));
}

TEST_CASE("H2 domain can be empty and is reported as such") {
  const FrequencyModel model(1.0, 1);
  const DivisorScanResult scan = min_divisor_scan(model, 1, 1.0, ResonanceCondition::h2);
  CHECK(scan.empty_domain());
  CHECK(std::isinf(scan.min_abs_divisor));
}

TEST_CASE("H1 minima never grow with the interior range") {
  const FrequencyModel model(1.0, 1);
  double prev = std::numeric_limits<double>::infinity();
  for (double N : {2.0, 3.0, 4.0}) {
    const double cur = min_divisor_scan(model, 2, N, ResonanceCondition::h1).min_abs_divisor;
    CHECK(cur <= prev);
    prev = cur;
  }
}

TEST_CASE("repeated scans are deterministic including the witness") {
  const FrequencyModel model(1.0, 1);
  const DivisorScanResult a = min_divisor_scan(model, 3, 3.0, ResonanceCondition::h1);
  const DivisorScanResult b = min_divisor_scan(model, 3, 3.0, ResonanceCondition::h1);
  CHECK(a.min_abs_divisor == b.min_abs_divisor);
  CHECK(a.witness == b.witness);
  CHECK(a.tuples_scanned == b.tuples_scanned);
}

TEST_CASE("alpha-gamma fit recovers synthetic power laws") {
  auto synthetic = [](double N, double value) {
    DivisorScanResult p;
    p.N = N;
    p.min_abs_divisor = value;
    p.tuples_scanned = 1;  // a fittable row must come from a non-empty domain
    return p;
  };

  const AlphaGammaFit exact = fit_alpha_gamma(
      {synthetic(2, 3.0 / 4.0), synthetic(4, 3.0 / 16.0), synthetic(8, 3.0 / 64.0)});
  CHECK(exact.alpha == Catch::Approx(2.0).margin(1e-12));
  CHECK(exact.gamma == Catch::Approx(3.0).epsilon(1e-12));
  CHECK(exact.rms_residual < 1e-12);

  const AlphaGammaFit flat =
      fit_alpha_gamma({synthetic(2, 0.7), synthetic(4, 0.7), synthetic(8, 0.7)});
  CHECK(flat.alpha == Catch::Approx(0.0).margin(1e-12));

  CHECK_THROWS_AS(fit_alpha_gamma({synthetic(2, 0.5), synthetic(4, 0.0), synthetic(8, 0.1)}),
                  NearResonanceError);
  CHECK_THROWS_AS(fit_alpha_gamma({synthetic(2, 0.5), synthetic(4, 0.4)}), std::invalid_argument);
}

TEST_CASE("fitted envelope sits below every scan minimum") {
  const FrequencyModel model(1.0, 1);
  std::vector<DivisorScanResult> rows;
  for (double N : {2.0, 4.0, 8.0})
    rows.push_back(min_divisor_scan(model, 3, N, ResonanceCondition::h1));
  const AlphaGammaFit fit = fit_alpha_gamma(rows);
  CHECK(fit.alpha > 0.0);
  for (const auto& row : rows)
    CHECK(fit.gamma * std::pow(row.N, -fit.alpha) <= row.min_abs_divisor * (1 + 1e-12));
}

TEST_CASE("smoothness threshold is the documented arithmetic") {
  CHECK(smoothness_threshold(2, 2, 10.0) == 248.0);
  CHECK(smoothness_threshold(1, 1, 0.0) == 2.0);
  for (int r : {1, 2, 3})
    CHECK(smoothness_threshold(r, 4, 1.5) - smoothness_threshold(r, 2, 1.5) ==
          Catch::Approx(2.0 * r * 2.0).epsilon(1e-15));
}

TEST_CASE("mass grid flags near-resonant masses") {
  const auto points = mass_grid_scan(1, 2, 2.0, 0.5, 2.0, 4);
  REQUIRE(points.size() == 4);
  CHECK(points.front().mass == 0.5);
  CHECK(points.back().mass == 2.0);
  for (const auto& p : points) {
    CHECK(p.min_abs_divisor > 0.0);
    CHECK_FALSE(p.flagged_resonant);
  }
  // an absurd floor flags everything
  const auto flagged = mass_grid_scan(1, 2, 2.0, 0.5, 2.0, 3, 10.0);
  for (const auto& p : flagged) CHECK(p.flagged_resonant);
}

TEST_CASE("scan rows serialize with a quoted witness") {
  const FrequencyModel model(1.0, 1);
  std::stringstream buf;
  write_scan_csv(buf, {min_divisor_scan(model, 2, 2.0, ResonanceCondition::h1)});
  std::string line;
  std::getline(buf, line);
  CHECK(line == "condition,r,N,m,min_abs_divisor,witness");
  std::getline(buf, line);
  CHECK(line.find("H1,2,2,1,") == 0);
  CHECK(line.find("\"(+1,0) (-1,1)\"") != std::string::npos);
}

TEST_CASE("condition names round-trip through the parser") {
  for (auto c : {ResonanceCondition::h1, ResonanceCondition::h2, ResonanceCondition::h3})
    CHECK(parse_condition(condition_name(c)) == c);
  CHECK_THROWS_AS(parse_condition("H9"), std::invalid_argument);
}
