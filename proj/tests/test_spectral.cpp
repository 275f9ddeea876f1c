#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "soblab/functionals.hpp"
#include "soblab/spectral.hpp"
#include "support/oracles.hpp"

using namespace soblab;

TEST_CASE("Gaussian spectral gap: C2 = sigma^2") {
  auto mu1 = build_measure(parse_potential("gaussian:sigma=1"), 4001);
  auto r1 = solve_spectral_gap(mu1);
  CHECK(r1.c2.value > 0.995);
  CHECK(r1.c2.value < 1.005);
  CHECK(std::abs(r1.lambda0) <= 1e-6);
  CHECK(r1.residual <= 1e-8);

  auto mu2 = build_measure(parse_potential("gaussian:sigma=2"), 4001);
  auto r2 = solve_spectral_gap(mu2);
  CHECK(r2.c2.value > 3.98);
  CHECK(r2.c2.value < 4.02);
}

TEST_CASE("poly:2=0.5 is the same measure as gaussian:sigma=1") {
  auto a = spectral_gap(build_measure(parse_potential("poly:2=0.5"), 2001));
  auto b = spectral_gap(build_measure(parse_potential("gaussian:sigma=1"), 2001));
  CHECK(a.value == Catch::Approx(b.value).epsilon(1e-6));
}

TEST_CASE("gap eigenfunction of the Gaussian is linear over the bulk") {
  auto mu = build_measure(parse_potential("gaussian:sigma=1"), 4001);
  auto r = solve_spectral_gap(mu);
  const auto& v = r.eigenfunction;

  // normalized: mean 0, variance 1, positive at the right end
  CHECK(std::abs(mean(v)) <= 1e-8);
  CHECK(variance(v) == Catch::Approx(1.0).margin(1e-8));
  CHECK(v[v.size() - 1] > 0.0);

  // v is proportional to x where the measure carries mass. Near the
  // truncation boundary (density ~ 1e-18 of the peak) the zero-flux
  // condition bends the eigenfunction away from linearity by O(1/R); the
  // comparison is made on nodes with density >= 1e-12 of the maximum.
  double wmax = 0.0;
  for (std::size_t i = 0; i < mu->size(); ++i) wmax = std::max(wmax, mu->weight(i));
  double dev = 0.0;
  for (std::size_t i = 0; i < mu->size(); ++i) {
    if (mu->weight(i) >= 1e-12 * wmax) {
      dev = std::max(dev, std::abs(v[i] - mu->node(i)));
    }
  }
  CHECK(dev <= 1e-3);

  // Rayleigh quotient at the optimum: dirichlet(v) * C2 = 1
  CHECK(dirichlet(v) * r.c2.value == Catch::Approx(1.0).margin(1e-4));

  // symmetric V: v is odd
  double odd = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    odd = std::max(odd, std::abs(v[i] + v[v.size() - 1 - i]));
  }
  CHECK(odd <= 1e-6);
}

TEST_CASE("eigensolve consistency: C2 equals its own discrete Rayleigh quotient") {
  for (const char* s : {"gaussian:sigma=1", "poly:2=0.5,4=0.25", "power:alpha=1.5"}) {
    auto mu = build_measure(parse_potential(s), 2001);
    auto r = solve_spectral_gap(mu);
    CHECK(r.discrete_rayleigh_c2 == Catch::Approx(r.c2.value).epsilon(1e-6));
    // cross-discretization: module functionals reproduce the quotient to O(h^2)
    CHECK(variance(r.eigenfunction) / dirichlet(r.eigenfunction) ==
          Catch::Approx(r.c2.value).epsilon(1e-4));
  }
}

TEST_CASE("grid convergence of C2 is O(h^2)") {
  auto spec = parse_potential("poly:2=0.5,4=0.25");
  double c1 = spectral_gap(build_measure(spec, 501)).value;
  double c2 = spectral_gap(build_measure(spec, 1001)).value;
  double c4 = spectral_gap(build_measure(spec, 2001)).value;
  double e12 = std::abs(c1 - c2) / c2;
  double e24 = std::abs(c2 - c4) / c4;
  CHECK(e24 > 0.0);
  CHECK(e12 / e24 >= 3.0);
}

TEST_CASE("dilating the measure scales C2 by s^2") {
  double c_1 = spectral_gap(build_measure(parse_potential("gaussian:sigma=1"), 2001)).value;
  double c_2 = spectral_gap(build_measure(parse_potential("gaussian:sigma=2"), 2001)).value;
  CHECK(c_2 / c_1 == Catch::Approx(4.0).epsilon(0.01));
}

TEST_CASE("C2 never exceeds the Bakry-Emery bound for strictly convex V") {
  for (const char* s : {"gaussian:sigma=1", "gaussian:sigma=2", "poly:2=0.5,4=0.25"}) {
    auto spec = parse_potential(s);
    double c2 = spectral_gap(build_measure(spec, 2001)).value;
    double bound = bakry_emery_bound(spec, 2.0).value;
    CHECK(c2 <= bound + 1e-6);
  }
}

TEST_CASE("bakry_emery_bound values and applicability") {
  CHECK(bakry_emery_bound(parse_potential("gaussian:sigma=1"), 1.5).value ==
        Catch::Approx(4.0 / 3.0));
  CHECK(bakry_emery_bound(parse_potential("poly:2=0.5,4=0.25"), 2.0).value ==
        Catch::Approx(1.0).margin(1e-9));

  auto na = bakry_emery_bound(parse_potential("power:alpha=1.5"), 1.5);
  CHECK(na.infinite);
  CHECK(std::isinf(na.value));

  CHECK_THROWS_AS(bakry_emery_bound(parse_potential("gaussian:sigma=1"), 2.5),
                  invalid_input_error);
}

TEST_CASE("tiny spectral gap is flagged, not thrown") {
  // deep symmetric double well: the gap is exponentially small in the
  // barrier height, far below the 1e-10 floor
  auto spec = parse_potential("poly:2=-5,4=0.1");
  auto r = solve_spectral_gap(build_measure(spec, 2001));
  CHECK(r.c2.infinite);
  CHECK(std::isinf(r.c2.value));
}

TEST_CASE("spectral_gap requires at least 64 nodes") {
  auto mu = build_measure(parse_potential("gaussian:sigma=1"), 32);
  CHECK_THROWS_AS(spectral_gap(mu), invalid_input_error);
}
