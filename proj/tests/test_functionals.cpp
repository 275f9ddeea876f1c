#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "soblab/functionals.hpp"
#include "soblab/random_inputs.hpp"
#include "support/oracles.hpp"

using namespace soblab;

namespace {
MeasurePtr gaussian_measure(std::size_t n = 4001) {
  static MeasurePtr cached = build_measure(parse_potential("gaussian:sigma=1"), 4001);
  if (n == 4001) return cached;
  return build_measure(parse_potential("gaussian:sigma=1"), n);
}
}  // namespace

TEST_CASE("dirichlet energy") {
  auto mu = gaussian_measure();
  CHECK(dirichlet(GridFunction::constant(mu, 3.7)) <= 1e-20);  // boundary stencil round-off

  auto x = GridFunction::from_fn(mu, [](double t) { return t; });
  CHECK(dirichlet(x) == Catch::Approx(1.0).margin(1e-6));

  auto e = GridFunction::from_fn(mu, [](double t) { return std::exp(0.3 * t); });
  CHECK(dirichlet(e) == Catch::Approx(oracles::gaussian_exp_dirichlet(0.3)).epsilon(1e-6));
}

TEST_CASE("variance") {
  auto mu = gaussian_measure();
  CHECK(variance(GridFunction::constant(mu, -2.0)) == Catch::Approx(0.0).margin(1e-15));

  auto x = GridFunction::from_fn(mu, [](double t) { return t; });
  CHECK(variance(x) == Catch::Approx(1.0).margin(1e-6));

  auto shifted = x + 1.0;
  CHECK(variance(shifted) == Catch::Approx(variance(x)).margin(1e-12));
}

TEST_CASE("beckner deficit: constants, p = 2, exponential oracle") {
  auto mu = gaussian_measure();
  CHECK(std::abs(beckner_deficit(GridFunction::constant(mu, 2.5), 1.5)) <= 1e-13);
  CHECK_THROWS_AS(beckner_deficit(GridFunction::constant(mu, 1.0), 1.0), invalid_input_error);
  CHECK_THROWS_AS(beckner_deficit(GridFunction::constant(mu, 1.0), 2.5), invalid_input_error);

  // p = 2 equals the variance for nonnegative functions
  auto pos = GridFunction::from_fn(mu, [](double t) { return 2.0 + std::sin(t); });
  CHECK(beckner_deficit(pos, 2.0) == Catch::Approx(variance(pos)).margin(1e-12));

  auto e = GridFunction::from_fn(mu, [](double t) { return std::exp(0.4 * t); });
  CHECK(beckner_deficit(e, 1.5) ==
        Catch::Approx(oracles::gaussian_exp_deficit(0.4, 1.5)).epsilon(1e-6));
}

TEST_CASE("log-Sobolev entropy") {
  auto mu = gaussian_measure();
  CHECK(std::abs(log_sobolev_entropy(GridFunction::constant(mu, 1.7))) <= 1e-13);
  CHECK_THROWS_AS(log_sobolev_entropy(GridFunction::constant(mu, 0.0)), degenerate_input_error);

  auto e = GridFunction::from_fn(mu, [](double t) { return std::exp(0.3 * t); });
  CHECK(log_sobolev_entropy(e) == Catch::Approx(oracles::gaussian_exp_entropy(0.3)).epsilon(1e-6));

  // single nonzero node: w u^2 log(1/w)
  std::vector<double> v(mu->size(), 0.0);
  std::size_t j = mu->size() / 3;
  v[j] = 2.0;
  double w = mu->weight(j);
  CHECK(log_sobolev_entropy(GridFunction(mu, v)) ==
        Catch::Approx(w * 4.0 * std::log(1.0 / w)).epsilon(1e-12));
}

TEST_CASE("deficit tends to the entropy as p -> 1") {
  auto mu = gaussian_measure();
  auto e = GridFunction::from_fn(mu, [](double t) { return std::exp(0.3 * t); });
  double ent = log_sobolev_entropy(e);
  double def = beckner_deficit(e, 1.0001);
  CHECK(std::abs(def - ent) / ent <= 1e-3);

  // also on a heavier test function
  auto f = GridFunction::from_fn(mu, [](double t) { return 1.0 + 0.5 * std::sin(t) + 0.1 * t; });
  double entf = log_sobolev_entropy(f);
  CHECK(std::abs(beckner_deficit(f, 1.0001) - entf) / entf <= 1e-3);
}

TEST_CASE("homogeneity and nonnegativity of the deficit") {
  auto mu = gaussian_measure(1001);
  Rng rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    auto u = GridFunction(mu, random_test_values(rng, mu->nodes(), random_kind(rng)));
    double p = rng.uniform(1.01, 2.0);
    double d = beckner_deficit(u, p);
    CHECK(d >= -1e-12);

    double lambda = rng.uniform(0.2, 5.0);
    auto lu = lambda * u;
    CHECK(beckner_deficit(lu, p) ==
          Catch::Approx(lambda * lambda * d).margin(1e-11 * std::max(1.0, d)));
  }
  auto f = GridFunction::from_fn(mu, [](double t) { return std::exp(0.2 * t) - 0.4; });
  double ent = log_sobolev_entropy(f);
  CHECK(log_sobolev_entropy(3.0 * f) == Catch::Approx(9.0 * ent).epsilon(1e-11));
}
