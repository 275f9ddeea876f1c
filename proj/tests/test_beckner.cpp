#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "soblab/beckner.hpp"
#include "soblab/random_inputs.hpp"
#include "support/oracles.hpp"

using namespace soblab;

namespace {
MeasurePtr gauss4001() {
  static MeasurePtr mu = build_measure(parse_potential("gaussian:sigma=1"), 4001);
  return mu;
}
}  // namespace

TEST_CASE("beckner_quotient against Gaussian oracles") {
  auto mu = gauss4001();
  auto x = GridFunction::from_fn(mu, [](double t) { return t; });
  for (double p : {1.2, 1.5, 2.0}) {
    // u = x: quotient = (1 - (E|X|^{2/p})^p) / (p-1), dirichlet = 1
    double expected = (1.0 - std::pow(oracles::gaussian_abs_moment(2.0 / p), p)) / (p - 1.0);
    CHECK(beckner_quotient(x, p) == Catch::Approx(expected).epsilon(1e-5));
  }

  auto e = GridFunction::from_fn(mu, [](double t) { return std::exp(0.4 * t); });
  double expected = oracles::gaussian_exp_deficit(0.4, 1.5) / oracles::gaussian_exp_dirichlet(0.4);
  CHECK(beckner_quotient(e, 1.5) == Catch::Approx(expected).epsilon(1e-5));

  CHECK_THROWS_AS(beckner_quotient(GridFunction::constant(mu, 1.0), 1.5),
                  degenerate_input_error);
}

TEST_CASE("near-constant trial functions reach (2/p) * Rayleigh(x)") {
  auto mu = gauss4001();
  auto u = GridFunction::from_fn(mu, [](double t) { return 1.0 + 1e-3 * t; });
  for (double p : {1.25, 1.5, 2.0}) {
    CHECK(beckner_quotient(u, p) == Catch::Approx(2.0 / p).epsilon(1e-4));
  }
}

TEST_CASE("quotient gradient matches central finite differences") {
  auto mu = build_measure(parse_potential("gaussian:sigma=1"), 257);
  Rng rng(5);
  auto u = GridFunction::from_fn(mu, [](double t) { return std::exp(0.3 * t) + 0.2 * t; });
  for (double p : {1.3, 2.0}) {
    auto grad = beckner_quotient_gradient(u, p);
    double scale = 0.0;
    for (double g : grad) scale = std::max(scale, std::abs(g));
    for (int probe = 0; probe < 25; ++probe) {
      std::size_t j = rng.index(mu->size());
      double h = 2e-6;
      std::vector<double> vp(u.values().begin(), u.values().end());
      vp[j] += h;
      std::vector<double> vm(u.values().begin(), u.values().end());
      vm[j] -= h;
      double fd = (beckner_quotient(GridFunction(mu, vp), p) -
                   beckner_quotient(GridFunction(mu, vm), p)) /
                  (2.0 * h);
      CHECK(grad[j] == Catch::Approx(fd).margin(1e-6 * std::max(1.0, scale)));
    }
  }
}

TEST_CASE("estimate_cp on the Gaussian matches the Beckner constant 2/p") {
  auto mu = gauss4001();
  for (double p : {1.25, 1.5}) {
    auto est = estimate_cp(mu, p);
    CHECK(est.estimate.value >= 2.0 / p - 0.03);
    CHECK(est.estimate.value <= 2.0 / p + 0.02);
    CHECK(est.estimate.method == EstimateMethod::variational_lower);
  }

  auto p2 = estimate_cp(mu, 2.0);
  double c2 = spectral_gap(mu).value;
  CHECK(p2.estimate.value == Catch::Approx(1.0).epsilon(0.01));
  CHECK(p2.estimate.value == Catch::Approx(c2).epsilon(0.01));
}

TEST_CASE("estimate_cp rejects p outside (1,2]") {
  auto mu = gauss4001();
  CHECK_THROWS_AS(estimate_cp(mu, 1.0), invalid_input_error);
  CHECK_THROWS_AS(estimate_cp(mu, 2.5), invalid_input_error);
}

TEST_CASE("restricted mode never exceeds unrestricted") {
  auto mu = gauss4001();
  auto unres = estimate_cp(mu, 1.5, CpMode::unrestricted);
  auto res = estimate_cp(mu, 1.5, CpMode::restricted);
  CHECK(res.estimate.value <= unres.estimate.value + 1e-9);
}

TEST_CASE("reported value is the quotient of the returned witness") {
  auto mu = gauss4001();
  for (double p : {1.5, 2.0}) {
    auto est = estimate_cp(mu, p);
    double requote = beckner_quotient(est.witness, p);
    CHECK(std::abs(requote - est.estimate.value) <= 1e-12 * std::abs(est.estimate.value));
  }
}

TEST_CASE("sandwich: (2/p) C2 <= estimate <= C2/(p-1)") {
  for (const char* s : {"gaussian:sigma=1", "poly:2=0.5,4=0.25", "power:alpha=1.5"}) {
    auto mu = build_measure(parse_potential(s), 2001);
    auto gap = solve_spectral_gap(mu);
    double c2 = gap.c2.value;
    for (double p : {1.25, 1.5, 2.0}) {
      double est = estimate_cp(mu, p).estimate.value;
      CHECK(est >= (2.0 / p) * c2 * (1.0 - 1e-2));
      CHECK(est <= c2 / (p - 1.0) * (1.0 + 1e-2));

      // the left end is achieved by the 1 + eps v_gap seed as eps -> 0
      std::vector<double> u(mu->size());
      for (std::size_t i = 0; i < u.size(); ++i) u[i] = 1.0 + 1e-3 * gap.eigenfunction[i];
      double seed_quot = beckner_quotient(GridFunction(mu, u), p);
      CHECK(seed_quot >= (2.0 / p) * c2 * (1.0 - 5e-3));
    }
  }
}

TEST_CASE("adding seeds never lowers the estimate") {
  auto mu = build_measure(parse_potential("poly:2=0.5,4=0.25"), 1001);
  auto base = estimate_cp(mu, 1.5);
  Rng rng(3);
  std::vector<GridFunction> extra;
  extra.push_back(random_smooth_function(rng, mu));
  extra.push_back(random_smooth_function(rng, mu));
  auto more = estimate_cp(mu, 1.5, CpMode::unrestricted, extra);
  CHECK(more.estimate.value >= base.estimate.value - 1e-15);
  CHECK(more.estimate.seeds_used.size() == base.estimate.seeds_used.size() + 2);
}

TEST_CASE("estimate_c1_entropy on the Gaussian: Gross constant 2 sigma^2") {
  auto est = estimate_c1_entropy(gauss4001());
  CHECK(est.estimate.value >= 2.0 * 0.95);
  CHECK(est.estimate.value <= 2.0 * 1.05);
  CHECK(est.sweep.size() == 5);
}

TEST_CASE("p -> 1 sweep flags: alpha=2 bounded, alpha=1.2 divergent") {
  auto bounded = estimate_c1_entropy(build_measure(parse_potential("power:alpha=2"), 1501));
  CHECK(bounded.bounded);

  auto divergent = estimate_c1_entropy(build_measure(parse_potential("power:alpha=1.2"), 1501));
  CHECK_FALSE(divergent.bounded);
  CHECK(divergent.last_ratio >= 1.2);
}
