#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "soblab/moments.hpp"
#include "soblab/random_inputs.hpp"

using namespace soblab;

namespace {
struct RandomCase {
  std::vector<double> w, u;
};

RandomCase random_case(Rng& rng) {
  std::size_t n = 2 + rng.index(63);
  RandomCase c;
  c.w = random_probability_weights(rng, n);
  std::vector<double> nodes(n);
  for (std::size_t i = 0; i < n; ++i) nodes[i] = -1.0 + 2.0 * static_cast<double>(i) / (n - 1);
  c.u = random_test_values(rng, nodes, random_kind(rng));
  return c;
}
}  // namespace

TEST_CASE("lemma4: equality cases") {
  std::vector<double> w{0.25, 0.3, 0.45};
  std::vector<double> cu{2.0, 2.0, 2.0};
  CHECK(std::abs(lemma4_gap(w, cu, 1.5)) <= 1e-13);  // constants: both sides ubar^2

  std::vector<double> u{1.0, -2.0, 0.5};
  CHECK(std::abs(lemma4_gap(w, u, 2.0)) <= 1e-12);   // q = 2: the variance identity

  // q = 1: gap = (int |u|)^2 - ubar^2, positive when u changes sign
  double ubar = 0.25 * 1.0 + 0.3 * -2.0 + 0.45 * 0.5;
  double abs_mean = 0.25 * 1.0 + 0.3 * 2.0 + 0.45 * 0.5;
  CHECK(lemma4_gap(w, u, 1.0) ==
        Catch::Approx(abs_mean * abs_mean - ubar * ubar).margin(1e-12));
  CHECK(lemma4_gap(w, u, 1.0) > 0.0);
}

TEST_CASE("lemma4 gap is nonnegative over randomized measures") {
  Rng rng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    auto c = random_case(rng);
    double q = rng.uniform(1.0, 2.0);
    CHECK(lemma4_gap(c.w, c.u, q) >= -1e-12);
  }
}

TEST_CASE("lemma4 is continuous in q") {
  Rng rng(17);
  auto c = random_case(rng);
  double scale = 0.0;
  for (double x : c.u) scale = std::max(scale, std::abs(x));
  scale = std::max(scale, 1.0) * std::max(scale, 1.0);
  const double dq = 1e-3;
  double prev = lemma4_gap(c.w, c.u, 1.0);
  for (double q = 1.0 + dq; q <= 2.0 + 1e-12; q += dq) {
    double cur = lemma4_gap(c.w, c.u, q);
    CHECK(std::abs(cur - prev) <= 10.0 * dq * scale);
    prev = cur;
  }
}

TEST_CASE("remark1: equality cases and range checks") {
  std::vector<double> w{0.5, 0.5};
  std::vector<double> cu{1.3, 1.3};
  CHECK(std::abs(remark1_slack(w, cu, 3.0, Remark1Side::upper_q_ge_2)) <= 1e-13);
  CHECK(std::abs(remark1_slack(w, cu, 1.5, Remark1Side::lower_q_le_2)) <= 1e-13);

  std::vector<double> u{2.0, -1.0};
  CHECK(std::abs(remark1_slack(w, u, 2.0, Remark1Side::upper_q_ge_2)) <= 1e-12);
  CHECK(std::abs(remark1_slack(w, u, 2.0, Remark1Side::lower_q_le_2)) <= 1e-12);

  CHECK_THROWS_AS(remark1_slack(w, u, 1.5, Remark1Side::upper_q_ge_2), invalid_input_error);
  CHECK_THROWS_AS(remark1_slack(w, u, 3.0, Remark1Side::lower_q_le_2), invalid_input_error);
  std::vector<double> zero{0.0, 0.0};
  CHECK_THROWS_AS(remark1_slack(w, zero, 1.5, Remark1Side::lower_q_le_2),
                  degenerate_input_error);
}

TEST_CASE("remark1 slack is nonnegative over randomized measures") {
  Rng rng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    auto c = random_case(rng);
    bool upper = rng.uniform() < 0.5;
    double q = upper ? rng.uniform(2.0, 8.0) : rng.uniform(1.001, 2.0);
    double uq = 0.0;
    for (std::size_t i = 0; i < c.w.size(); ++i) uq += c.w[i] * std::pow(std::abs(c.u[i]), q);
    if (!(uq > 0.0)) continue;
    double slack = remark1_slack(c.w, c.u, q,
                                 upper ? Remark1Side::upper_q_ge_2 : Remark1Side::lower_q_le_2);
    CHECK(slack >= -1e-10 * std::max(1.0, uq));
  }
}

TEST_CASE("remark2: hand-computed two-atom case") {
  std::vector<double> w{0.5, 0.5};
  std::vector<double> u{1.0, -1.0};
  // ubar = 0, int |u|^4 = 1: LHS = 1, RHS = 3, gap = 2
  CHECK(remark2_gap(w, u, 4.0) == Catch::Approx(2.0).margin(1e-12));
  CHECK_THROWS_AS(remark2_gap(w, u, 2.0), invalid_input_error);
  std::vector<double> cu{0.7, 0.7};
  CHECK(std::abs(remark2_gap(w, cu, 4.0)) <= 1e-13);
}

TEST_CASE("remark2 gap is nonnegative over randomized measures") {
  Rng rng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    auto c = random_case(rng);
    double q = rng.uniform(2.0, 10.0);
    if (q <= 2.0) q = 2.0001;
    CHECK(remark2_gap(c.w, c.u, q) >= -1e-10);
  }
}

TEST_CASE("lemma4 at q=2 and remark2 as q -> 2+ agree") {
  Rng rng(9);
  auto c = random_case(rng);
  CHECK(std::abs(lemma4_gap(c.w, c.u, 2.0)) <= 1e-11);
  CHECK(std::abs(remark2_gap(c.w, c.u, 2.0 + 1e-9)) <= 1e-6);
}

TEST_CASE("lift identity residual vanishes") {
  std::vector<double> w{0.2, 0.3, 0.5};
  std::vector<double> u{1.0, -0.5, 2.0};
  CHECK(std::abs(theorem1_lift_residual(w, u, 1.5)) <= 1e-12);

  // mean-zero input: same identity
  std::vector<double> v{1.0, -0.4, -0.16};
  CHECK(std::abs(theorem1_lift_residual(w, v, 1.5)) <= 1e-12);

  Rng rng(42);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto c = random_case(rng);
    double p = rng.uniform(1.001, 1.999);
    double scale = 1.0;
    for (double x : c.u) scale = std::max(scale, x * x);
    worst = std::max(worst, std::abs(theorem1_lift_residual(c.w, c.u, p)) / scale);
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("moment suite input validation") {
  std::vector<double> w{0.5, 0.6};  // not normalized
  std::vector<double> u{1.0, 2.0};
  CHECK_THROWS_AS(lemma4_gap(w, u, 1.5), invalid_input_error);
  std::vector<double> wneg{1.5, -0.5};
  CHECK_THROWS_AS(lemma4_gap(wneg, u, 1.5), invalid_input_error);
  std::vector<double> w1{1.0};
  CHECK_THROWS_AS(lemma4_gap(w1, u, 1.5), invalid_input_error);  // length mismatch
}
