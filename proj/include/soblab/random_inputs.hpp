#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "soblab/measure.hpp"

namespace soblab {

/// Deterministic generator for the randomized suites. Built on xoshiro256**
/// with splitmix64 seeding so that a (seed, trial) pair reproduces the same
/// inputs on any platform; failures can be replayed from the seed alone.
class Rng {
public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) {
      // splitmix64
      x += 0x9e3779b97f4a7c15ull;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
      s = z ^ (z >> 31);
    }
  }

  std::uint64_t next() {
    auto rotl = [](std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
    std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(next() % n); }
  /// Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

private:
  std::uint64_t state_[4];
};

/// Arbitrary positive normalized weight vector (not an e^{-V} grid); the
/// moment inequalities hold for any probability measure, so the suites draw
/// from the wider class.
inline std::vector<double> random_probability_weights(Rng& rng, std::size_t n) {
  std::vector<double> w(n);
  double total = 0.0;
  for (auto& x : w) {
    x = -std::log(1.0 - rng.uniform());  // Exp(1), strictly positive
    total += x;
  }
  for (auto& x : w) x /= total;
  return w;
}

enum class TestFunctionKind {
  polynomial,
  exponential,
  piecewise_sign,
  spike,
  smooth_fourier,
};

/// Test-function families for the randomized inequality suites. Nodes are
/// rescaled to [-1, 1] internally so wide domains cannot overflow.
inline std::vector<double> random_test_values(Rng& rng, std::span<const double> nodes,
                                              TestFunctionKind kind) {
  const std::size_t n = nodes.size();
  double lo = nodes.front(), hi = nodes.back();
  double mid = 0.5 * (lo + hi), half = std::max(0.5 * (hi - lo), 1e-30);
  auto scaled = [&](double x) { return (x - mid) / half; };
  std::vector<double> u(n);
  switch (kind) {
    case TestFunctionKind::polynomial: {
      int deg = 1 + static_cast<int>(rng.index(5));
      std::vector<double> c(static_cast<std::size_t>(deg) + 1);
      for (auto& ck : c) ck = rng.uniform(-2.0, 2.0);
      for (std::size_t i = 0; i < n; ++i) {
        double t = scaled(nodes[i]), acc = 0.0;
        for (std::size_t k = c.size(); k-- > 0;) acc = acc * t + c[k];
        u[i] = acc;
      }
      break;
    }
    case TestFunctionKind::exponential: {
      double a = rng.uniform(-2.0, 2.0);
      double shift = rng.uniform(-1.0, 1.0);
      for (std::size_t i = 0; i < n; ++i) u[i] = std::exp(a * scaled(nodes[i])) + shift;
      break;
    }
    case TestFunctionKind::piecewise_sign: {
      int pieces = 2 + static_cast<int>(rng.index(3));
      std::vector<double> breaks(static_cast<std::size_t>(pieces) - 1);
      for (auto& b : breaks) b = rng.uniform(-1.0, 1.0);
      std::sort(breaks.begin(), breaks.end());
      std::vector<double> levels(static_cast<std::size_t>(pieces));
      for (auto& l : levels) l = rng.uniform(-3.0, 3.0);
      for (std::size_t i = 0; i < n; ++i) {
        double t = scaled(nodes[i]);
        std::size_t seg = 0;
        while (seg < breaks.size() && t > breaks[seg]) ++seg;
        u[i] = levels[seg];
      }
      break;
    }
    case TestFunctionKind::spike: {
      double base = rng.uniform(-0.5, 0.5);
      for (auto& x : u) x = base;
      u[rng.index(n)] = rng.uniform(2.0, 20.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
      break;
    }
    case TestFunctionKind::smooth_fourier: {
      double c0 = rng.uniform(-1.0, 1.0);
      for (std::size_t i = 0; i < n; ++i) u[i] = c0;
      for (int k = 1; k <= 4; ++k) {
        double ak = rng.uniform(-1.0, 1.0) / k;
        double bk = rng.uniform(-1.0, 1.0) / k;
        for (std::size_t i = 0; i < n; ++i) {
          double t = scaled(nodes[i]);
          u[i] += ak * std::cos(3.141592653589793 * k * t) +
                  bk * std::sin(3.141592653589793 * k * t);
        }
      }
      break;
    }
  }
  return u;
}

inline TestFunctionKind random_kind(Rng& rng) {
  switch (rng.index(5)) {
    case 0: return TestFunctionKind::polynomial;
    case 1: return TestFunctionKind::exponential;
    case 2: return TestFunctionKind::piecewise_sign;
    case 3: return TestFunctionKind::spike;
    default: return TestFunctionKind::smooth_fourier;
  }
}

/// Low-frequency smooth function on a measure's grid (for the proof-identity
/// suites, which need H^1-regular inputs).
inline GridFunction random_smooth_function(Rng& rng, const MeasurePtr& mu) {
  auto values = random_test_values(rng, mu->nodes(), TestFunctionKind::smooth_fourier);
  return GridFunction(mu, std::move(values));
}

}  // namespace soblab
