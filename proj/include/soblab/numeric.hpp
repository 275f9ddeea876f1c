#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <span>
#include <string>

#include "soblab/errors.hpp"

namespace soblab::num {

/// Compensated (Neumaier) accumulator. All quadrature sums in the library go
/// through this so that normalization identities hold to ~1e-15 even on
/// grids with thousands of nodes.
class Accumulator {
public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double sum(std::span<const double> xs) {
  Accumulator acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

inline double weighted_sum(std::span<const double> w, std::span<const double> f) {
  Accumulator acc;
  for (std::size_t i = 0; i < w.size(); ++i) acc.add(w[i] * f[i]);
  return acc.value();
}

/// Golden-section minimization on [a, b]. The function need not be unimodal;
/// callers bracket a local minimum first (typically with a coarse grid scan).
template <class F>
double golden_section_min(F f, double a, double b, double tol = 1e-12, int max_iters = 200) {
  constexpr double invphi = 0.61803398874989484820;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < max_iters && (b - a) > tol * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 < f2 ? x1 : x2;
}

/// Grid scan plus golden-section refinement; returns (argmin, min value).
template <class F>
std::pair<double, double> scan_min(F f, double a, double b, int samples = 2048) {
  double best_x = a, best_f = f(a);
  for (int i = 1; i <= samples; ++i) {
    double x = a + (b - a) * static_cast<double>(i) / samples;
    double fx = f(x);
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
  }
  double cell = (b - a) / samples;
  double lo = std::max(a, best_x - cell), hi = std::min(b, best_x + cell);
  double x = golden_section_min(f, lo, hi);
  double fx = f(x);
  if (fx < best_f) return {x, fx};
  return {best_x, best_f};
}

/// Solve f(x) = target by bisection on [lo, hi]; f(lo) < target < f(hi) (or
/// reversed). Assumes a sign change, not monotonicity.
template <class F>
double bisect_to(F f, double lo, double hi, double target, int iters = 128) {
  double flo = f(lo) - target;
  double fhi = f(hi) - target;
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) {
    throw numerical_error("bisect_to: endpoints do not bracket the target");
  }
  for (int i = 0; i < iters; ++i) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid) - target;
    if (fm == 0.0) return mid;
    if ((fm > 0) == (fhi > 0)) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (lo + hi);
}

/// Fixed 17-significant-digit rendering; round-trips doubles exactly and
/// keeps every report byte-deterministic.
inline std::string fmt_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw invalid_spec_error("not a number: '" + s + "'");
  }
  if (pos != s.size()) throw invalid_spec_error("trailing characters in number: '" + s + "'");
  return v;
}

}  // namespace soblab::num
