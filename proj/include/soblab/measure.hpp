#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "soblab/errors.hpp"
#include "soblab/numeric.hpp"
#include "soblab/potential.hpp"

namespace soblab {

class GridMeasure;
using MeasurePtr = std::shared_ptr<const GridMeasure>;

/// Normalized discrete measure on a uniform grid: nodes x_0 < ... < x_{n-1},
/// trapezoid weights w_i proportional to e^{-V(x_i)} * (cell length), scaled
/// so that sum w_i = 1 exactly in the discrete model. The stored potential
/// carries the normalization constant computed on this grid, so the measure
/// is the exact discrete log-density of its own weights: w_i = c_i e^{-V(x_i)}.
///
/// Instances are immutable; grid functions hold a shared_ptr and identify
/// their measure by pointer.
class GridMeasure {
public:
  std::size_t size() const { return nodes_.size(); }
  double node(std::size_t i) const { return nodes_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }
  double spacing() const { return h_; }
  Interval domain() const { return domain_; }
  /// Estimated e^{-V} mass outside the truncation interval (exponential
  /// tail fit at the two boundary nodes). +inf when the fit cannot certify
  /// decay at an explicitly requested domain.
  double eps_tail() const { return eps_tail_; }
  bool explicit_domain() const { return explicit_domain_; }
  /// True when some weights were floored at 1e-300 because e^{-V}
  /// underflowed (grids extended far beyond the natural domain). Spectral
  /// constants of such a measure describe the floored plateau.
  bool density_floored() const { return density_floored_; }
  const PotentialSpec& potential() const { return pot_; }

  /// Trapezoid cell length of node i (h/2 at the two ends, h inside).
  double cell(std::size_t i) const {
    return (i == 0 || i + 1 == nodes_.size()) ? 0.5 * h_ : h_;
  }

private:
  friend MeasurePtr build_measure(const PotentialSpec&, std::size_t, std::optional<Interval>, double);

  GridMeasure(std::vector<double> nodes, std::vector<double> weights, double h,
              PotentialSpec pot, Interval dom, double eps_tail, bool explicit_dom,
              bool floored)
      : nodes_(std::move(nodes)),
        weights_(std::move(weights)),
        h_(h),
        pot_(std::move(pot)),
        domain_(dom),
        eps_tail_(eps_tail),
        explicit_domain_(explicit_dom),
        density_floored_(floored) {}

  std::vector<double> nodes_;
  std::vector<double> weights_;
  double h_;
  PotentialSpec pot_;
  Interval domain_;
  double eps_tail_;
  bool explicit_domain_;
  bool density_floored_;
};

/// Truncation interval chosen by expanding outward from the minimizer of V
/// until e^{-V} falls below 1e-18 of its maximum on both sides. Tabulated
/// potentials return their table range.
inline Interval auto_domain(const PotentialSpec& V) {
  if (V.family() == PotentialSpec::Family::tabulated) return V.native_range();
  const double drop = -std::log(1e-18);  // 18 ln 10
  double x0 = V.minimizer_hint();
  double v0 = V.value(x0);
  // The threshold can also be crossed at interior barriers (double wells),
  // so the expansion accepts a radius only once V is above the threshold
  // AND monotone outward there, then walks inward to the outermost crossing.
  auto expand = [&](double dir) {
    double r = 1.0;
    for (int k = 0; k < 80; ++k) {
      bool beyond = V.value(x0 + dir * r) - v0 >= drop;
      if (beyond) {
        for (double f : {1.25, 1.5, 2.0, 4.0}) {
          double probe = x0 + dir * r * f;
          if (dir * V.dvalue(probe) <= 0.0 || V.value(probe) - v0 < drop) {
            beyond = false;
            break;
          }
        }
      }
      if (beyond) {
        double step = r / 256.0;
        double t = r;
        while (t - step > 0.0 && V.value(x0 + dir * (t - step)) - v0 >= drop) t -= step;
        double lo = std::max(t - step, 0.0);
        return num::bisect_to([&](double s) { return V.value(x0 + dir * s) - v0; },
                              lo, t, drop);
      }
      r *= 2.0;
    }
    throw non_normalizable_error("density does not decay: " + V.render());
  };
  double right = expand(+1.0);
  double left = expand(-1.0);
  return {x0 - left, x0 + right};
}

/// Build the normalized discrete measure for dmu = e^{-V} dx.
///
/// domain = nullopt selects the automatic truncation rule; an explicit
/// domain is honored as given (the measure is then "e^{-V} restricted to
/// [a,b], renormalized") and the eps_tail tolerance check is the caller's
/// responsibility.
inline MeasurePtr build_measure(const PotentialSpec& V, std::size_t n,
                                std::optional<Interval> domain = std::nullopt,
                                double tail_tol = 1e-12) {
  if (n < 16) throw invalid_input_error("build_measure: need at least 16 nodes");
  const bool explicit_dom = domain.has_value();
  Interval dom = domain ? *domain : auto_domain(V);
  if (!(dom.hi > dom.lo)) throw invalid_input_error("build_measure: empty domain");

  const double h = dom.length() / static_cast<double>(n - 1);
  std::vector<double> nodes(n);
  for (std::size_t i = 0; i < n; ++i) nodes[i] = dom.lo + h * static_cast<double>(i);
  nodes[n - 1] = dom.hi;

  // raw potential values, shifted by their minimum before exponentiating
  std::vector<double> v0(n);
  double base = V.log_norm();
  double vmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    v0[i] = V.value(nodes[i]) - base;
    if (!std::isfinite(v0[i])) throw numerical_error("potential not finite at grid node");
    vmin = std::min(vmin, v0[i]);
  }

  // Far outside the natural domain (union grids), e^{-(V - Vmin)} can
  // underflow; weights are floored to keep them strictly positive. Floored
  // cells carry ~1e-300 mass, so quadratures are unaffected, but spectral
  // constants computed on such a measure describe the floored plateau, not
  // e^{-V}; density_floored() reports the condition.
  bool floored = false;
  std::vector<double> weights(n);
  num::Accumulator z;
  for (std::size_t i = 0; i < n; ++i) {
    double cell = (i == 0 || i + 1 == n) ? 0.5 * h : h;
    double rho = std::exp(-(v0[i] - vmin));
    if (rho < 1e-300) {
      rho = 1e-300;
      floored = true;
    }
    weights[i] = cell * rho;
    z.add(weights[i]);
  }
  double zsum = z.value();
  if (!(zsum > 0.0) || !std::isfinite(zsum)) {
    throw numerical_error("degenerate partition sum");
  }
  for (double& w : weights) w /= zsum;
  // sum_i c_i e^{-(v0_i + K)} = 1  <=>  K = log(zsum) - vmin
  double log_norm = std::log(zsum) - vmin;
  PotentialSpec normalized = V.with_log_norm(log_norm);

  // exponential tail fit: mass beyond b ~ rho(b)/V'(b) when the density
  // decays outward, i.e. V'(b) > 0 and V'(a) < 0
  auto side_mass = [&](double x, double outward_sign) {
    double slope = outward_sign * normalized.dvalue(x);
    if (!(slope > 0.0)) return std::numeric_limits<double>::infinity();
    return std::exp(-normalized.value(x)) / slope;
  };
  double eps_tail = side_mass(dom.lo, -1.0) + side_mass(dom.hi, +1.0);
  if (!explicit_dom) {
    if (std::isinf(eps_tail)) {
      throw non_normalizable_error("density not decaying at the automatic truncation boundary");
    }
    if (eps_tail > tail_tol) {
      throw non_normalizable_error("estimated tail mass " + num::fmt_g17(eps_tail) +
                                   " exceeds tolerance " + num::fmt_g17(tail_tol));
    }
  }
  return MeasurePtr(new GridMeasure(std::move(nodes), std::move(weights), h,
                                    std::move(normalized), dom, eps_tail, explicit_dom,
                                    floored));
}

/// Function values on the nodes of one specific GridMeasure. Arithmetic
/// between functions bound to different measures throws; all operations are
/// pure.
class GridFunction {
public:
  GridFunction(MeasurePtr mu, std::vector<double> values)
      : mu_(std::move(mu)), v_(std::move(values)) {
    if (!mu_) throw invalid_input_error("GridFunction: null measure");
    if (v_.size() != mu_->size()) {
      throw grid_mismatch_error("GridFunction: value count does not match grid");
    }
  }

  template <class F>
  static GridFunction from_fn(MeasurePtr mu, F f) {
    std::vector<double> v(mu->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(mu->node(i));
    return GridFunction(std::move(mu), std::move(v));
  }

  static GridFunction constant(MeasurePtr mu, double c) {
    std::vector<double> v(mu->size(), c);
    return GridFunction(std::move(mu), std::move(v));
  }

  const MeasurePtr& measure() const { return mu_; }
  std::size_t size() const { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }
  std::span<const double> values() const { return v_; }
  std::vector<double> take_values() && { return std::move(v_); }

  GridFunction map(const std::function<double(double)>& f) const {
    std::vector<double> out(v_.size());
    for (std::size_t i = 0; i < v_.size(); ++i) out[i] = f(v_[i]);
    return GridFunction(mu_, std::move(out));
  }

private:
  MeasurePtr mu_;
  std::vector<double> v_;
};

namespace detail {
inline void ensure_same_measure(const GridFunction& a, const GridFunction& b) {
  if (a.measure().get() != b.measure().get()) {
    throw grid_mismatch_error("grid functions bound to different measures");
  }
}
}  // namespace detail

inline GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  detail::ensure_same_measure(a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return GridFunction(a.measure(), std::move(out));
}

inline GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  detail::ensure_same_measure(a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return GridFunction(a.measure(), std::move(out));
}

inline GridFunction operator*(double s, const GridFunction& a) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * a[i];
  return GridFunction(a.measure(), std::move(out));
}

inline GridFunction operator+(const GridFunction& a, double c) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + c;
  return GridFunction(a.measure(), std::move(out));
}

/// integral of f against the measure: sum w_i f_i.
inline double integrate(const GridFunction& f) {
  return num::weighted_sum(f.measure()->weights(), f.values());
}

inline double mean(const GridFunction& f) { return integrate(f); }

/// L^q(mu) norm, q >= 1; q = +inf gives the grid maximum of |f| (the
/// ess-sup of a continuous function on the truncated domain).
inline double lq_norm(const GridFunction& f, double q) {
  if (std::isinf(q)) {
    double m = 0.0;
    for (double x : f.values()) m = std::max(m, std::abs(x));
    return m;
  }
  if (!(q >= 1.0)) throw invalid_input_error("lq_norm: q must be >= 1 or infinity");
  num::Accumulator acc;
  const auto w = f.measure()->weights();
  for (std::size_t i = 0; i < f.size(); ++i) {
    acc.add(w[i] * std::pow(std::abs(f[i]), q));
  }
  return std::pow(acc.value(), 1.0 / q);
}

namespace detail {

/// Central differences at interior nodes, second-order one-sided at the two
/// boundary nodes. Raw-buffer version shared with the ascent hot path.
inline void derivative_values(std::span<const double> f, double h, std::span<double> out) {
  const std::size_t n = f.size();
  const double inv2h = 1.0 / (2.0 * h);
  out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv2h;
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - f[i - 1]) * inv2h;
  out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv2h;
}

/// Transpose of the derivative stencil applied to z (for gradients of
/// quadratic forms built on the stencil).
inline void derivative_transpose(std::span<const double> z, double h, std::span<double> out) {
  const std::size_t n = z.size();
  const double inv2h = 1.0 / (2.0 * h);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    out[i + 1] += z[i] * inv2h;
    out[i - 1] -= z[i] * inv2h;
  }
  out[0] += z[0] * (-3.0) * inv2h;
  out[1] += z[0] * 4.0 * inv2h;
  out[2] += z[0] * (-1.0) * inv2h;
  out[n - 1] += z[n - 1] * 3.0 * inv2h;
  out[n - 2] += z[n - 1] * (-4.0) * inv2h;
  out[n - 3] += z[n - 1] * 1.0 * inv2h;
}

}  // namespace detail

/// Discrete derivative: exact for linear functions everywhere and for
/// quadratics at interior nodes; O(h^2) truncation error on smooth f.
inline GridFunction derivative(const GridFunction& f) {
  if (f.size() < 3) throw invalid_input_error("derivative: need at least 3 nodes");
  std::vector<double> out(f.size());
  detail::derivative_values(f.values(), f.measure()->spacing(), out);
  return GridFunction(f.measure(), std::move(out));
}

/// Two-column CSV "x,value" with a header row; 17 significant digits so the
/// round trip is exact.
inline void write_csv(const GridFunction& f, std::ostream& out) {
  out << "x,value\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    out << num::fmt_g17(f.measure()->node(i)) << ',' << num::fmt_g17(f[i]) << '\n';
  }
}

inline void write_csv(const GridFunction& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw invalid_input_error("cannot open '" + path + "' for writing");
  write_csv(f, out);
}

/// Import a grid function; the x column must match the measure's nodes.
inline GridFunction read_csv(MeasurePtr mu, std::istream& in) {
  std::vector<double> xs, vs;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    if (line.back() == '\r') line.pop_back();
    auto comma = line.find(',');
    if (comma == std::string::npos) throw grid_mismatch_error("csv: expected 'x,value' in '" + line + "'");
    std::string c0 = line.substr(0, comma), c1 = line.substr(comma + 1);
    if (first) {
      first = false;
      try {
        num::parse_double(c0);
      } catch (const invalid_spec_error&) {
        continue;
      }
    }
    try {
      xs.push_back(num::parse_double(c0));
      vs.push_back(num::parse_double(c1));
    } catch (const invalid_spec_error& e) {
      throw grid_mismatch_error(std::string("csv: ") + e.what());
    }
  }
  if (xs.size() != mu->size()) {
    throw grid_mismatch_error("csv: row count does not match the measure's grid");
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double tol = 1e-12 * std::max(1.0, std::abs(mu->node(i)));
    if (std::abs(xs[i] - mu->node(i)) > tol) {
      throw grid_mismatch_error("csv: node " + std::to_string(i) + " does not match the grid");
    }
  }
  return GridFunction(std::move(mu), std::move(vs));
}

inline GridFunction read_csv(MeasurePtr mu, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input_error("cannot open '" + path + "'");
  return read_csv(std::move(mu), in);
}

}  // namespace soblab
