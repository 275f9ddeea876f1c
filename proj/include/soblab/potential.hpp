#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "soblab/errors.hpp"
#include "soblab/numeric.hpp"

namespace soblab {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Analytic description of a potential V with exact first and second
/// derivatives. V defines the measure dmu = e^{-V} dx; the additive
/// normalization constant (log of the partition sum) is attached by
/// build_measure once a grid is known, so that e^{-V} integrates to 1 on
/// that grid. Instances are immutable and safe to share across threads.
///
/// Families:
///   gaussian(sigma)   V0 = x^2 / (2 sigma^2)
///   power(alpha)      V0 = |x|^alpha, alpha >= 1; alpha < 2 makes V'' singular at 0
///   polynomial        V0 = sum_k c_k x^k, even leading degree, positive leading coefficient
///   tabulated         natural cubic interpolation of (x, V) samples
class PotentialSpec {
public:
  enum class Family { gaussian, power, polynomial, tabulated };

  static PotentialSpec gaussian(double sigma) {
    if (!(sigma > 0.0)) throw invalid_spec_error("gaussian: sigma must be positive");
    PotentialSpec p(Family::gaussian);
    p.sigma_ = sigma;
    return p;
  }

  static PotentialSpec power(double alpha) {
    if (!(alpha >= 1.0)) {
      throw invalid_spec_error(
          "power: alpha must be >= 1 (e^{-|x|^alpha} with alpha < 1 is rejected: "
          "sub-exponential tails are outside the supported families)");
    }
    PotentialSpec p(Family::power);
    p.alpha_ = alpha;
    return p;
  }

  static PotentialSpec polynomial(const std::map<int, double>& coeffs) {
    if (coeffs.empty()) throw invalid_spec_error("poly: no terms");
    int lead = -1;
    for (const auto& [deg, c] : coeffs) {
      if (deg < 0) throw invalid_spec_error("poly: negative degree");
      if (c != 0.0 && deg > lead) lead = deg;
    }
    if (lead < 2) throw invalid_spec_error("poly: degree must be at least 2");
    if (lead % 2 != 0) throw invalid_spec_error("poly: leading degree must be even");
    if (coeffs.at(lead) <= 0.0) throw invalid_spec_error("poly: leading coefficient must be positive");
    PotentialSpec p(Family::polynomial);
    p.coeffs_.assign(static_cast<std::size_t>(lead) + 1, 0.0);
    for (const auto& [deg, c] : coeffs) p.coeffs_[static_cast<std::size_t>(deg)] = c;
    return p;
  }

  static PotentialSpec tabulated(std::vector<double> xs, std::vector<double> vs,
                                 std::string source = {}) {
    if (xs.size() != vs.size()) throw invalid_spec_error("table: column length mismatch");
    if (xs.size() < 2) throw invalid_spec_error("table: need at least 2 samples");
    for (std::size_t i = 1; i < xs.size(); ++i) {
      if (!(xs[i] > xs[i - 1])) throw invalid_spec_error("table: x column must be strictly increasing");
    }
    PotentialSpec p(Family::tabulated);
    p.tab_x_ = std::move(xs);
    p.tab_v_ = std::move(vs);
    p.table_source_ = std::move(source);
    p.build_spline();
    return p;
  }

  Family family() const { return family_; }
  double sigma() const { return sigma_; }
  double alpha() const { return alpha_; }
  const std::vector<double>& poly_coeffs() const { return coeffs_; }
  const std::vector<double>& table_x() const { return tab_x_; }
  std::size_t table_size() const { return tab_x_.size(); }

  /// Additive normalization constant; 0 until a grid has been attached.
  double log_norm() const { return log_norm_; }
  PotentialSpec with_log_norm(double c) const {
    PotentialSpec p(*this);
    p.log_norm_ = c;
    return p;
  }

  double value(double x) const {
    switch (family_) {
      case Family::gaussian: return x * x / (2.0 * sigma_ * sigma_) + log_norm_;
      case Family::power: return std::pow(std::abs(x), alpha_) + log_norm_;
      case Family::polynomial: return poly_eval(x, 0) + log_norm_;
      case Family::tabulated: return spline_eval(x, 0) + log_norm_;
    }
    return 0.0;
  }

  double dvalue(double x) const {
    switch (family_) {
      case Family::gaussian: return x / (sigma_ * sigma_);
      case Family::power:
        if (x == 0.0) return 0.0;  // alpha > 1: true derivative; alpha = 1: symmetric convention
        return alpha_ * std::pow(std::abs(x), alpha_ - 1.0) * (x > 0 ? 1.0 : -1.0);
      case Family::polynomial: return poly_eval(x, 1);
      case Family::tabulated: return spline_eval(x, 1);
    }
    return 0.0;
  }

  double d2value(double x) const {
    switch (family_) {
      case Family::gaussian: return 1.0 / (sigma_ * sigma_);
      case Family::power:
        if (alpha_ == 2.0) return 2.0;
        if (alpha_ == 1.0) {
          if (x == 0.0) throw singularity_error("power alpha=1: V'' undefined at 0", 0.0);
          return 0.0;
        }
        if (alpha_ < 2.0 && x == 0.0) {
          throw singularity_error("power alpha<2: V'' singular at 0", 0.0);
        }
        return alpha_ * (alpha_ - 1.0) * std::pow(std::abs(x), alpha_ - 2.0);
      case Family::polynomial: return poly_eval(x, 2);
      case Family::tabulated: return spline_eval(x, 2);
    }
    return 0.0;
  }

  struct Derivatives {
    double v;
    double dv;
    double d2v;
  };
  /// (V, V', V'') at x; throws singularity_error where V'' is undefined.
  Derivatives eval(double x) const { return {value(x), dvalue(x), d2value(x)}; }

  bool has_singular_d2() const { return family_ == Family::power && alpha_ < 2.0; }
  /// Nodes closer than tol to a singular point must not evaluate V''.
  bool is_singular_at(double x, double tol) const {
    return has_singular_d2() && std::abs(x) < tol;
  }

  /// Approximate argmin of V; exact for gaussian/power, numeric for
  /// polynomial, knot argmin for tabulated.
  double minimizer_hint() const {
    switch (family_) {
      case Family::gaussian:
      case Family::power: return 0.0;
      case Family::polynomial: {
        double r = 1.0;
        auto f = [this](double x) { return poly_eval(x, 0); };
        // expand until the boundary dominates the interior minimum
        for (int k = 0; k < 60; ++k) {
          auto [xm, fm] = num::scan_min(f, -r, r, 512);
          if (f(-r) > fm && f(r) > fm) return xm;
          r *= 2.0;
        }
        throw numerical_error("poly: could not bracket the minimizer");
      }
      case Family::tabulated: {
        std::size_t best = 0;
        for (std::size_t i = 1; i < tab_v_.size(); ++i) {
          if (tab_v_[i] < tab_v_[best]) best = i;
        }
        return tab_x_[best];
      }
    }
    return 0.0;
  }

  /// Table range for tabulated potentials (the only family with a native
  /// evaluation window).
  Interval native_range() const { return {tab_x_.front(), tab_x_.back()}; }

  /// Back to the grammar accepted by parse_potential. The normalization
  /// constant is not rendered (it is computed, never user-supplied).
  std::string render() const {
    switch (family_) {
      case Family::gaussian: return "gaussian:sigma=" + num::fmt_g17(sigma_);
      case Family::power: return "power:alpha=" + num::fmt_g17(alpha_);
      case Family::polynomial: {
        std::string out = "poly:";
        bool first = true;
        for (std::size_t k = 0; k < coeffs_.size(); ++k) {
          if (coeffs_[k] == 0.0) continue;
          if (!first) out += ',';
          first = false;
          out += std::to_string(k) + "=" + num::fmt_g17(coeffs_[k]);
        }
        return out;
      }
      case Family::tabulated: return "table:" + table_source_;
    }
    return {};
  }

  bool same_shape(const PotentialSpec& o) const {
    if (family_ != o.family_) return false;
    switch (family_) {
      case Family::gaussian: return sigma_ == o.sigma_;
      case Family::power: return alpha_ == o.alpha_;
      case Family::polynomial: return coeffs_ == o.coeffs_;
      case Family::tabulated: return tab_x_ == o.tab_x_ && tab_v_ == o.tab_v_;
    }
    return false;
  }

private:
  explicit PotentialSpec(Family f) : family_(f) {}

  double poly_eval(double x, int deriv) const {
    // Horner on the deriv-th derivative's coefficients
    double acc = 0.0;
    for (std::size_t k = coeffs_.size(); k-- > 0;) {
      if (static_cast<int>(k) < deriv) break;
      double factor = 1.0;
      if (deriv >= 1) factor *= static_cast<double>(k);
      if (deriv >= 2) factor *= static_cast<double>(k) - 1.0;
      acc = acc * x + coeffs_[k] * factor;
    }
    return acc;
  }

  void build_spline() {
    // natural cubic spline: solve for second derivatives at the knots
    const std::size_t n = tab_x_.size();
    tab_m_.assign(n, 0.0);
    if (n < 3) return;  // two points: linear, M = 0
    std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), r(n, 0.0);
    b[0] = 1.0;
    b[n - 1] = 1.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      double hl = tab_x_[i] - tab_x_[i - 1];
      double hr = tab_x_[i + 1] - tab_x_[i];
      a[i] = hl / 6.0;
      b[i] = (hl + hr) / 3.0;
      c[i] = hr / 6.0;
      r[i] = (tab_v_[i + 1] - tab_v_[i]) / hr - (tab_v_[i] - tab_v_[i - 1]) / hl;
    }
    // Thomas algorithm
    for (std::size_t i = 1; i < n; ++i) {
      double m = a[i] / b[i - 1];
      b[i] -= m * c[i - 1];
      r[i] -= m * r[i - 1];
    }
    tab_m_[n - 1] = r[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
      tab_m_[i] = (r[i] - c[i] * tab_m_[i + 1]) / b[i];
    }
  }

  double spline_eval(double x, int deriv) const {
    const std::size_t n = tab_x_.size();
    // outside the table: extend linearly with the boundary slope (V'' = 0)
    if (x <= tab_x_.front() || x >= tab_x_.back()) {
      bool left = x <= tab_x_.front();
      std::size_t i = left ? 0 : n - 2;
      double h = tab_x_[i + 1] - tab_x_[i];
      double x0 = left ? tab_x_.front() : tab_x_.back();
      double v0 = left ? tab_v_.front() : tab_v_.back();
      double slope_at_edge =
          left ? (tab_v_[1] - tab_v_[0]) / h - h / 6.0 * (2.0 * tab_m_[0] + tab_m_[1])
               : (tab_v_[n - 1] - tab_v_[n - 2]) / h + h / 6.0 * (tab_m_[n - 2] + 2.0 * tab_m_[n - 1]);
      if (deriv == 0) return v0 + slope_at_edge * (x - x0);
      if (deriv == 1) return slope_at_edge;
      return 0.0;
    }
    auto it = std::upper_bound(tab_x_.begin(), tab_x_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - tab_x_.begin()) - 1;
    if (i >= n - 1) i = n - 2;
    double h = tab_x_[i + 1] - tab_x_[i];
    double A = (tab_x_[i + 1] - x) / h;
    double B = (x - tab_x_[i]) / h;
    if (deriv == 0) {
      return A * tab_v_[i] + B * tab_v_[i + 1] +
             ((A * A * A - A) * tab_m_[i] + (B * B * B - B) * tab_m_[i + 1]) * h * h / 6.0;
    }
    if (deriv == 1) {
      return (tab_v_[i + 1] - tab_v_[i]) / h +
             (-(3.0 * A * A - 1.0) * tab_m_[i] + (3.0 * B * B - 1.0) * tab_m_[i + 1]) * h / 6.0;
    }
    return A * tab_m_[i] + B * tab_m_[i + 1];
  }

  Family family_;
  double sigma_ = 0.0;
  double alpha_ = 0.0;
  std::vector<double> coeffs_;           // dense by degree
  std::vector<double> tab_x_, tab_v_, tab_m_;
  std::string table_source_;
  double log_norm_ = 0.0;
};

namespace detail {

inline std::map<std::string, std::string> parse_kv_list(const std::string& body) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw invalid_spec_error("expected key=value, got '" + item + "'");
    std::string k = item.substr(0, eq);
    std::string v = item.substr(eq + 1);
    if (k.empty() || v.empty()) throw invalid_spec_error("empty key or value in '" + item + "'");
    if (kv.count(k)) throw invalid_spec_error("duplicate key '" + k + "'");
    kv[k] = v;
  }
  if (kv.empty()) throw invalid_spec_error("no parameters in '" + body + "'");
  return kv;
}

inline PotentialSpec load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_spec_error("table: cannot open '" + path + "'");
  std::vector<double> xs, vs;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto comma = line.find(',');
    if (comma == std::string::npos) throw invalid_spec_error("table: expected two columns in '" + line + "'");
    std::string c0 = line.substr(0, comma), c1 = line.substr(comma + 1);
    if (first) {
      first = false;
      try {
        num::parse_double(c0);
      } catch (const invalid_spec_error&) {
        continue;  // header row
      }
    }
    xs.push_back(num::parse_double(c0));
    vs.push_back(num::parse_double(c1));
  }
  return PotentialSpec::tabulated(std::move(xs), std::move(vs), path);
}

}  // namespace detail

/// Parse the potential grammar:
///   gaussian:sigma=<float> | power:alpha=<float> |
///   poly:<deg>=<coef>[,<deg>=<coef>...] | table:<path>
inline PotentialSpec parse_potential(const std::string& spec) {
  auto colon = spec.find(':');
  if (colon == std::string::npos) throw invalid_spec_error("expected 'family:params' in '" + spec + "'");
  std::string family = spec.substr(0, colon);
  std::string body = spec.substr(colon + 1);
  if (family == "gaussian") {
    auto kv = detail::parse_kv_list(body);
    auto it = kv.find("sigma");
    if (it == kv.end() || kv.size() != 1) throw invalid_spec_error("gaussian takes exactly 'sigma=<float>'");
    return PotentialSpec::gaussian(num::parse_double(it->second));
  }
  if (family == "power") {
    auto kv = detail::parse_kv_list(body);
    auto it = kv.find("alpha");
    if (it == kv.end() || kv.size() != 1) throw invalid_spec_error("power takes exactly 'alpha=<float>'");
    return PotentialSpec::power(num::parse_double(it->second));
  }
  if (family == "poly") {
    auto kv = detail::parse_kv_list(body);
    std::map<int, double> coeffs;
    for (const auto& [k, v] : kv) {
      std::size_t pos = 0;
      int deg;
      try {
        deg = std::stoi(k, &pos);
      } catch (const std::exception&) {
        throw invalid_spec_error("poly: bad degree '" + k + "'");
      }
      if (pos != k.size() || deg < 0) throw invalid_spec_error("poly: bad degree '" + k + "'");
      coeffs[deg] = num::parse_double(v);
    }
    return PotentialSpec::polynomial(coeffs);
  }
  if (family == "table") {
    if (body.empty()) throw invalid_spec_error("table: missing path");
    return detail::load_table(body);
  }
  throw invalid_spec_error("unknown potential family '" + family + "'");
}

/// Result of minimizing V'' (the Bakry-Emery convexity constant lambda_1).
struct Lambda1Result {
  double value = 0.0;
  bool attained = true;       // false when the infimum is only approached
  bool bounded_below = true;
  double location = std::numeric_limits<double>::quiet_NaN();
  std::string note;
};

/// lambda_1 = inf V'' over the domain (whole line when domain is absent).
/// Closed-form families are resolved analytically where the infimum is
/// structural; polynomials use a grid scan refined by golden section.
inline Lambda1Result bakry_emery_lambda1(const PotentialSpec& V,
                                         std::optional<Interval> domain = std::nullopt) {
  Lambda1Result r;
  switch (V.family()) {
    case PotentialSpec::Family::gaussian:
      r.value = 1.0 / (V.sigma() * V.sigma());
      r.attained = true;
      r.location = 0.0;
      r.note = "V'' constant";
      return r;
    case PotentialSpec::Family::power: {
      double a = V.alpha();
      if (a == 2.0) {
        r.value = 2.0;
        r.location = 0.0;
        r.note = "V'' constant";
        return r;
      }
      if (a == 1.0) {
        r.value = 0.0;
        r.attained = true;
        r.note = "V'' = 0 away from the singular point";
        return r;
      }
      // 1 < alpha < 2: V'' = a(a-1)|x|^{a-2}, decreasing in |x|
      if (domain) {
        double edge = std::max(std::abs(domain->lo), std::abs(domain->hi));
        r.value = a * (a - 1.0) * std::pow(edge, a - 2.0);
        r.attained = false;
        r.location = edge;
        r.note = "infimum at domain boundary; tends to 0 as the domain grows";
      } else {
        r.value = 0.0;
        r.attained = false;
        r.note = "infimum approached as |x| -> infinity";
      }
      return r;
    }
    case PotentialSpec::Family::polynomial: {
      auto f = [&V](double x) { return V.d2value(x); };
      Interval dom;
      if (domain) {
        dom = *domain;
      } else {
        // V'' -> +inf at both ends (or is constant); expand until it dominates
        double rr = 1.0;
        for (int k = 0; k < 60; ++k) {
          auto [xm, fm] = num::scan_min(f, -rr, rr, 1024);
          if (f(-rr) > fm && f(rr) > fm) {
            r.value = fm;
            r.location = xm;
            r.attained = true;
            return r;
          }
          if (V.poly_coeffs().size() <= 3) {  // degree <= 2: V'' constant
            r.value = f(0.0);
            r.location = 0.0;
            r.attained = true;
            r.note = "V'' constant";
            return r;
          }
          rr *= 2.0;
        }
        throw numerical_error("poly: could not bracket inf V''");
      }
      auto [xm, fm] = num::scan_min(f, dom.lo, dom.hi, 4096);
      r.value = fm;
      r.location = xm;
      r.attained = true;
      return r;
    }
    case PotentialSpec::Family::tabulated: {
      if (V.table_size() < 3) {
        throw insufficient_data_error("tabulated potential needs at least 3 points for inf V''");
      }
      // V'' of a natural cubic spline is piecewise linear: the knot values
      // contain the extrema exactly. The two endpoint knots are excluded:
      // the natural boundary condition pins V'' = 0 there regardless of the
      // data.
      Interval dom = domain.value_or(V.native_range());
      double best = std::numeric_limits<double>::infinity();
      double at = dom.lo;
      const auto& xs = V.table_x();
      for (std::size_t k = 1; k + 1 < xs.size(); ++k) {
        if (!dom.contains(xs[k])) continue;
        double v = V.d2value(xs[k]);
        if (v < best) {
          best = v;
          at = xs[k];
        }
      }
      if (!std::isfinite(best)) {
        throw insufficient_data_error("no interior table knots inside the requested domain");
      }
      r.value = best;
      r.location = at;
      r.note = "truncated to table range; natural-spline endpoint knots excluded";
      return r;
    }
  }
  throw numerical_error("unreachable");
}

}  // namespace soblab
