#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "soblab/potential.hpp"

// Exact symbolic tail expansions for the closed-form potential families.
// Every V', V'' of {gaussian, power, polynomial} is a finite sum of terms
// c |x|^e sign(x)^s, and the local-condition combinations (delta, the
// Gaussian-reference condition) are polynomial in those, so the leading
// behavior at +-infinity is decidable exactly. Tabulated potentials have no
// tail expansion and return nullopt everywhere.

namespace soblab::asym {

/// One term c * |x|^e * sign(x)^s with s in {0, 1}.
struct Term {
  double coef;
  double expo;
  int sgn;
};

class SignedPowerSum {
public:
  SignedPowerSum() = default;
  static SignedPowerSum term(double c, double e, int s) {
    SignedPowerSum out;
    if (c != 0.0) out.terms_.push_back({c, e, s & 1});
    return out;
  }

  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  SignedPowerSum operator+(const SignedPowerSum& o) const {
    SignedPowerSum out = *this;
    out.terms_.insert(out.terms_.end(), o.terms_.begin(), o.terms_.end());
    out.combine();
    return out;
  }
  SignedPowerSum operator-(const SignedPowerSum& o) const { return *this + o.scaled(-1.0); }
  SignedPowerSum operator*(const SignedPowerSum& o) const {
    SignedPowerSum out;
    for (const Term& a : terms_) {
      for (const Term& b : o.terms_) {
        out.terms_.push_back({a.coef * b.coef, a.expo + b.expo, (a.sgn + b.sgn) & 1});
      }
    }
    out.combine();
    return out;
  }
  SignedPowerSum scaled(double c) const {
    SignedPowerSum out = *this;
    for (Term& t : out.terms_) t.coef *= c;
    return out;
  }

  /// Collapse sign(x)^s on one side (side = +1 or -1) and return the
  /// dominant (coef, expo); nullopt when the sum is identically zero on
  /// that side.
  std::optional<std::pair<double, double>> leading(int side) const {
    // group by exponent (terms with equal exponent but different parity
    // merge once the side is fixed)
    std::vector<std::pair<double, double>> collapsed;  // (expo, coef)
    for (const Term& t : terms_) {
      double c = t.coef * (t.sgn && side < 0 ? -1.0 : 1.0);
      bool merged = false;
      for (auto& [e, acc] : collapsed) {
        if (same_expo(e, t.expo)) {
          acc += c;
          merged = true;
          break;
        }
      }
      if (!merged) collapsed.emplace_back(t.expo, c);
    }
    std::sort(collapsed.begin(), collapsed.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [e, c] : collapsed) {
      if (std::abs(c) > 1e-13 * scale()) return std::make_pair(c, e);
    }
    return std::nullopt;
  }

private:
  static bool same_expo(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
  }
  double scale() const {
    double s = 0.0;
    for (const Term& t : terms_) s = std::max(s, std::abs(t.coef));
    return s > 0.0 ? s : 1.0;
  }
  void combine() {
    std::vector<Term> merged;
    for (const Term& t : terms_) {
      bool done = false;
      for (Term& m : merged) {
        if (m.sgn == t.sgn && same_expo(m.expo, t.expo)) {
          m.coef += t.coef;
          done = true;
          break;
        }
      }
      if (!done) merged.push_back(t);
    }
    double s = 0.0;
    for (const Term& t : merged) s = std::max(s, std::abs(t.coef));
    terms_.clear();
    for (const Term& t : merged) {
      if (std::abs(t.coef) > 1e-14 * std::max(1.0, s)) terms_.push_back(t);
    }
  }

  std::vector<Term> terms_;
};

struct PotentialTails {
  SignedPowerSum v;   // V itself (without the normalization constant)
  SignedPowerSum dv;  // V'
  SignedPowerSum d2v; // V''
};

/// Exact term expansions for the closed-form families; nullopt for
/// tabulated potentials.
inline std::optional<PotentialTails> potential_tails(const PotentialSpec& p) {
  PotentialTails t;
  switch (p.family()) {
    case PotentialSpec::Family::gaussian: {
      double is2 = 1.0 / (p.sigma() * p.sigma());
      t.v = SignedPowerSum::term(0.5 * is2, 2.0, 0);
      t.dv = SignedPowerSum::term(is2, 1.0, 1);
      t.d2v = SignedPowerSum::term(is2, 0.0, 0);
      return t;
    }
    case PotentialSpec::Family::power: {
      double a = p.alpha();
      t.v = SignedPowerSum::term(1.0, a, 0);
      t.dv = SignedPowerSum::term(a, a - 1.0, 1);
      t.d2v = SignedPowerSum::term(a * (a - 1.0), a - 2.0, 0);
      return t;
    }
    case PotentialSpec::Family::polynomial: {
      const auto& c = p.poly_coeffs();
      for (std::size_t k = 0; k < c.size(); ++k) {
        if (c[k] == 0.0) continue;
        double kk = static_cast<double>(k);
        t.v = t.v + SignedPowerSum::term(c[k], kk, static_cast<int>(k));
        if (k >= 1) t.dv = t.dv + SignedPowerSum::term(c[k] * kk, kk - 1.0, static_cast<int>(k - 1));
        if (k >= 2) {
          t.d2v = t.d2v +
                  SignedPowerSum::term(c[k] * kk * (kk - 1.0), kk - 2.0, static_cast<int>(k));
        }
      }
      return t;
    }
    case PotentialSpec::Family::tabulated: return std::nullopt;
  }
  return std::nullopt;
}

enum class TailBehavior { diverges_up, diverges_down, finite };

struct TailResult {
  TailBehavior behavior = TailBehavior::finite;
  /// Worst finite limit over the two sides (only meaningful when behavior
  /// is not diverges_down; diverges_up on one side with a finite limit on
  /// the other reports that limit here).
  double limit = 0.0;
  bool bounded_below() const { return behavior != TailBehavior::diverges_down; }
};

/// Leading behavior of a signed-power sum as |x| -> infinity, combined over
/// both sides. Divergence to -infinity on either side dominates.
inline TailResult tail_behavior(const SignedPowerSum& s) {
  TailResult out;
  bool any_finite = false;
  bool any_up = false;
  double worst_limit = std::numeric_limits<double>::infinity();
  for (int side : {+1, -1}) {
    auto lead = s.leading(side);
    if (!lead) {
      any_finite = true;
      worst_limit = std::min(worst_limit, 0.0);
      continue;
    }
    auto [c, e] = *lead;
    if (e > 0.0) {
      if (c < 0.0) {
        out.behavior = TailBehavior::diverges_down;
        return out;
      }
      any_up = true;
    } else if (e == 0.0 || std::abs(e) <= 1e-12) {
      any_finite = true;
      worst_limit = std::min(worst_limit, c);
    } else {
      any_finite = true;
      worst_limit = std::min(worst_limit, 0.0);
    }
  }
  if (any_finite) {
    out.behavior = TailBehavior::finite;
    out.limit = worst_limit;
  } else if (any_up) {
    out.behavior = TailBehavior::diverges_up;
  }
  return out;
}

/// Tail expansion of delta = (Z')^2 - Z'' + Z' W' with Z = (V - W)/2.
inline std::optional<SignedPowerSum> delta_tail(const PotentialSpec& v, const PotentialSpec& w) {
  auto tv = potential_tails(v);
  auto tw = potential_tails(w);
  if (!tv || !tw) return std::nullopt;
  SignedPowerSum zp = (tv->dv - tw->dv).scaled(0.5);
  SignedPowerSum zpp = (tv->d2v - tw->d2v).scaled(0.5);
  return zp * zp - zpp + zp * tw->dv;
}

/// Tail expansion of Z = (V - W)/2 (up to the additive normalization
/// constants, which do not change boundedness).
inline std::optional<SignedPowerSum> z_tail(const PotentialSpec& v, const PotentialSpec& w) {
  auto tv = potential_tails(v);
  auto tw = potential_tails(w);
  if (!tv || !tw) return std::nullopt;
  return (tv->v - tw->v).scaled(0.5);
}

/// Tail expansion of the Gaussian-reference local condition
/// E_sigma = (V')^2 - 2 V'' - x^2 / sigma^4.
inline std::optional<SignedPowerSum> gaussian_reference_tail(const PotentialSpec& v,
                                                             double sigma) {
  auto tv = potential_tails(v);
  if (!tv) return std::nullopt;
  double s4 = sigma * sigma * sigma * sigma;
  return tv->dv * tv->dv - tv->d2v.scaled(2.0) - SignedPowerSum::term(1.0 / s4, 2.0, 0);
}

}  // namespace soblab::asym
