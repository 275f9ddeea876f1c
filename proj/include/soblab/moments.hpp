#pragma once

#include <cmath>
#include <span>

#include "soblab/errors.hpp"
#include "soblab/measure.hpp"
#include "soblab/numeric.hpp"

// Moment inequalities that lift restricted Beckner inequalities to
// unrestricted ones. All checks run on a discrete probability measure,
// where the hypotheses hold exactly: the gaps are nonnegative up to
// round-off for any positive normalized weight vector, not just e^{-V}
// grids.

namespace soblab {

namespace detail {

inline void check_probability_weights(std::span<const double> w, std::span<const double> u) {
  if (w.size() != u.size()) throw invalid_input_error("weights and values differ in length");
  if (w.empty()) throw invalid_input_error("empty measure");
  double total = 0.0;
  for (double x : w) {
    if (!(x > 0.0)) throw invalid_input_error("weights must be strictly positive");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw invalid_input_error("weights must sum to 1 (got " + num::fmt_g17(total) + ")");
  }
}

inline double moment(std::span<const double> w, std::span<const double> u, double q) {
  num::Accumulator acc;
  for (std::size_t i = 0; i < w.size(); ++i) acc.add(w[i] * std::pow(std::abs(u[i]), q));
  return acc.value();
}

inline double mean_of(std::span<const double> w, std::span<const double> u) {
  num::Accumulator acc;
  for (std::size_t i = 0; i < w.size(); ++i) acc.add(w[i] * u[i]);
  return acc.value();
}

inline double centered_moment(std::span<const double> w, std::span<const double> u, double ubar,
                              double q) {
  num::Accumulator acc;
  for (std::size_t i = 0; i < w.size(); ++i) acc.add(w[i] * std::pow(std::abs(u[i] - ubar), q));
  return acc.value();
}

}  // namespace detail

/// LHS - RHS of
///   ( int |u|^q )^{2/q}  >=  ubar^2 + (q-1) ( int |u - ubar|^q )^{2/q},
/// q in [1,2]. Nonnegative for every input on a probability measure;
/// equality at q = 2 and for constants.
inline double lemma4_gap(std::span<const double> w, std::span<const double> u, double q) {
  if (!(q >= 1.0 && q <= 2.0)) throw invalid_input_error("lemma4_gap: q must be in [1,2]");
  detail::check_probability_weights(w, u);
  double ubar = detail::mean_of(w, u);
  double lhs = std::pow(detail::moment(w, u, q), 2.0 / q);
  double rhs = ubar * ubar + (q - 1.0) * std::pow(detail::centered_moment(w, u, ubar, q), 2.0 / q);
  return lhs - rhs;
}

enum class Remark1Side { upper_q_ge_2, lower_q_le_2 };

/// Slack of the order-q mean inequalities with v = u - ubar:
///   q >= 2:  int |u|^q  <=  |ubar|^q + (q/2)(q-1) ||u||_{L^q}^{q-2} ||v||_{L^q}^2
///   q in (1,2]: the reversed inequality.
/// Returns (guaranteed-larger side) - (smaller side); contract >= -1e-10.
inline double remark1_slack(std::span<const double> w, std::span<const double> u, double q,
                            Remark1Side side) {
  if (side == Remark1Side::upper_q_ge_2 && !(q >= 2.0)) {
    throw invalid_input_error("remark1: upper side needs q >= 2");
  }
  if (side == Remark1Side::lower_q_le_2 && !(q > 1.0 && q <= 2.0)) {
    throw invalid_input_error("remark1: lower side needs q in (1,2]");
  }
  detail::check_probability_weights(w, u);
  double ubar = detail::mean_of(w, u);
  double uq = detail::moment(w, u, q);
  if (!(uq > 0.0)) throw degenerate_input_error("remark1: u is identically zero");
  double vq = detail::centered_moment(w, u, ubar, q);
  double u_norm_pow = std::pow(uq, (q - 2.0) / q);        // ||u||_{L^q}^{q-2}
  double v_norm_sq = std::pow(vq, 2.0 / q);               // ||v||_{L^q}^2
  double correction = 0.5 * q * (q - 1.0) * u_norm_pow * v_norm_sq;
  double rhs = std::pow(std::abs(ubar), q) + correction;
  return side == Remark1Side::upper_q_ge_2 ? rhs - uq : uq - rhs;
}

/// RHS - LHS of the reversed estimate for q > 2:
///   ( int |u|^q )^{2/q}  <=  ubar^2 + (q-1) ( int |u - ubar|^q )^{2/q}.
inline double remark2_gap(std::span<const double> w, std::span<const double> u, double q) {
  if (!(q > 2.0)) throw invalid_input_error("remark2_gap: q must be > 2");
  detail::check_probability_weights(w, u);
  double ubar = detail::mean_of(w, u);
  double lhs = std::pow(detail::moment(w, u, q), 2.0 / q);
  double rhs = ubar * ubar + (q - 1.0) * std::pow(detail::centered_moment(w, u, ubar, q), 2.0 / q);
  return rhs - lhs;
}

/// Residual of the algebraic split used to lift the restricted inequality,
/// with v = u - ubar:
///   int v^2 - (2/p - 1)( int |v|^{2/p} )^p
///     = 2 (p-1)/p int v^2 + (2-p)/p [ int v^2 - ( int |v|^{2/p} )^p ].
/// Pure algebra; |residual| <= 1e-12 relative up to round-off.
inline double theorem1_lift_residual(std::span<const double> w, std::span<const double> u,
                                     double p) {
  if (!(p > 1.0 && p < 2.0)) throw invalid_input_error("lift identity: p must be in (1,2)");
  detail::check_probability_weights(w, u);
  double ubar = detail::mean_of(w, u);
  const std::size_t n = w.size();
  num::Accumulator sq, frac;
  for (std::size_t i = 0; i < n; ++i) {
    double v = u[i] - ubar;
    sq.add(w[i] * v * v);
    frac.add(w[i] * std::pow(std::abs(v), 2.0 / p));
  }
  double v2 = sq.value();
  double vfrac = std::pow(frac.value(), p);
  double lhs = v2 - (2.0 / p - 1.0) * vfrac;
  double rhs = 2.0 * (p - 1.0) / p * v2 + (2.0 - p) / p * (v2 - vfrac);
  return lhs - rhs;
}

// GridFunction wrappers.

inline double lemma4_gap(const GridFunction& u, double q) {
  return lemma4_gap(u.measure()->weights(), u.values(), q);
}
inline double remark1_slack(const GridFunction& u, double q, Remark1Side side) {
  return remark1_slack(u.measure()->weights(), u.values(), q, side);
}
inline double remark2_gap(const GridFunction& u, double q) {
  return remark2_gap(u.measure()->weights(), u.values(), q);
}
inline double theorem1_lift_residual(const GridFunction& u, double p) {
  return theorem1_lift_residual(u.measure()->weights(), u.values(), p);
}

}  // namespace soblab
