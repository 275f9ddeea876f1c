#pragma once

#include <cmath>

#include "soblab/errors.hpp"
#include "soblab/measure.hpp"
#include "soblab/numeric.hpp"

namespace soblab {

/// Dirichlet energy: integral of |u'|^2 against the measure, with u'
/// from the discrete derivative stencil.
inline double dirichlet(const GridFunction& u) {
  GridFunction du = derivative(u);
  num::Accumulator acc;
  const auto w = u.measure()->weights();
  for (std::size_t i = 0; i < u.size(); ++i) acc.add(w[i] * du[i] * du[i]);
  return acc.value();
}

/// Variance: integral of u^2 minus (integral of u)^2.
inline double variance(const GridFunction& u) {
  const auto w = u.measure()->weights();
  num::Accumulator sq, lin;
  for (std::size_t i = 0; i < u.size(); ++i) {
    sq.add(w[i] * u[i] * u[i]);
    lin.add(w[i] * u[i]);
  }
  double m = lin.value();
  return sq.value() - m * m;
}

/// Generalized Poincare deficit for p in (1, 2]:
///   ( int u^2 dmu - ( int |u|^{2/p} dmu )^p ) / (p - 1).
/// Nonnegative for every grid function on a probability measure.
inline double beckner_deficit(const GridFunction& u, double p) {
  if (!(p > 1.0 && p <= 2.0)) throw invalid_input_error("beckner_deficit: p must be in (1,2]");
  const auto w = u.measure()->weights();
  const double r = 2.0 / p;
  num::Accumulator sq, frac;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double a = std::abs(u[i]);
    sq.add(w[i] * a * a);
    frac.add(w[i] * std::pow(a, r));
  }
  return (sq.value() - std::pow(frac.value(), p)) / (p - 1.0);
}

/// Entropy functional of the logarithmic Sobolev inequality:
///   int u^2 log(u^2 / ||u||^2_{L^2(mu)}) dmu.
/// Nodes with u_i = 0 contribute 0 (the t log t limit).
inline double log_sobolev_entropy(const GridFunction& u) {
  const auto w = u.measure()->weights();
  num::Accumulator sq;
  for (std::size_t i = 0; i < u.size(); ++i) sq.add(w[i] * u[i] * u[i]);
  const double l2 = sq.value();
  if (!(l2 > 0.0)) throw degenerate_input_error("log_sobolev_entropy: u is identically zero");
  const double logl2 = std::log(l2);
  num::Accumulator ent;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double u2 = u[i] * u[i];
    if (u2 == 0.0) continue;
    ent.add(w[i] * u2 * (std::log(u2) - logl2));
  }
  return ent.value();
}

}  // namespace soblab
