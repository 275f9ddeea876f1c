#pragma once

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "soblab/errors.hpp"
#include "soblab/functionals.hpp"
#include "soblab/measure.hpp"
#include "soblab/spectral.hpp"

namespace soblab {

enum class CpMode { unrestricted, restricted };

struct AscentOptions {
  int max_iterations = 10000;
  double rel_improvement_tol = 1e-8;
  double degenerate_dirichlet = 1e-14;
};

/// Beckner quotient deficit_p(u) / dirichlet(u); the objective whose
/// supremum over H^1(mu) is C_p(mu).
inline double beckner_quotient(const GridFunction& u, double p) {
  double d = dirichlet(u);
  if (!(d > 1e-14)) throw degenerate_input_error("beckner_quotient: constant trial function");
  return beckner_deficit(u, p) / d;
}

/// Entropy quotient entropy(u) / dirichlet(u); its supremum is C_1(mu).
inline double entropy_quotient(const GridFunction& u) {
  double d = dirichlet(u);
  if (!(d > 1e-14)) throw degenerate_input_error("entropy_quotient: constant trial function");
  return log_sobolev_entropy(u) / d;
}

namespace detail {

inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

/// Numerator of the Beckner quotient and its analytic gradient.
struct BecknerObjective {
  double p;

  double numerator(std::span<const double> w, std::span<const double> u) const {
    const double r = 2.0 / p;
    num::Accumulator sq, frac;
    for (std::size_t i = 0; i < u.size(); ++i) {
      double a = std::abs(u[i]);
      sq.add(w[i] * a * a);
      frac.add(w[i] * std::pow(a, r));
    }
    return (sq.value() - std::pow(frac.value(), p)) / (p - 1.0);
  }

  void gradient(std::span<const double> w, std::span<const double> u,
                std::span<double> out) const {
    const double r = 2.0 / p;
    num::Accumulator frac;
    for (std::size_t i = 0; i < u.size(); ++i) frac.add(w[i] * std::pow(std::abs(u[i]), r));
    const double s_pm1 = std::pow(frac.value(), p - 1.0);
    const double scale = 2.0 / (p - 1.0);
    for (std::size_t i = 0; i < u.size(); ++i) {
      double a = std::abs(u[i]);
      double phi = a == 0.0 ? 0.0 : std::pow(a, r - 1.0) * sgn(u[i]);
      out[i] = scale * w[i] * (u[i] - s_pm1 * phi);
    }
  }
};

/// Numerator of the entropy quotient and its analytic gradient.
struct EntropyObjective {
  double numerator(std::span<const double> w, std::span<const double> u) const {
    num::Accumulator sq;
    for (std::size_t i = 0; i < u.size(); ++i) sq.add(w[i] * u[i] * u[i]);
    double l2 = sq.value();
    if (!(l2 > 0.0)) return 0.0;
    double logl2 = std::log(l2);
    num::Accumulator ent;
    for (std::size_t i = 0; i < u.size(); ++i) {
      double u2 = u[i] * u[i];
      if (u2 == 0.0) continue;
      ent.add(w[i] * u2 * (std::log(u2) - logl2));
    }
    return ent.value();
  }

  void gradient(std::span<const double> w, std::span<const double> u,
                std::span<double> out) const {
    num::Accumulator sq;
    for (std::size_t i = 0; i < u.size(); ++i) sq.add(w[i] * u[i] * u[i]);
    double l2 = sq.value();
    double logl2 = std::log(l2);
    for (std::size_t i = 0; i < u.size(); ++i) {
      double u2 = u[i] * u[i];
      out[i] = u2 == 0.0 ? 0.0 : 2.0 * w[i] * u[i] * (std::log(u2) - logl2);
    }
  }
};

struct AscentOutcome {
  bool degenerate = false;
  double value = 0.0;
  std::vector<double> witness;
  int iterations = 0;
};

/// Projected gradient ascent on numerator(u)/dirichlet(u). Both numerators
/// are 2-homogeneous, so iterates are renormalized to unit L^2(mu) norm for
/// free (scaling the cached energy and numerator); in restricted mode the
/// mean is projected out of the iterate and of every ascent direction.
///
/// The ascent direction is the L^2(mu) natural gradient (the Euclidean
/// gradient carries a factor w_i per node, which conditions the problem
/// terribly on grids whose weights span 18 orders of magnitude), combined
/// into Polak-Ribiere+ conjugate directions with automatic restart.
/// Backtracking halves the step until the quotient improves; the Dirichlet
/// part of every trial comes from its exact quadratic expansion, so each
/// trial costs one numerator pass.
template <class Obj>
AscentOutcome ascend_quotient(const GridMeasure& mu, const Obj& obj, std::vector<double> u,
                              bool restricted, const AscentOptions& opts) {
  const std::size_t n = mu.size();
  const double h = mu.spacing();
  const auto w = mu.weights();
  AscentOutcome out;

  auto wmean = [&](std::span<const double> f) {
    num::Accumulator acc;
    for (std::size_t i = 0; i < n; ++i) acc.add(w[i] * f[i]);
    return acc.value();
  };
  auto wnorm2 = [&](std::span<const double> f) {
    num::Accumulator acc;
    for (std::size_t i = 0; i < n; ++i) acc.add(w[i] * f[i] * f[i]);
    return acc.value();
  };
  auto wdot = [&](std::span<const double> a, std::span<const double> b) {
    num::Accumulator acc;
    for (std::size_t i = 0; i < n; ++i) acc.add(w[i] * a[i] * b[i]);
    return acc.value();
  };

  if (restricted) {
    double m = wmean(u);
    for (double& x : u) x -= m;
  }
  double nrm2 = wnorm2(u);
  if (!(nrm2 > 1e-280)) {
    out.degenerate = true;
    return out;
  }
  double s = 1.0 / std::sqrt(nrm2);
  for (double& x : u) x *= s;

  std::vector<double> du(n), dg(n), grad_n(n), grad_d(n), grad(n), grad_prev(n), dir(n),
      trial(n), wdu(n);
  detail::derivative_values(u, h, du);
  double energy = 0.0;
  {
    num::Accumulator acc;
    for (std::size_t i = 0; i < n; ++i) acc.add(w[i] * du[i] * du[i]);
    energy = acc.value();
  }
  if (!(energy > opts.degenerate_dirichlet)) {
    out.degenerate = true;
    return out;
  }
  double numer = obj.numerator(w, u);
  double quot = numer / energy;
  double step = 1.0;
  bool have_prev = false;
  double grad_prev_norm2 = 0.0;

  for (int it = 0; it < opts.max_iterations; ++it) {
    obj.gradient(w, u, grad_n);
    for (std::size_t i = 0; i < n; ++i) wdu[i] = w[i] * du[i];
    detail::derivative_transpose(wdu, h, grad_d);  // grad of energy is 2 * this
    // natural gradient: Euclidean gradient of the quotient divided by w
    for (std::size_t i = 0; i < n; ++i) {
      grad[i] = (grad_n[i] - 2.0 * quot * grad_d[i]) / (energy * w[i]);
    }
    if (restricted) {
      double m = wmean(grad);
      for (double& x : grad) x -= m;
    }
    double grad_norm2 = wnorm2(grad);
    if (!(grad_norm2 > 0.0)) break;

    // Polak-Ribiere+ in the L^2(mu) metric
    double beta = 0.0;
    if (have_prev && grad_prev_norm2 > 0.0) {
      num::Accumulator pr;
      for (std::size_t i = 0; i < n; ++i) pr.add(w[i] * grad[i] * (grad[i] - grad_prev[i]));
      beta = std::max(0.0, pr.value() / grad_prev_norm2);
    }

    bool improved = false;
    double trial_quot = quot, trial_numer = numer, trial_energy = energy, eta_used = step;
    for (int attempt = 0; attempt < 2 && !improved; ++attempt) {
      if (attempt == 1) beta = 0.0;  // restart with steepest ascent
      if (beta > 0.0) {
        for (std::size_t i = 0; i < n; ++i) dir[i] = grad[i] + beta * dir[i];
        if (wdot(dir, grad) <= 0.0) {
          beta = 0.0;
        }
      }
      if (beta == 0.0) std::copy(grad.begin(), grad.end(), dir.begin());

      detail::derivative_values(dir, h, dg);
      double cross = 0.0, dir_energy = 0.0;
      {
        num::Accumulator c, e;
        for (std::size_t i = 0; i < n; ++i) {
          c.add(w[i] * du[i] * dg[i]);
          e.add(w[i] * dg[i] * dg[i]);
        }
        cross = c.value();
        dir_energy = e.value();
      }

      double eta = std::min(step * 4.0, 1e12);
      while (eta > 1e-18) {
        for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + eta * dir[i];
        trial_energy = energy + 2.0 * eta * cross + eta * eta * dir_energy;
        if (trial_energy > opts.degenerate_dirichlet) {
          trial_numer = obj.numerator(w, trial);
          trial_quot = trial_numer / trial_energy;
          if (!std::isfinite(trial_quot)) {
            throw numerical_error("ascent produced a non-finite quotient; iterate norm " +
                                  num::fmt_g17(std::sqrt(wnorm2(trial))));
          }
          if (trial_quot > quot) {
            improved = true;
            eta_used = eta;
            break;
          }
        }
        eta /= 2.0;
      }
    }
    out.iterations = it + 1;
    if (!improved) break;

    double rel = (trial_quot - quot) / std::max(std::abs(quot), 1e-300);
    u.swap(trial);
    quot = trial_quot;
    numer = trial_numer;
    energy = trial_energy;
    step = eta_used;
    grad_prev.swap(grad);
    grad_prev_norm2 = grad_norm2;
    have_prev = true;
    // renormalize (2-homogeneous objective: cached values rescale exactly)
    nrm2 = wnorm2(u);
    if (nrm2 > 0.0 && std::isfinite(nrm2)) {
      s = 1.0 / std::sqrt(nrm2);
      for (double& x : u) x *= s;
      numer *= s * s;
      energy *= s * s;
      // the conjugate direction lives in the same projective space; keep it
      // on the iterate's scale
      for (double& x : dir) x *= s;
    }
    detail::derivative_values(u, h, du);
    if (rel < opts.rel_improvement_tol) break;
  }

  out.value = quot;
  out.witness = std::move(u);
  return out;
}

}  // namespace detail

/// Gradient of the Beckner quotient at u (analytic, via the chain rule
/// through the discrete functionals). Exposed for the finite-difference
/// self-test.
inline std::vector<double> beckner_quotient_gradient(const GridFunction& u, double p) {
  const auto& mu = *u.measure();
  const std::size_t n = mu.size();
  const auto w = mu.weights();
  const double h = mu.spacing();
  std::vector<double> du(n), wdu(n), gd(n), gn(n), out(n);
  detail::derivative_values(u.values(), h, du);
  num::Accumulator e;
  for (std::size_t i = 0; i < n; ++i) e.add(w[i] * du[i] * du[i]);
  double energy = e.value();
  if (!(energy > 1e-14)) throw degenerate_input_error("quotient gradient: constant trial function");
  detail::BecknerObjective obj{p};
  double numer = obj.numerator(w, u.values());
  obj.gradient(w, u.values(), gn);
  for (std::size_t i = 0; i < n; ++i) wdu[i] = w[i] * du[i];
  detail::derivative_transpose(wdu, h, gd);
  double quot = numer / energy;
  for (std::size_t i = 0; i < n; ++i) out[i] = (gn[i] - 2.0 * quot * gd[i]) / energy;
  return out;
}

struct VariationalEstimate {
  ConstantEstimate estimate;
  GridFunction witness;
  std::string best_seed;
  int total_iterations = 0;
};

/// The documented seed set: 1 + eps * v_gap for eps in {1e-2, 1e-1, 1},
/// exponentials e^{ax} for a in {+-0.1, +-0.5, +-1}, and the low
/// polynomial seeds 1, x, x^2 - m2.
inline std::vector<std::pair<std::string, std::vector<double>>> default_seed_set(
    const GridMeasure& mu, std::span<const double> v_gap) {
  std::vector<std::pair<std::string, std::vector<double>>> seeds;
  const std::size_t n = mu.size();
  for (double eps : {1e-2, 1e-1, 1.0}) {
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = 1.0 + eps * v_gap[i];
    seeds.emplace_back("1+eps*v_gap(eps=" + num::fmt_g17(eps) + ")", std::move(u));
  }
  for (double a : {0.1, -0.1, 0.5, -0.5, 1.0, -1.0}) {
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = std::exp(a * mu.node(i));
    seeds.emplace_back("exp(" + num::fmt_g17(a) + "x)", std::move(u));
  }
  seeds.emplace_back("const", std::vector<double>(n, 1.0));
  {
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = mu.node(i);
    seeds.emplace_back("x", std::move(u));
  }
  {
    num::Accumulator m2;
    for (std::size_t i = 0; i < n; ++i) m2.add(mu.weight(i) * mu.node(i) * mu.node(i));
    double c = m2.value();
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = mu.node(i) * mu.node(i) - c;
    seeds.emplace_back("x^2-m2", std::move(u));
  }
  return seeds;
}

namespace detail {

template <class Obj>
VariationalEstimate run_variational(const MeasurePtr& mu, const Obj& obj, ConstantKind kind,
                                    double p, CpMode mode,
                                    std::span<const GridFunction> extra_seeds,
                                    const AscentOptions& opts) {
  SpectralResult gap = solve_spectral_gap(mu);
  auto seeds = default_seed_set(*mu, gap.eigenfunction.values());
  for (std::size_t k = 0; k < extra_seeds.size(); ++k) {
    if (extra_seeds[k].measure().get() != mu.get()) {
      throw grid_mismatch_error("extra seed bound to a different measure");
    }
    seeds.emplace_back("extra[" + std::to_string(k) + "]",
                       std::vector<double>(extra_seeds[k].values().begin(),
                                           extra_seeds[k].values().end()));
  }

  const bool restricted = mode == CpMode::restricted;
  bool any_valid = false;
  double best = 0.0;
  std::vector<double> best_witness;
  std::string best_seed;
  int total_iters = 0;
  std::vector<std::string> seed_labels;
  for (auto& [label, seed] : seeds) {
    seed_labels.push_back(label);
    detail::AscentOutcome res = detail::ascend_quotient(*mu, obj, std::move(seed), restricted, opts);
    total_iters += res.iterations;
    if (res.degenerate) continue;
    if (!any_valid || res.value > best) {
      any_valid = true;
      best = res.value;
      best_witness = std::move(res.witness);
      best_seed = label;
    }
  }
  if (!any_valid) throw degenerate_input_error("all seeds degenerate for the variational estimate");

  GridFunction witness(mu, std::move(best_witness));
  VariationalEstimate out{
      .estimate = {},
      .witness = witness,
      .best_seed = best_seed,
      .total_iterations = total_iters,
  };
  out.estimate.kind = kind;
  out.estimate.method = EstimateMethod::variational_lower;
  // the reported value IS the quotient of the returned witness
  out.estimate.value = kind == ConstantKind::c1 ? entropy_quotient(witness)
                                                : beckner_quotient(witness, p);
  out.estimate.p = p;
  out.estimate.grid_n = mu->size();
  out.estimate.domain = mu->domain();
  out.estimate.notes.push_back("best seed: " + best_seed);
  out.estimate.seeds_used = std::move(seed_labels);
  return out;
}

}  // namespace detail

/// Variational lower-bound estimate of C_p(mu) by projected gradient ascent
/// over the documented seed set. In restricted mode the supremum is taken
/// over mean-zero functions (the constant part of every seed is dropped and
/// the mean is projected out after every step).
inline VariationalEstimate estimate_cp(const MeasurePtr& mu, double p,
                                       CpMode mode = CpMode::unrestricted,
                                       std::span<const GridFunction> extra_seeds = {},
                                       const AscentOptions& opts = {}) {
  if (!(p > 1.0 && p <= 2.0)) throw invalid_input_error("estimate_cp: p must be in (1,2]");
  return detail::run_variational(mu, detail::BecknerObjective{p}, ConstantKind::cp, p, mode,
                                 extra_seeds, opts);
}

struct EntropySweepEntry {
  double p = 0.0;
  double estimate = 0.0;
};

struct C1Estimate {
  ConstantEstimate estimate;
  GridFunction witness;
  std::vector<EntropySweepEntry> sweep;
  /// Heuristic: the sweep "appears bounded" when the ratio of the two
  /// estimates closest to p = 1 is below 1.2, and divergent otherwise.
  bool bounded = false;
  double last_ratio = 0.0;
};

/// Variational estimate of the log-Sobolev constant C_1(mu), plus the
/// diagnostic sweep of C_p estimates for p -> 1.
inline C1Estimate estimate_c1_entropy(const MeasurePtr& mu,
                                      std::span<const GridFunction> extra_seeds = {},
                                      const AscentOptions& opts = {}) {
  VariationalEstimate base = detail::run_variational(mu, detail::EntropyObjective{},
                                                     ConstantKind::c1, 1.0, CpMode::unrestricted,
                                                     extra_seeds, opts);
  C1Estimate out{
      .estimate = base.estimate,
      .witness = base.witness,
      .sweep = {},
      .bounded = false,
      .last_ratio = 0.0,
  };
  for (double p : {1.5, 1.25, 1.1, 1.05, 1.02}) {
    VariationalEstimate e = estimate_cp(mu, p, CpMode::unrestricted, extra_seeds, opts);
    out.sweep.push_back({p, e.estimate.value});
  }
  const auto& s = out.sweep;
  out.last_ratio = s[s.size() - 1].estimate / s[s.size() - 2].estimate;
  out.bounded = out.last_ratio < 1.2;
  return out;
}

}  // namespace soblab
