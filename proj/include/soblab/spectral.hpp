#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "soblab/errors.hpp"
#include "soblab/measure.hpp"
#include "soblab/potential.hpp"
#include "soblab/tridiag.hpp"

namespace soblab {

enum class ConstantKind { c2, cp, c1, cp_bound, lambda1 };
enum class EstimateMethod { eigensolve, variational_lower, closed_form, theorem1_bound, bakry_emery };

inline const char* to_string(ConstantKind k) {
  switch (k) {
    case ConstantKind::c2: return "C2";
    case ConstantKind::cp: return "Cp";
    case ConstantKind::c1: return "C1";
    case ConstantKind::cp_bound: return "Cp_bound";
    case ConstantKind::lambda1: return "lambda1";
  }
  return "?";
}

inline const char* to_string(EstimateMethod m) {
  switch (m) {
    case EstimateMethod::eigensolve: return "eigensolve";
    case EstimateMethod::variational_lower: return "variational_lower";
    case EstimateMethod::closed_form: return "closed_form";
    case EstimateMethod::theorem1_bound: return "theorem1_bound";
    case EstimateMethod::bakry_emery: return "bakry_emery";
  }
  return "?";
}

/// A computed inequality constant together with how it was obtained.
/// Variational estimates are lower bounds (each witness certifies one);
/// eigensolve / closed form / theorem bounds are labeled by their method.
struct ConstantEstimate {
  ConstantKind kind = ConstantKind::c2;
  EstimateMethod method = EstimateMethod::eigensolve;
  double value = 0.0;
  bool infinite = false;
  double p = 0.0;                       // for Cp-like kinds
  double residual = 0.0;                // solver / ascent diagnostic
  std::size_t grid_n = 0;
  Interval domain{0.0, 0.0};
  std::vector<std::string> notes;
  std::vector<std::string> seeds_used;  // variational estimates: monotonicity metadata
};

/// Full output of the spectral-gap eigensolve.
///
/// The generator L = d^2/dx^2 - V' d/dx is discretized through its Dirichlet
/// form: E(u,u) = sum_edges m_e ((u_{i+1}-u_i)/h)^2 with trapezoid edge
/// masses, M(u,u) = sum_i w_i u_i^2. The form has exact zero row sums
/// (zero-flux boundary), so the constant function lies in the kernel
/// structurally and lambda_0 = 0 up to round-off. The generalized problem is
/// symmetrized by the similarity transform with diag(sqrt(w_i)) before it
/// reaches the Sturm-bisection eigensolver.
struct SpectralResult {
  ConstantEstimate c2;
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  double residual = 0.0;          // ||A y - lambda_1 y|| of the symmetrized problem
  GridFunction eigenfunction;     // normalized: mean 0, L^2(mu) norm 1, v(x_max) > 0
  /// Rayleigh quotient of the eigenfunction in the assembled discrete forms;
  /// equals 1/lambda_1 up to solver round-off by construction.
  double discrete_rayleigh_c2 = 0.0;
};

namespace detail {

inline tridiag::SymTridiag assemble_generator(const GridMeasure& mu) {
  const std::size_t n = mu.size();
  const double h = mu.spacing();
  std::vector<double> conduct(n - 1);  // edge mass / h^2
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double rho_i = mu.weight(i) / mu.cell(i);
    double rho_j = mu.weight(i + 1) / mu.cell(i + 1);
    conduct[i] = 0.5 * (rho_i + rho_j) / h;
  }
  tridiag::SymTridiag a;
  a.diag.assign(n, 0.0);
  a.off.assign(n - 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    if (i > 0) row += conduct[i - 1];
    if (i + 1 < n) row += conduct[i];
    a.diag[i] = row / mu.weight(i);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    a.off[i] = -conduct[i] / std::sqrt(mu.weight(i) * mu.weight(i + 1));
  }
  return a;
}

}  // namespace detail

/// Poincare constant C_2(mu) = 1 / (spectral gap) together with the gap
/// eigenfunction. Throws numerical_error if the bottom eigenvalue is not
/// within 1e-6 of zero (broken Neumann handling); a gap below 1e-10 is
/// reported as a +infinity candidate rather than an exception.
inline SpectralResult solve_spectral_gap(const MeasurePtr& mu) {
  if (mu->size() < 64) throw invalid_input_error("spectral_gap: need at least 64 nodes");
  const std::size_t n = mu->size();
  tridiag::SymTridiag a = detail::assemble_generator(*mu);

  double lambda0 = tridiag::kth_eigenvalue(a, 0);
  if (std::abs(lambda0) > 1e-6) {
    throw numerical_error("spectral_gap: bottom eigenvalue " + num::fmt_g17(lambda0) +
                          " is not within 1e-6 of zero (Neumann discretization inconsistency)");
  }
  tridiag::EigenPair pair = tridiag::kth_eigenpair(a, 1);

  SpectralResult out{
      .c2 = {},
      .lambda0 = lambda0,
      .lambda1 = pair.value,
      .residual = pair.residual,
      .eigenfunction = GridFunction(mu, std::vector<double>(n, 0.0)),
      .discrete_rayleigh_c2 = 0.0,
  };
  out.c2.kind = ConstantKind::c2;
  out.c2.method = EstimateMethod::eigensolve;
  out.c2.residual = pair.residual;
  out.c2.grid_n = n;
  out.c2.domain = mu->domain();
  if (mu->density_floored()) {
    out.c2.notes.push_back("density-underflow plateau on this grid: the gap describes the "
                           "floored discrete measure, not e^{-V}; use the natural domain");
  }
  if (pair.value < 1e-10) {
    out.c2.infinite = true;
    out.c2.value = std::numeric_limits<double>::infinity();
    out.c2.notes.push_back("gap-too-small: lambda_1 < 1e-10, C2 reported as +inf candidate");
    return out;
  }
  out.c2.value = 1.0 / pair.value;

  // back-transform y -> u = y / sqrt(w); enforce mean zero and unit L^2(mu)
  // norm, fix the sign at the right end
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = pair.vector[i] / std::sqrt(mu->weight(i));
  num::Accumulator mean_acc;
  for (std::size_t i = 0; i < n; ++i) mean_acc.add(mu->weight(i) * u[i]);
  double m = mean_acc.value();
  for (double& x : u) x -= m;
  num::Accumulator nrm_acc;
  for (std::size_t i = 0; i < n; ++i) nrm_acc.add(mu->weight(i) * u[i] * u[i]);
  double nrm = std::sqrt(nrm_acc.value());
  if (!(nrm > 0.0)) throw numerical_error("spectral_gap: degenerate eigenfunction");
  double sign = u[n - 1] >= 0.0 ? 1.0 : -1.0;
  for (double& x : u) x *= sign / nrm;

  // Rayleigh quotient in the assembled forms (variance reduces to M(u,u)
  // because the mean was projected out)
  const double hh = mu->spacing();
  num::Accumulator energy;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double rho_i = mu->weight(i) / mu->cell(i);
    double rho_j = mu->weight(i + 1) / mu->cell(i + 1);
    double diff = (u[i + 1] - u[i]) / hh;
    energy.add(0.5 * (rho_i + rho_j) * hh * diff * diff);
  }
  out.discrete_rayleigh_c2 = 1.0 / energy.value();  // M(u,u) = 1 after normalization
  out.eigenfunction = GridFunction(mu, std::move(u));
  return out;
}

inline ConstantEstimate spectral_gap(const MeasurePtr& mu) { return solve_spectral_gap(mu).c2; }

inline GridFunction gap_eigenfunction(const MeasurePtr& mu) {
  SpectralResult r = solve_spectral_gap(mu);
  if (r.c2.infinite) throw numerical_error("gap_eigenfunction: spectral gap too small");
  return r.eigenfunction;
}

/// Bakry-Emery upper bound 2 / (p lambda_1) with lambda_1 = inf V'' over
/// the whole line. Not applicable (returned as a +inf flag, not an
/// exception) when the infimum is not positive.
inline ConstantEstimate bakry_emery_bound(const PotentialSpec& v, double p) {
  if (!(p >= 1.0 && p <= 2.0)) throw invalid_input_error("bakry_emery_bound: p must be in [1,2]");
  ConstantEstimate est;
  est.kind = ConstantKind::cp_bound;
  est.method = EstimateMethod::bakry_emery;
  est.p = p;
  Lambda1Result lam = bakry_emery_lambda1(v);
  if (!(lam.value > 0.0) || !lam.bounded_below) {
    est.infinite = true;
    est.value = std::numeric_limits<double>::infinity();
    est.notes.push_back("bound not applicable: inf V'' = " + num::fmt_g17(lam.value) +
                        (lam.attained ? "" : " (not attained)"));
    return est;
  }
  est.value = 2.0 / (p * lam.value);
  if (!lam.note.empty()) est.notes.push_back("lambda1: " + lam.note);
  return est;
}

}  // namespace soblab
