#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "soblab/errors.hpp"

namespace soblab::tridiag {

/// Symmetric tridiagonal matrix: diag has n entries, off has n-1.
struct SymTridiag {
  std::vector<double> diag;
  std::vector<double> off;
  std::size_t size() const { return diag.size(); }
};

/// Number of eigenvalues strictly below x (Sturm sequence via the LDL^T
/// sign count). Robust for any real x; ties at x count as below.
inline int count_below(const SymTridiag& t, double x) {
  const std::size_t n = t.size();
  int count = 0;
  double d = t.diag[0] - x;
  if (d <= 0.0) ++count;
  for (std::size_t i = 1; i < n; ++i) {
    double e = t.off[i - 1];
    if (d == 0.0) d = -std::numeric_limits<double>::min();
    d = t.diag[i] - x - e * e / d;
    if (d <= 0.0) ++count;
  }
  return count;
}

/// k-th smallest eigenvalue (0-based) by bisection on the Sturm count.
/// Guaranteed bracketing from Gershgorin disks; converges to ~4 ulp.
inline double kth_eigenvalue(const SymTridiag& t, int k) {
  const std::size_t n = t.size();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double r = (i > 0 ? std::abs(t.off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(t.off[i]) : 0.0);
    lo = std::min(lo, t.diag[i] - r);
    hi = std::max(hi, t.diag[i] + r);
  }
  double pad = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
  lo -= pad;
  hi += pad;
  for (int it = 0; it < 256; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (count_below(t, mid) >= k + 1) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (hi - lo <= 8.0 * std::numeric_limits<double>::epsilon() *
                        std::max(1.0, std::max(std::abs(lo), std::abs(hi)))) {
      break;
    }
  }
  return 0.5 * (lo + hi);
}

inline void matvec(const SymTridiag& t, const std::vector<double>& v, std::vector<double>& out) {
  const std::size_t n = t.size();
  for (std::size_t i = 0; i < n; ++i) {
    double s = t.diag[i] * v[i];
    if (i > 0) s += t.off[i - 1] * v[i - 1];
    if (i + 1 < n) s += t.off[i] * v[i + 1];
    out[i] = s;
  }
}

namespace detail {

/// LU factorization of (T - shift I) with partial pivoting for a
/// tridiagonal matrix; solves in place. Fill-in limited to a second
/// superdiagonal.
struct TridiagLU {
  std::vector<double> dl, d, du, du2;
  std::vector<int> piv;

  TridiagLU(const SymTridiag& t, double shift) {
    const std::size_t n = t.size();
    dl.assign(n, 0.0);
    d.assign(n, 0.0);
    du.assign(n, 0.0);
    du2.assign(n, 0.0);
    piv.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) d[i] = t.diag[i] - shift;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      dl[i + 1] = t.off[i];  // subdiagonal entry of row i+1
      du[i] = t.off[i];
    }
    const double tiny = 1e-300;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (std::abs(d[i]) >= std::abs(dl[i + 1])) {
        piv[i] = 0;
        if (d[i] == 0.0) d[i] = tiny;
        double m = dl[i + 1] / d[i];
        dl[i + 1] = m;  // store multiplier
        d[i + 1] -= m * du[i];
        if (i + 2 < n) du2[i] = 0.0;
      } else {
        piv[i] = 1;  // swap rows i, i+1
        double m = d[i] / dl[i + 1];
        d[i] = dl[i + 1];
        dl[i + 1] = m;
        double tmp = du[i];
        du[i] = d[i + 1];
        d[i + 1] = tmp - m * d[i + 1];
        if (i + 2 < n) {
          du2[i] = du[i + 1];
          du[i + 1] = -m * du[i + 1];
        }
      }
    }
    if (d[n - 1] == 0.0) d[n - 1] = tiny;
  }

  void solve(std::vector<double>& b) const {
    const std::size_t n = d.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (piv[i]) std::swap(b[i], b[i + 1]);
      b[i + 1] -= dl[i + 1] * b[i];
    }
    b[n - 1] /= d[n - 1];
    if (n >= 2) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for (std::size_t i = n - 2; i-- > 0;) {
      b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
  }
};

}  // namespace detail

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;
  double residual = 0.0;
};

/// k-th smallest eigenpair: bisection for the eigenvalue, then inverse
/// iteration (3-5 sweeps) for the eigenvector. The vector is returned with
/// unit Euclidean norm.
inline EigenPair kth_eigenpair(const SymTridiag& t, int k) {
  const std::size_t n = t.size();
  EigenPair out;
  out.value = kth_eigenvalue(t, k);

  detail::TridiagLU lu(t, out.value);
  std::vector<double> v(n);
  // deterministic quasi-random start vector
  std::uint64_t s = 0x9e3779b97f4a7c15ull;
  for (std::size_t i = 0; i < n; ++i) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    v[i] = 0.5 + static_cast<double>(s >> 11) * 0x1.0p-53;
  }
  std::vector<double> tv(n);
  double best_res = std::numeric_limits<double>::infinity();
  std::vector<double> best = v;
  for (int sweep = 0; sweep < 6; ++sweep) {
    lu.solve(v);
    double nrm = 0.0;
    for (double x : v) nrm += x * x;
    nrm = std::sqrt(nrm);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw numerical_error("inverse iteration collapsed");
    for (double& x : v) x /= nrm;
    matvec(t, v, tv);
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double r = tv[i] - out.value * v[i];
      res += r * r;
    }
    res = std::sqrt(res);
    if (res < best_res) {
      best_res = res;
      best = v;
    }
    if (res < 1e-13 * std::max(1.0, std::abs(out.value))) break;
  }
  out.vector = std::move(best);
  out.residual = best_res;
  return out;
}

}  // namespace soblab::tridiag
