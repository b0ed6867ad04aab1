#pragma once

// Real symmetric tridiagonal eigensolver: Sturm-count bisection for values,
// safeguarded inverse iteration (Thomas solves) for vectors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "magstep/core.hpp"

namespace magstep {

/// Symmetric tridiagonal matrix; diag has n entries, offdiag n-1.
struct TriDiag {
  std::vector<double> diag;
  std::vector<double> offdiag;

  std::size_t size() const { return diag.size(); }

  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
      double acc = diag[i] * x[i];
      if (i > 0) acc += offdiag[i - 1] * x[i - 1];
      if (i + 1 < n) acc += offdiag[i] * x[i + 1];
      y[i] = acc;
    }
  }

  /// Gershgorin bounds [lo, hi] containing the whole spectrum.
  std::pair<double, double> gershgorin() const {
    const std::size_t n = size();
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
      double r = (i > 0 ? std::abs(offdiag[i - 1]) : 0.0) +
                 (i + 1 < n ? std::abs(offdiag[i]) : 0.0);
      lo = std::min(lo, diag[i] - r);
      hi = std::max(hi, diag[i] + r);
    }
    return {lo, hi};
  }
};

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;  // unit Euclidean norm
};

/// Number of eigenvalues strictly below sigma, by counting negative pivots of
/// the LDL^T recurrence.  Exact in exact arithmetic; pivot underflow is
/// replaced by a tiny value of the same sign (standard safeguard).
inline std::size_t sturm_count_below(const TriDiag& T, double sigma) {
  const std::size_t n = T.size();
  const double tiny = 1e-300;
  std::size_t cnt = 0;
  double q = T.diag[0] - sigma;
  if (q < 0) ++cnt;
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(q) < tiny) q = (q < 0 ? -tiny : tiny);
    q = T.diag[i] - sigma - T.offdiag[i - 1] * T.offdiag[i - 1] / q;
    if (q < 0) ++cnt;
  }
  return cnt;
}

namespace detail {

/// Solve (T - sigma) x = b by LU without pivoting; near-zero pivots are
/// perturbed (inverse iteration only needs the dominant direction).
inline void shifted_thomas_solve(const TriDiag& T, double sigma,
                                 std::vector<double>& x) {
  const std::size_t n = T.size();
  const double scale_ref = std::max(std::abs(T.diag[0]), 1.0);
  const double floor_piv = 1e-14 * scale_ref + 1e-300;
  std::vector<double> c(n - 1), d(n);
  d[0] = T.diag[0] - sigma;
  if (std::abs(d[0]) < floor_piv) d[0] = (d[0] < 0 ? -floor_piv : floor_piv);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    c[i] = T.offdiag[i] / d[i];
    d[i + 1] = T.diag[i + 1] - sigma - c[i] * T.offdiag[i];
    if (std::abs(d[i + 1]) < floor_piv)
      d[i + 1] = (d[i + 1] < 0 ? -floor_piv : floor_piv);
  }
  for (std::size_t i = 1; i < n; ++i) x[i] -= c[i - 1] * x[i - 1];
  x[n - 1] /= d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (x[i] - T.offdiag[i] * x[i + 1]) / d[i];
}

}  // namespace detail

/// k smallest eigenpairs.  Eigenvalues by bisection (Sturm counts), vectors by
/// inverse iteration; members of close clusters are orthogonalized against
/// each other so degenerate blocks come out orthonormal.
inline std::vector<EigenPair> tridiag_smallest(const TriDiag& T, std::size_t k,
                                               double tol = 1e-12) {
  const std::size_t n = T.size();
  require(n >= 1, "tridiag_smallest: empty matrix");
  require(k >= 1 && k <= n, "tridiag_smallest: k out of range");
  require(T.offdiag.size() + 1 == n, "tridiag_smallest: offdiag size mismatch");

  auto [glo, ghi] = T.gershgorin();
  const double scale_ref = std::max({std::abs(glo), std::abs(ghi), 1.0});
  const double eps_ev = std::max(tol, 1e-15) * scale_ref;

  // Bisection for the i-th smallest eigenvalue (0-based): smallest sigma with
  // count_below(sigma) >= i+1.
  std::vector<double> values(k);
  for (std::size_t i = 0; i < k; ++i) {
    double lo = glo, hi = ghi;
    while (hi - lo > eps_ev) {
      double mid = 0.5 * (lo + hi);
      if (sturm_count_below(T, mid) >= i + 1)
        hi = mid;
      else
        lo = mid;
    }
    values[i] = 0.5 * (lo + hi);
  }

  // Inverse iteration per eigenvalue, orthogonalizing within clusters.
  const double cluster_w = 1e3 * eps_ev;
  std::vector<EigenPair> out(k);
  std::vector<std::vector<double>> cluster;
  for (std::size_t i = 0; i < k; ++i) {
    cluster.clear();
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(values[j] - values[i]) < cluster_w) cluster.push_back(out[j].vector);

    std::vector<double> v = seeded_gaussian(n, 0x5eedULL + i);
    scale(v, 1.0 / norm2(v));
    double theta = values[i];
    std::vector<double> tv(n);
    for (int it = 0; it < 8; ++it) {
      detail::shifted_thomas_solve(T, theta, v);
      if (!cluster.empty()) mgs_orthonormalize(v, cluster);
      double nrm = norm2(v);
      scale(v, 1.0 / nrm);
      T.apply(v, tv);
      double rq = dot(v, tv);
      double res = 0.0;
      for (std::size_t p = 0; p < n; ++p) {
        double r = tv[p] - rq * v[p];
        res += r * r;
      }
      res = std::sqrt(res);
      // keep the Rayleigh quotient once the vector settles
      if (res < 1e-13 * scale_ref && it >= 1) {
        theta = rq;
        break;
      }
      theta = rq;
    }
    out[i].value = theta;
    out[i].vector = std::move(v);
  }
  std::sort(out.begin(), out.end(),
            [](const EigenPair& a, const EigenPair& b) { return a.value < b.value; });
  return out;
}

}  // namespace magstep
