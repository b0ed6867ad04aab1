#pragma once

// Fiber (band) problem for the step magnetic field: the half-bound states of
//   -d^2/dtau^2 + (xi + b_a(tau) tau)^2   on L^2(R),
// where b_a = 1 on tau >= 0 and a on tau < 0, discretized on a symmetric grid
// with Dirichlet ends.  Provides the band function, its derivative (two
// independent routes), sweeps, and a Neumann half-line reference problem.

#include <cmath>
#include <cstddef>
#include <vector>

#include "magstep/core.hpp"
#include "magstep/grid.hpp"
#include "magstep/tridiag.hpp"

namespace magstep {

/// Step coefficient; the tau = 0 node takes the right-limit value 1.
inline double b_weight(double tau, double a) { return tau >= 0.0 ? 1.0 : a; }

struct FiberParams {
  double a = -0.5;  // field ratio, in [-1, 0)
  double xi = 0.0;  // momentum along the edge

  void validate() const {
    require(a >= -1.0 && a < 0.0, "FiberParams: a must lie in [-1, 0)");
  }
};

/// One point of the band function.
struct BandPoint {
  double xi = 0.0;
  double mu = 0.0;                // lowest eigenvalue
  std::vector<double> phi;        // ground state on the full grid, zero ends,
                                  // L2(trapezoid)-normalized, positive
  double mu_prime = 0.0;          // dmu/dxi at xi
};

/// Interior-node tridiagonal for the fiber operator.
inline TriDiag build_fiber_operator(const FiberParams& p, const Grid1D& g) {
  p.validate();
  g.validate();
  const std::size_t m = g.n_points - 2;
  const double h = g.step();
  TriDiag T;
  T.diag.resize(m);
  T.offdiag.assign(m - 1, -1.0 / (h * h));
  for (std::size_t i = 0; i < m; ++i) {
    double tau = g.node(i + 1);
    double w = p.xi + b_weight(tau, p.a) * tau;
    T.diag[i] = 2.0 / (h * h) + w * w;
  }
  return T;
}

/// Lowest eigenvalue of the discretized fiber operator.
inline double band_value(const FiberParams& p, const Grid1D& g) {
  TriDiag T = build_fiber_operator(p, g);
  return tridiag_smallest(T, 1).front().value;
}

namespace detail {

/// Full-grid, trapezoid-normalized, positive ground state plus eigenvalue.
inline std::pair<double, std::vector<double>> fiber_ground_state(const FiberParams& p,
                                                                 const Grid1D& g) {
  TriDiag T = build_fiber_operator(p, g);
  EigenPair e = tridiag_smallest(T, 1).front();
  // Ground state is nodeless: fix the overall sign by the largest entry.
  double big = 0.0;
  for (double v : e.vector)
    if (std::abs(v) > std::abs(big)) big = v;
  const double flip = big < 0 ? -1.0 : 1.0;
  // Unit Euclidean norm on interior nodes with zero ends corresponds to
  // 1/sqrt(step) scaling in L2(trapezoid).
  const double s = flip / std::sqrt(g.step());
  std::vector<double> phi(g.n_points, 0.0);
  for (std::size_t i = 0; i < e.vector.size(); ++i) phi[i + 1] = s * e.vector[i];
  return {e.value, std::move(phi)};
}

}  // namespace detail

/// Band point with the derivative from the Feynman-Hellmann quadrature
///   mu'(xi) = 2 int (xi + b_a tau) |phi|^2 dtau.
inline BandPoint band_eigenpair(const FiberParams& p, const Grid1D& g) {
  auto [mu, phi] = detail::fiber_ground_state(p, g);
  BandPoint bp;
  bp.xi = p.xi;
  bp.mu = mu;
  bp.phi = std::move(phi);
  std::vector<double> f(g.n_points);
  for (std::size_t i = 0; i < g.n_points; ++i) {
    double tau = g.node(i);
    f[i] = (p.xi + b_weight(tau, p.a) * tau) * bp.phi[i] * bp.phi[i];
  }
  bp.mu_prime = 2.0 * trapezoid(f, g.step());
  return bp;
}

/// Feynman-Hellmann derivative of an already-computed band point.
inline double band_derivative_fh(const BandPoint& bp, const FiberParams& p,
                                 const Grid1D& g) {
  require(bp.phi.size() == g.n_points, "band_derivative_fh: grid mismatch");
  std::vector<double> f(g.n_points);
  for (std::size_t i = 0; i < g.n_points; ++i) {
    double tau = g.node(i);
    f[i] = (bp.xi + b_weight(tau, p.a) * tau) * bp.phi[i] * bp.phi[i];
  }
  return 2.0 * trapezoid(f, g.step());
}

/// Independent boundary-trace formula for the same derivative:
///   mu'(xi) = (1 - 1/a) [ phi'(0)^2 + (mu - xi^2) phi(0)^2 ].
inline double band_derivative_boundary(const BandPoint& bp, const FiberParams& p,
                                       const Grid1D& g) {
  const std::size_t c = g.center_index();
  const double phi0 = bp.phi[c];
  const double dphi0 = (bp.phi[c + 1] - bp.phi[c - 1]) / (2.0 * g.step());
  return (1.0 - 1.0 / p.a) * (dphi0 * dphi0 + (bp.mu - bp.xi * bp.xi) * phi0 * phi0);
}

/// Band function samples over [xi_lo, xi_hi]; eigenvectors are dropped to
/// keep sweeps lightweight unless keep_phi is set.
inline std::vector<BandPoint> band_sweep(double a, double xi_lo, double xi_hi,
                                         std::size_t n_xi, const Grid1D& g,
                                         bool keep_phi = false) {
  require(n_xi >= 2, "band_sweep: need at least two samples");
  require(xi_hi > xi_lo, "band_sweep: empty interval");
  std::vector<BandPoint> out;
  out.reserve(n_xi);
  for (std::size_t i = 0; i < n_xi; ++i) {
    double xi = xi_lo + (xi_hi - xi_lo) * static_cast<double>(i) /
                            static_cast<double>(n_xi - 1);
    BandPoint bp = band_eigenpair({a, xi}, g);
    if (!keep_phi) bp.phi.clear();
    out.push_back(std::move(bp));
  }
  return out;
}

/// Parabolic interpolation of the sweep minimum (three-point stencil around
/// the smallest sample).
inline std::pair<double, double> sweep_parabolic_min(const std::vector<BandPoint>& sweep) {
  require(sweep.size() >= 3, "sweep_parabolic_min: need three points");
  std::size_t imin = 0;
  for (std::size_t i = 1; i < sweep.size(); ++i)
    if (sweep[i].mu < sweep[imin].mu) imin = i;
  require(imin > 0 && imin + 1 < sweep.size(),
          "sweep_parabolic_min: minimum at the sweep boundary");
  const double x0 = sweep[imin - 1].xi, x1 = sweep[imin].xi, x2 = sweep[imin + 1].xi;
  const double f0 = sweep[imin - 1].mu, f1 = sweep[imin].mu, f2 = sweep[imin + 1].mu;
  const double dx = x1 - x0;
  require(std::abs((x2 - x1) - dx) < 1e-9 * std::abs(dx), "sweep_parabolic_min: non-uniform sweep");
  const double denom = f0 - 2.0 * f1 + f2;
  require(denom > 0.0, "sweep_parabolic_min: degenerate stencil");
  const double xi_min = x1 + 0.5 * dx * (f0 - f2) / denom;
  const double mu_min = f1 - 0.125 * (f0 - f2) * (f0 - f2) / denom;
  return {xi_min, mu_min};
}

/// Half-line Neumann problem -u'' + (xi + tau)^2 u, u'(0) = 0, on [0, L]:
/// variational discretization (natural boundary condition, lumped trapezoid
/// mass).  Its minimum over xi is the classical surface-superconductivity
/// constant; serves as an independent cross-check of the a = -1 band minimum.
inline double neumann_half_line_value(double xi, double L, std::size_t n) {
  require(n >= 3, "neumann_half_line_value: grid too small");
  const double h = L / static_cast<double>(n - 1);
  const std::size_t m = n - 1;  // Dirichlet at tau = L drops the last node
  std::vector<double> mass(m), stiff_diag(m);
  for (std::size_t i = 0; i < m; ++i) {
    double tau = static_cast<double>(i) * h;
    double V = (xi + tau) * (xi + tau);
    double w = (i == 0) ? 0.5 * h : h;
    mass[i] = w;
    stiff_diag[i] = ((i == 0 || i + 1 == n) ? 1.0 : 2.0) / h + V * w;
  }
  TriDiag T;
  T.diag.resize(m);
  T.offdiag.resize(m - 1);
  for (std::size_t i = 0; i < m; ++i) T.diag[i] = stiff_diag[i] / mass[i];
  for (std::size_t i = 0; i + 1 < m; ++i)
    T.offdiag[i] = (-1.0 / h) / std::sqrt(mass[i] * mass[i + 1]);
  return tridiag_smallest(T, 1).front().value;
}

struct HalfLineMinimum {
  double theta = 0.0;   // minimal eigenvalue over xi
  double xi_min = 0.0;  // minimizer (approximately -sqrt(theta))
};

/// Richardson-extrapolated half-line minimum (grids n and 2n-1).
inline HalfLineMinimum neumann_half_line_minimum(double L = 20.0, std::size_t n = 2001) {
  auto minimize = [&](std::size_t nn) {
    double xi = brent_minimize([&](double x) { return neumann_half_line_value(x, L, nn); },
                               -1.5, -0.2);
    return std::pair<double, double>(xi, neumann_half_line_value(xi, L, nn));
  };
  auto [xi_c, th_c] = minimize(n);
  auto [xi_f, th_f] = minimize(2 * n - 1);
  HalfLineMinimum out;
  out.theta = (4.0 * th_f - th_c) / 3.0;
  out.xi_min = (4.0 * xi_f - xi_c) / 3.0;
  return out;
}

}  // namespace magstep
