#pragma once

// Effective tangential harmonic oscillator -c2 d^2/ds^2 + K s^2 (c2, K > 0):
// analytic Hermite eigenfunctions with exact derivatives, the closed-form
// ladder E_n = (2n-1) sqrt(c2 K), and a tridiagonal discretization used as a
// cross-check oracle.

#include <cmath>
#include <cstddef>
#include <vector>

#include "magstep/core.hpp"
#include "magstep/fiber.hpp"
#include "magstep/grid.hpp"
#include "magstep/tridiag.hpp"

namespace magstep {

struct HarmonicOscParams {
  double c2 = 0.5;  // kinetic coefficient
  double K = 0.5;   // potential coefficient

  void validate() const {
    require(c2 > 0.0 && K > 0.0,
            "HarmonicOscParams: both coefficients must be positive");
  }

  /// Length scale: the ground state is exp(-s^2 / (2 s0^2)).
  double s0() const { return std::pow(c2 / K, 0.25); }
};

/// n-th eigenvalue (n >= 1): (2n - 1) sqrt(c2 K).
inline double harm_energy(std::size_t n, const HarmonicOscParams& p) {
  p.validate();
  require(n >= 1, "harm_energy: mode index starts at 1");
  return (2.0 * static_cast<double>(n) - 1.0) * std::sqrt(p.c2 * p.K);
}

/// Analytic eigenfunction with first/second derivatives sampled on a grid.
/// All three profiles are exact (no difference quotients): with x = s/s0 and
/// k = n-1, f = N H_k(x) e^{-x^2/2}, f' uses H_k' = 2k H_{k-1}, and f'' comes
/// from the oscillator equation f'' = ((x^2 - (2k+1))/s0^2) f.
struct HarmOscMode {
  double energy = 0.0;
  std::vector<double> f, df, d2f;
};

inline HarmOscMode harm_eigenpair(std::size_t n, const HarmonicOscParams& p,
                                  const Grid1D& g) {
  p.validate();
  require(n >= 1, "harm_eigenpair: mode index starts at 1");
  const std::size_t k = n - 1;
  const double s0 = p.s0();
  // Normalization of H_k e^{-x^2/2}: integral of the square is 2^k k! sqrt(pi).
  double nrm2 = std::sqrt(M_PI);
  for (std::size_t j = 1; j <= k; ++j) nrm2 *= 2.0 * static_cast<double>(j);
  const double N = 1.0 / std::sqrt(s0 * nrm2);

  HarmOscMode m;
  m.energy = harm_energy(n, p);
  m.f.resize(g.n_points);
  m.df.resize(g.n_points);
  m.d2f.resize(g.n_points);
  for (std::size_t i = 0; i < g.n_points; ++i) {
    const double x = g.node(i) / s0;
    double hk = 1.0, hkm1 = 0.0;  // H_k(x), H_{k-1}(x) by upward recurrence
    for (std::size_t j = 1; j <= k; ++j) {
      double hkp1 = 2.0 * x * hk - 2.0 * (static_cast<double>(j) - 1.0) * hkm1;
      hkm1 = hk;
      hk = hkp1;
    }
    const double e = std::exp(-0.5 * x * x);
    const double val = N * hk * e;
    m.f[i] = val;
    m.df[i] = N * (2.0 * static_cast<double>(k) * hkm1 - x * hk) * e / s0;
    m.d2f[i] =
        (x * x - (2.0 * static_cast<double>(k) + 1.0)) / (s0 * s0) * val;
  }
  return m;
}

/// Discretized oscillator eigenvalue (second-order central differences with
/// Dirichlet ends); serves as the numerical cross-check of harm_energy.
inline double harm_discrete_energy(std::size_t n, const HarmonicOscParams& p,
                                   const Grid1D& g) {
  p.validate();
  require(n >= 1, "harm_discrete_energy: mode index starts at 1");
  const std::size_t m = g.n_points - 2;
  const double h = g.step();
  TriDiag T;
  T.diag.resize(m);
  T.offdiag.assign(m - 1, -p.c2 / (h * h));
  for (std::size_t i = 0; i < m; ++i) {
    const double s = g.node(i + 1);
    T.diag[i] = 2.0 * p.c2 / (h * h) + p.K * s * s;
  }
  return tridiag_smallest(T, n).back().value;
}

}  // namespace magstep
