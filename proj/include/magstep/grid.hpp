#pragma once

// Uniform symmetric 1D grids, trapezoid quadrature, a C^2 plateau cutoff, and
// a small Brent minimizer used for locating band minima.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "magstep/core.hpp"

namespace magstep {

/// Uniform grid on [-L, L] with an odd node count (so 0 is a node).
struct Grid1D {
  double L = 20.0;
  std::size_t n_points = 4001;

  Grid1D() = default;
  Grid1D(double L_, std::size_t n_) : L(L_), n_points(n_) { validate(); }

  void validate() const {
    require(L > 0.0, "Grid1D: L must be positive");
    require(n_points >= 3 && n_points % 2 == 1, "Grid1D: n_points must be odd and >= 3");
  }

  double step() const { return 2.0 * L / static_cast<double>(n_points - 1); }
  double node(std::size_t i) const { return -L + static_cast<double>(i) * step(); }
  std::size_t center_index() const { return (n_points - 1) / 2; }

  /// Grid with the same extent and halved resolution (node count (n+1)/2).
  Grid1D coarsened() const { return Grid1D(L, (n_points + 1) / 2); }
};

/// Trapezoid quadrature of nodal values (uniform step).
inline double trapezoid(const std::vector<double>& f, double step) {
  if (f.empty()) return 0.0;
  double acc = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) acc += f[i];
  return acc * step;
}

/// C^2 cutoff: 1 on [-1/2, 1/2], 0 outside [-1, 1], quintic blend between.
inline double cutoff_chi(double x) {
  double ax = std::abs(x);
  if (ax <= 0.5) return 1.0;
  if (ax >= 1.0) return 0.0;
  double t = 2.0 * ax - 1.0;  // in (0, 1)
  double s = t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
  return 1.0 - s;
}

/// cutoff_chi scaled to plateau radius r/2 and support radius r.
inline double cutoff_chi(double x, double radius) { return cutoff_chi(x / radius); }

/// Brent minimization on [lo, hi]; f assumed unimodal there.
inline double brent_minimize(const std::function<double(double)>& f, double lo,
                             double hi, double xtol = 1e-10, int max_iter = 200) {
  const double gold = 0.3819660112501051;
  double a = lo, b = hi;
  double x = a + gold * (b - a), w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    double m = 0.5 * (a + b);
    double tol1 = xtol * std::abs(x) + 1e-15, tol2 = 2.0 * tol1;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;
    bool parabolic = false;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0) p = -p;
      q = std::abs(q);
      double etemp = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (m > x) ? tol1 : -tol1;
        parabolic = true;
      }
    }
    if (!parabolic) {
      e = (x < m) ? b - x : a - x;
      d = gold * e;
    }
    double u = (std::abs(d) >= tol1) ? x + d : x + ((d > 0) ? tol1 : -tol1);
    double fu = f(u);
    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return x;
}

}  // namespace magstep
