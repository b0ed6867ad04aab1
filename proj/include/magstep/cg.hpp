#pragma once

// Conjugate gradients templated over an operator concept (`size()` +
// `apply(x, y)`), with optional deflation (solve restricted to the orthogonal
// complement of given vectors) and an optional preconditioner functor.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "magstep/core.hpp"

namespace magstep {

/// y = (A - sigma) x for any operator A.
template <class Op>
struct ShiftedOp {
  const Op& A;
  double sigma;
  std::size_t size() const { return A.size(); }
  template <class S>
  void apply(const std::vector<S>& x, std::vector<S>& y) const {
    A.apply(x, y);
    for (std::size_t i = 0; i < x.size(); ++i) y[i] -= S(sigma) * x[i];
  }
};

template <class S>
struct CgResult {
  std::vector<S> x;
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

template <class S>
struct CgOptions {
  std::size_t max_iter = 0;  // 0: 5n + 1000
  std::vector<S> x0;         // warm start (empty: zero)
  // Preconditioner application z = M^{-1} r; empty: identity.
  std::function<void(const std::vector<S>&, std::vector<S>&)> precond;
};

/// Solve A x = b with CG.  `deflation` holds constraint vectors; the right
/// hand side and all iterates are kept orthogonal to them, so A only needs to
/// be positive definite on their orthogonal complement.  Throws SolverError on
/// stagnation, iteration overflow, or an indefinite pivot.
template <class Op, class S>
CgResult<S> cg_solve(const Op& A, const std::vector<S>& b, double tol,
                     const std::vector<std::vector<S>>& deflation = {},
                     const CgOptions<S>& opts = {}) {
  const std::size_t n = A.size();
  require(b.size() == n, "cg_solve: rhs size mismatch");
  const std::size_t max_iter = opts.max_iter ? opts.max_iter : 5 * n + 1000;

  // Orthonormal copy of the constraint basis.
  std::vector<std::vector<S>> W;
  W.reserve(deflation.size());
  for (const auto& w : deflation) {
    std::vector<S> wc = w;
    if (mgs_orthonormalize(wc, W)) W.push_back(std::move(wc));
  }
  auto project = [&](std::vector<S>& v) {
    for (const auto& w : W) {
      S c = dot(w, v);
      for (std::size_t i = 0; i < n; ++i) v[i] -= c * w[i];
    }
  };

  CgResult<S> out;
  out.x.assign(n, S{});
  std::vector<S> r = b;
  project(r);
  const double bnorm = norm2(r);
  if (bnorm == 0.0) return out;

  std::vector<S> tmp(n);
  if (!opts.x0.empty()) {
    require(opts.x0.size() == n, "cg_solve: x0 size mismatch");
    out.x = opts.x0;
    project(out.x);
    A.apply(out.x, tmp);
    for (std::size_t i = 0; i < n; ++i) r[i] -= tmp[i];
    project(r);
  }

  std::vector<S> z(n), p(n), Ap(n);
  auto apply_precond = [&](const std::vector<S>& rr, std::vector<S>& zz) {
    if (opts.precond) {
      opts.precond(rr, zz);
      project(zz);
    } else {
      zz = rr;
    }
  };

  apply_precond(r, z);
  p = z;
  double rz = std::real(std::complex<double>(dot(r, z)));
  double rnorm = norm2(r);

  for (std::size_t it = 0; it < max_iter; ++it) {
    if (rnorm <= tol * bnorm) {
      out.iterations = it;
      out.relative_residual = rnorm / bnorm;
      return out;
    }
    A.apply(p, Ap);
    project(Ap);
    double pAp = std::real(std::complex<double>(dot(p, Ap)));
    if (!(pAp > 0.0))
      throw SolverError("cg_solve: operator not positive definite on the working subspace");
    double alpha = rz / pAp;
    for (std::size_t i = 0; i < n; ++i) out.x[i] += S(alpha) * p[i];
    if ((it + 1) % 64 == 0) {  // periodic true-residual refresh against drift
      A.apply(out.x, tmp);
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - tmp[i];
      project(r);
    } else {
      for (std::size_t i = 0; i < n; ++i) r[i] -= S(alpha) * Ap[i];
    }
    apply_precond(r, z);
    double rz_new = std::real(std::complex<double>(dot(r, z)));
    double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + S(beta) * p[i];
    rnorm = norm2(r);
  }
  if (rnorm <= tol * bnorm) {
    out.iterations = max_iter;
    out.relative_residual = rnorm / bnorm;
    return out;
  }
  throw SolverError("cg_solve: no convergence within iteration budget");
}

}  // namespace magstep
