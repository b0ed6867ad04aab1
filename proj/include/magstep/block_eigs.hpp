#pragma once

// Smallest eigenpairs of a Hermitian positive-definite operator by block
// inverse iteration: CG inner solves, Rayleigh-Ritz extraction, deflation of
// converged pairs, and an optional per-pair shifted refinement stage for
// tightly clustered spectra.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "magstep/cg.hpp"
#include "magstep/core.hpp"
#include "magstep/dense.hpp"

namespace magstep {

struct EigsOptions {
  double tol = 1e-8;            // residual tolerance relative to the norm bound
  std::size_t block = 0;        // subspace width; 0 -> k + 2
  std::size_t max_outer = 100;  // block-iteration sweeps
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
  double shift = 0.0;           // inverse-iteration shift (must stay below lambda_1)
  double norm_bound = 0.0;      // ||A|| bound; 0 -> power-iteration estimate
  std::size_t cg_max_iter = 0;  // 0 -> CG default
  bool polish = true;           // per-pair shifted refinement after the block stage
  std::vector<std::vector<cplx>> initial;  // warm-start subspace
  std::function<void(const std::vector<cplx>&, std::vector<cplx>&)> precond;
};

namespace detail {

template <class Op>
double power_norm_estimate(const Op& A, std::uint64_t seed) {
  const std::size_t n = A.size();
  std::vector<cplx> v = seeded_gaussian_cplx(n, seed), w(n);
  scale(v, cplx(1.0 / norm2(v)));
  double nrm = 1.0;
  for (int it = 0; it < 30; ++it) {
    A.apply(v, w);
    nrm = norm2(w);
    if (nrm == 0.0) return 1.0;
    v = w;
    scale(v, cplx(1.0 / nrm));
  }
  return 1.1 * nrm;  // slight inflation: power iteration approaches from below
}

}  // namespace detail

template <class Op>
std::vector<EigenPairZ> hermitian_smallest_eigs(const Op& A, std::size_t k,
                                                const EigsOptions& opts = {}) {
  const std::size_t n = A.size();
  require(k >= 1 && k <= n, "hermitian_smallest_eigs: k out of range");
  const std::size_t b = std::min<std::size_t>(n, opts.block ? opts.block : k + 2);
  require(b >= k, "hermitian_smallest_eigs: block smaller than k");
  const double anorm =
      opts.norm_bound > 0 ? opts.norm_bound : detail::power_norm_estimate(A, opts.seed);

  // Subspace initialization: caller-provided columns, padded with noise.
  std::vector<std::vector<cplx>> X;
  for (const auto& v0 : opts.initial) {
    if (X.size() == b) break;
    require(v0.size() == n, "hermitian_smallest_eigs: initial vector size mismatch");
    std::vector<cplx> v = v0;
    if (mgs_orthonormalize(v, X)) X.push_back(std::move(v));
  }
  for (std::size_t j = X.size(); j < b; ++j) {
    std::vector<cplx> v = seeded_gaussian_cplx(n, opts.seed + 17 * (j + 1));
    if (mgs_orthonormalize(v, X)) X.push_back(std::move(v));
  }
  require(X.size() == b, "hermitian_smallest_eigs: failed to build initial subspace");

  std::vector<double> theta(b, 0.0), resid(b, 1.0);
  std::vector<std::vector<cplx>> AX(b, std::vector<cplx>(n));
  std::vector<cplx> tmp(n);

  auto rayleigh_ritz = [&]() {
    for (std::size_t j = 0; j < b; ++j) A.apply(X[j], AX[j]);
    DenseHermitian H(b);
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t j = 0; j < b; ++j) H.at(i, j) = dot(X[i], AX[j]);
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t j = i; j < b; ++j) {
        cplx sym = 0.5 * (H.at(i, j) + std::conj(H.at(j, i)));
        H.at(i, j) = sym;
        H.at(j, i) = std::conj(sym);
      }
    auto small = dense_hermitian_eigs(H, b);
    std::vector<std::vector<cplx>> Xn(b, std::vector<cplx>(n, cplx(0)));
    std::vector<std::vector<cplx>> AXn(b, std::vector<cplx>(n, cplx(0)));
    for (std::size_t j = 0; j < b; ++j) {
      for (std::size_t i = 0; i < b; ++i) {
        cplx c = small[j].vector[i];
        axpy(c, X[i], Xn[j]);
        axpy(c, AX[i], AXn[j]);
      }
      theta[j] = small[j].value;
    }
    X.swap(Xn);
    AX.swap(AXn);
    for (std::size_t j = 0; j < b; ++j) {
      double rr = 0.0;
      for (std::size_t i = 0; i < n; ++i) rr += std::norm(AX[j][i] - theta[j] * X[j][i]);
      resid[j] = std::sqrt(rr);
    }
  };

  rayleigh_ritz();
  const double conv = opts.tol * anorm;

  for (std::size_t outer = 0; outer < opts.max_outer; ++outer) {
    bool done = true;
    for (std::size_t j = 0; j < k; ++j) done = done && resid[j] <= conv;
    if (done) break;

    double worst = 0.0;
    for (std::size_t j = 0; j < k; ++j) worst = std::max(worst, resid[j] / anorm);
    const double inner_tol = std::clamp(0.3 * worst, 1e-12, 1e-2);

    std::vector<std::vector<cplx>> Y;
    Y.reserve(b);
    for (std::size_t j = 0; j < b; ++j) {
      ShiftedOp<Op> As{A, opts.shift};
      CgOptions<cplx> copt;
      copt.max_iter = opts.cg_max_iter;
      copt.x0 = X[j];
      copt.precond = opts.precond;
      std::vector<cplx> y = cg_solve(As, X[j], inner_tol, {}, copt).x;
      if (!mgs_orthonormalize(y, Y)) {
        y = seeded_gaussian_cplx(n, opts.seed + 991 * outer + j);
        mgs_orthonormalize(y, Y);
      }
      Y.push_back(std::move(y));
    }
    X.swap(Y);
    rayleigh_ritz();
  }

  // Shifted per-pair refinement: resolves clusters the block stage cannot
  // separate (shift placed just below the target eigenvalue, deflating the
  // already-converged pairs keeps the CG operator positive definite).
  if (opts.polish) {
    std::vector<std::vector<cplx>> locked;
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<cplx> v = X[i];
      double th = theta[i];
      double rs = resid[i];
      double gap = (i + 1 < b) ? std::max(theta[i + 1] - th, 1e-14 * anorm) : 1e-3 * anorm;
      double margin = std::max({3.0 * rs, 1e-3 * gap, 1e-13 * anorm});
      for (int step = 0; step < 12 && rs > conv; ++step) {
        ShiftedOp<Op> As{A, th - margin};
        CgOptions<cplx> copt;
        copt.max_iter = opts.cg_max_iter;
        copt.x0 = v;
        copt.precond = opts.precond;
        try {
          std::vector<cplx> y = cg_solve(As, v, 1e-2, locked, copt).x;
          if (!mgs_orthonormalize(y, locked)) break;
          v = std::move(y);
        } catch (const SolverError&) {
          margin *= 10.0;  // shift crossed the eigenvalue: back off
          continue;
        }
        A.apply(v, tmp);
        th = std::real(std::complex<double>(dot(v, tmp)));
        double rr = 0.0;
        for (std::size_t p = 0; p < n; ++p) rr += std::norm(tmp[p] - th * v[p]);
        rs = std::sqrt(rr);
        margin = std::max({3.0 * rs, 1e-3 * gap, 1e-13 * anorm});
      }
      theta[i] = th;
      resid[i] = rs;
      X[i] = v;
      locked.push_back(X[i]);
    }
  }

  std::vector<EigenPairZ> out(k);
  std::vector<std::size_t> order(k);
  for (std::size_t i = 0; i < k; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t c) { return theta[a] < theta[c]; });
  for (std::size_t i = 0; i < k; ++i) {
    out[i].value = theta[order[i]];
    out[i].vector = X[order[i]];
  }
  return out;
}

}  // namespace magstep
