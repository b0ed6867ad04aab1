#pragma once

// Dense Hermitian eigensolver: Householder reduction to real symmetric
// tridiagonal form (diagonal phase similarity), then bisection + inverse
// iteration.  Reference/oracle path and Rayleigh-Ritz kernel; O(n^3) with an
// enforced size cap.

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "magstep/core.hpp"
#include "magstep/tridiag.hpp"

namespace magstep {

/// Row-major dense Hermitian matrix.
struct DenseHermitian {
  std::size_t n = 0;
  std::vector<cplx> a;  // n*n

  explicit DenseHermitian(std::size_t n_ = 0) : n(n_), a(n_ * n_, cplx(0)) {}
  cplx& at(std::size_t i, std::size_t j) { return a[i * n + j]; }
  const cplx& at(std::size_t i, std::size_t j) const { return a[i * n + j]; }
  std::size_t size() const { return n; }

  void apply(const std::vector<cplx>& x, std::vector<cplx>& y) const {
    for (std::size_t i = 0; i < n; ++i) {
      cplx acc(0);
      const cplx* row = a.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
      y[i] = acc;
    }
  }
};

struct EigenPairZ {
  double value = 0.0;
  std::vector<cplx> vector;  // unit Euclidean norm
};

inline constexpr std::size_t kDenseEigMaxN = 2000;

/// k smallest eigenpairs of a dense Hermitian matrix (checked), n <= 2000.
inline std::vector<EigenPairZ> dense_hermitian_eigs(const DenseHermitian& A,
                                                    std::size_t k) {
  const std::size_t n = A.n;
  require(n >= 1 && n <= kDenseEigMaxN, "dense_hermitian_eigs: n out of range");
  require(k >= 1 && k <= n, "dense_hermitian_eigs: k out of range");
  require(A.a.size() == n * n, "dense_hermitian_eigs: storage size mismatch");
  double amax = 0.0, asym = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      amax = std::max(amax, std::abs(A.at(i, j)));
      asym = std::max(asym, std::abs(A.at(i, j) - std::conj(A.at(j, i))));
    }
  require(asym <= 1e-10 * std::max(amax, 1.0), "dense_hermitian_eigs: input not Hermitian");

  // Work copy; Q accumulates the Householder reflectors.
  std::vector<cplx> M = A.a;
  std::vector<cplx> Q(n * n, cplx(0));
  for (std::size_t i = 0; i < n; ++i) Q[i * n + i] = cplx(1);
  auto m = [&](std::size_t i, std::size_t j) -> cplx& { return M[i * n + j]; };

  std::vector<cplx> u(n), p(n), w(n);
  for (std::size_t j = 0; j + 2 < n; ++j) {
    // Householder vector for column j below the diagonal.
    double xnorm = 0.0;
    for (std::size_t i = j + 1; i < n; ++i) xnorm += std::norm(m(i, j));
    xnorm = std::sqrt(xnorm);
    if (xnorm <= 1e-300) continue;
    cplx x0 = m(j + 1, j);
    cplx phase = (std::abs(x0) > 0) ? x0 / std::abs(x0) : cplx(1);
    cplx alpha = -phase * xnorm;
    double unorm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) u[i] = cplx(0);
    for (std::size_t i = j + 1; i < n; ++i) u[i] = m(i, j);
    u[j + 1] -= alpha;
    for (std::size_t i = j + 1; i < n; ++i) unorm2 += std::norm(u[i]);
    if (unorm2 <= 1e-300) continue;
    double inv = 1.0 / std::sqrt(unorm2);
    for (std::size_t i = j + 1; i < n; ++i) u[i] *= inv;

    // Rank-2 Hermitian update of the trailing block: M <- M - u w^H - w u^H,
    // with p = 2 M u and w = p - (u^H p) u.
    for (std::size_t i = j; i < n; ++i) {
      cplx acc(0);
      for (std::size_t l = j + 1; l < n; ++l) acc += m(i, l) * u[l];
      p[i] = 2.0 * acc;
    }
    cplx up(0);
    for (std::size_t i = j + 1; i < n; ++i) up += std::conj(u[i]) * p[i];
    for (std::size_t i = j; i < n; ++i) w[i] = p[i] - up * u[i];
    for (std::size_t i = j; i < n; ++i)
      for (std::size_t l = j; l < n; ++l)
        m(i, l) -= u[i] * std::conj(w[l]) + w[i] * std::conj(u[l]);

    // Q <- Q (I - 2 u u^H).
    for (std::size_t r = 0; r < n; ++r) {
      cplx acc(0);
      cplx* qrow = Q.data() + r * n;
      for (std::size_t l = j + 1; l < n; ++l) acc += qrow[l] * u[l];
      acc *= 2.0;
      for (std::size_t l = j + 1; l < n; ++l) qrow[l] -= acc * std::conj(u[l]);
    }
  }

  // Diagonal phase similarity making the off-diagonal real non-negative.
  TriDiag T;
  T.diag.resize(n);
  T.offdiag.resize(n - 1);
  std::vector<cplx> d(n, cplx(1));
  for (std::size_t i = 0; i < n; ++i) T.diag[i] = m(i, i).real();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    cplx beta = m(i + 1, i);
    double ab = std::abs(beta);
    d[i + 1] = (ab > 0) ? d[i] * (beta / ab) : d[i];
    T.offdiag[i] = ab;
  }
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) Q[r * n + c] *= d[c];

  auto pairs = tridiag_smallest(T, k, 1e-14);
  std::vector<EigenPairZ> out(pairs.size());
  for (std::size_t e = 0; e < pairs.size(); ++e) {
    out[e].value = pairs[e].value;
    out[e].vector.assign(n, cplx(0));
    for (std::size_t r = 0; r < n; ++r) {
      cplx acc(0);
      const cplx* qrow = Q.data() + r * n;
      for (std::size_t c = 0; c < n; ++c) acc += qrow[c] * pairs[e].vector[c];
      out[e].vector[r] = acc;
    }
    double nrm = norm2(out[e].vector);
    scale(out[e].vector, cplx(1.0 / nrm));
  }
  return out;
}

/// Convenience wrapper for real symmetric input.
inline std::vector<EigenPairZ> dense_symmetric_eigs(const std::vector<double>& a,
                                                    std::size_t n, std::size_t k) {
  DenseHermitian A(n);
  for (std::size_t i = 0; i < n * n; ++i) A.a[i] = cplx(a[i], 0.0);
  return dense_hermitian_eigs(A, k);
}

}  // namespace magstep
