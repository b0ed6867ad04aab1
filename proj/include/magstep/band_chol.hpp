#pragma once

// Complex banded Cholesky factorization (L L^H) for Hermitian positive
// definite matrices with small bandwidth relative to n.  Used as the direct
// shift-invert kernel on coarse 2D grids; row-contiguous band storage keeps
// the inner dot products cache-friendly.

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "magstep/core.hpp"
#include "magstep/sparse.hpp"

namespace magstep {

class BandCholesky {
 public:
  /// Factor A - sigma*I.  Throws SolverError if the shifted matrix is not
  /// positive definite (callers back the shift off and retry) and
  /// ValidationError if A has entries outside the band.
  static BandCholesky factor(const SparseHermitian& A, double sigma, std::size_t bw) {
    BandCholesky C;
    C.n_ = A.n;
    C.bw_ = bw;
    const std::size_t w = bw + 1;
    C.f_.assign(A.n * w, cplx(0));
    // Row layout: f_[i*w + (i - c)] = L[i][c]; seed with the lower triangle.
    for (std::size_t i = 0; i < A.n; ++i)
      for (std::size_t p = A.rowptr[i]; p < A.rowptr[i + 1]; ++p) {
        std::size_t j = A.colind[p];
        if (j > i) continue;
        require(i - j <= bw, "BandCholesky: entry outside band");
        C.f_[i * w + (i - j)] = A.vals[p] - (i == j ? cplx(sigma) : cplx(0));
      }
    for (std::size_t j = 0; j < C.n_; ++j) {
      const std::size_t c0j = (j > bw) ? j - bw : 0;
      // Diagonal pivot.
      double d = C.f_[j * w].real();
      {
        const cplx* rowj = &C.f_[j * w];
        for (std::size_t c = c0j; c < j; ++c) d -= std::norm(rowj[j - c]);
      }
      if (!(d > 0.0)) throw SolverError("BandCholesky: matrix not positive definite");
      const double ljj = std::sqrt(d);
      C.f_[j * w] = cplx(ljj);
      const std::size_t imax = std::min(C.n_ - 1, j + bw);
      for (std::size_t i = j + 1; i <= imax; ++i) {
        const std::size_t c0 = std::max((i > bw) ? i - bw : 0, c0j);
        cplx s = C.f_[i * w + (i - j)];
        const cplx* rowi = &C.f_[i * w];
        const cplx* rowj = &C.f_[j * w];
        for (std::size_t c = c0; c < j; ++c) s -= rowi[i - c] * std::conj(rowj[j - c]);
        C.f_[i * w + (i - j)] = s / ljj;
      }
    }
    return C;
  }

  /// In-place solve of L L^H x = b.
  void solve(std::vector<cplx>& x) const {
    const std::size_t w = bw_ + 1;
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t c0 = (i > bw_) ? i - bw_ : 0;
      cplx s = x[i];
      const cplx* rowi = &f_[i * w];
      for (std::size_t c = c0; c < i; ++c) s -= rowi[i - c] * x[c];
      x[i] = s / rowi[0];
    }
    for (std::size_t i = n_; i-- > 0;) {
      const std::size_t jmax = std::min(n_ - 1, i + bw_);
      cplx s = x[i];
      for (std::size_t j = i + 1; j <= jmax; ++j)
        s -= std::conj(f_[j * w + (j - i)]) * x[j];
      x[i] = s / f_[i * w].real();
    }
  }

  std::size_t size() const { return n_; }

 private:
  std::size_t n_ = 0, bw_ = 0;
  std::vector<cplx> f_;
};

}  // namespace magstep
