#pragma once

// Compressed-sparse-row Hermitian matrix (complex entries).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <tuple>
#include <vector>

#include "magstep/core.hpp"

namespace magstep {

struct SparseHermitian {
  std::size_t n = 0;
  std::vector<std::size_t> rowptr;  // n+1
  std::vector<std::size_t> colind;  // nnz, sorted within each row
  std::vector<cplx> vals;           // nnz

  std::size_t size() const { return n; }

  void apply(const std::vector<cplx>& x, std::vector<cplx>& y) const {
    for (std::size_t i = 0; i < n; ++i) {
      cplx acc(0);
      for (std::size_t p = rowptr[i]; p < rowptr[i + 1]; ++p)
        acc += vals[p] * x[colind[p]];
      y[i] = acc;
    }
  }

  /// Max row sum of absolute values: a cheap upper bound for the 2-norm.
  double norm_bound() const {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t p = rowptr[i]; p < rowptr[i + 1]; ++p) acc += std::abs(vals[p]);
      m = std::max(m, acc);
    }
    return m;
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t p = rowptr[i]; p < rowptr[i + 1]; ++p)
        if (colind[p] == i) d[i] = vals[p].real();
    return d;
  }

  cplx entry(std::size_t i, std::size_t j) const {
    auto b = colind.begin() + static_cast<std::ptrdiff_t>(rowptr[i]);
    auto e = colind.begin() + static_cast<std::ptrdiff_t>(rowptr[i + 1]);
    auto it = std::lower_bound(b, e, j);
    if (it == e || *it != j) return cplx(0);
    return vals[static_cast<std::size_t>(it - colind.begin())];
  }
};

/// Assemble from (row, col, value) triplets; duplicates are summed.  With
/// `check` set, verifies A = A* entrywise to a relative tolerance.
inline SparseHermitian sparse_from_triplets(
    std::size_t n, std::vector<std::tuple<std::size_t, std::size_t, cplx>> trip,
    bool check = true) {
  SparseHermitian A;
  A.n = n;
  std::sort(trip.begin(), trip.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) <
           std::tie(std::get<0>(b), std::get<1>(b));
  });
  A.rowptr.assign(n + 1, 0);
  for (std::size_t p = 0; p < trip.size();) {
    std::size_t q = p + 1;
    cplx acc = std::get<2>(trip[p]);
    while (q < trip.size() && std::get<0>(trip[q]) == std::get<0>(trip[p]) &&
           std::get<1>(trip[q]) == std::get<1>(trip[p])) {
      acc += std::get<2>(trip[q]);
      ++q;
    }
    A.colind.push_back(std::get<1>(trip[p]));
    A.vals.push_back(acc);
    ++A.rowptr[std::get<0>(trip[p]) + 1];
    p = q;
  }
  for (std::size_t i = 0; i < n; ++i) A.rowptr[i + 1] += A.rowptr[i];

  if (check) {
    double amax = 0.0;
    for (const auto& v : A.vals) amax = std::max(amax, std::abs(v));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t p = A.rowptr[i]; p < A.rowptr[i + 1]; ++p) {
        cplx mirror = A.entry(A.colind[p], i);
        require(std::abs(A.vals[p] - std::conj(mirror)) <= 1e-12 * std::max(amax, 1.0),
                "sparse_from_triplets: matrix is not Hermitian");
      }
  }
  return A;
}

}  // namespace magstep
