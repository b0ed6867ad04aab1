#pragma once

// Shared small utilities: error types, deterministic RNG, vector kernels.

#include <cmath>
#include <complex>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace magstep {

using cplx = std::complex<double>;

/// Raised on malformed configuration or precondition violations (CLI exit 2).
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when an iterative solver fails to converge (CLI exit 3).
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

namespace detail {

inline double conj_mul(double a, double b) { return a * b; }
inline cplx conj_mul(cplx a, cplx b) { return std::conj(a) * b; }

}  // namespace detail

/// <x, y> with conjugation on the first argument for complex scalars.
template <class S>
S dot(const std::vector<S>& x, const std::vector<S>& y) {
  S acc{};
  for (std::size_t i = 0; i < x.size(); ++i) acc += detail::conj_mul(x[i], y[i]);
  return acc;
}

template <class S>
double norm2(const std::vector<S>& x) {
  double acc = 0.0;
  for (const auto& v : x) acc += std::norm(std::complex<double>(v));
  return std::sqrt(acc);
}

template <class S>
void axpy(S alpha, const std::vector<S>& x, std::vector<S>& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

template <class S>
void scale(std::vector<S>& x, S alpha) {
  for (auto& v : x) v *= alpha;
}

/// Deterministic standard-normal vector (fixed-seed mt19937_64).
inline std::vector<double> seeded_gaussian(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(gen);
  return v;
}

inline std::vector<cplx> seeded_gaussian_cplx(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<cplx> v(n);
  for (auto& x : v) x = cplx(dist(gen), dist(gen));
  return v;
}

/// Modified Gram-Schmidt: orthonormalize `v` against the columns in `basis`
/// (two passes for numerical safety), then normalize.  Returns false if `v`
/// became numerically zero (linearly dependent input).
template <class S>
bool mgs_orthonormalize(std::vector<S>& v, const std::vector<std::vector<S>>& basis) {
  const double initial = norm2(v);
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& b : basis) {
      S c = dot(b, v);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * b[i];
    }
  }
  const double nrm = norm2(v);
  if (nrm <= 1e-14 * (initial > 0 ? initial : 1.0)) return false;
  scale(v, S(1.0 / nrm));
  return true;
}

}  // namespace magstep
