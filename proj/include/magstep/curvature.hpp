#pragma once

// Boundary curvature profiles for the curved-edge model, plus the rectangle
// of tubular (Frenet) coordinates on which the 2D operator is discretized.
//
// A profile k(s) describes the signed curvature of the boundary as a function
// of arc length.  The model assumptions are:
//   * k attains its maximum k_max > 0 at s = 0, and nowhere else,
//   * the maximum is non-degenerate with k''(0) = k2 < 0,
//   * k decays (or at least stays below k_max) away from s = 0.
// A "flat" profile (k identically zero) is also provided for straight-edge
// and uniform-field reference runs; it is exempt from the bump assumptions.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "magstep/core.hpp"

namespace magstep {

enum class CurvatureKind {
    gaussian_bump, // k(s) = k_max * exp(-(|k2| / (2 k_max)) s^2)
    cosine_bump,   // k(s) = k_max (1 + cos(w s))/2 on |s| <= pi/w, else 0
    flat,          // k(s) = 0 (requires k_max = k2 = 0)
};

inline std::string curvature_kind_name(CurvatureKind kind) {
    switch (kind) {
        case CurvatureKind::gaussian_bump: return "gaussian_bump";
        case CurvatureKind::cosine_bump: return "cosine_bump";
        case CurvatureKind::flat: return "flat";
    }
    return "unknown";
}

struct CurvatureProfile {
    CurvatureKind kind = CurvatureKind::gaussian_bump;
    double k_max = 1.0;  // peak curvature, attained at s = 0
    double k2 = -0.5;    // second derivative of k at the peak (< 0 for bumps)

    // Frequency of the cosine bump: k''(0) = -k_max w^2 / 2 = k2.
    double cosine_frequency() const { return std::sqrt(-2.0 * k2 / k_max); }

    double k(double s) const {
        switch (kind) {
            case CurvatureKind::gaussian_bump: {
                const double alpha = -k2 / (2.0 * k_max);
                return k_max * std::exp(-alpha * s * s);
            }
            case CurvatureKind::cosine_bump: {
                const double w = cosine_frequency();
                if (std::abs(s) >= std::numbers::pi / w) return 0.0;
                return 0.5 * k_max * (1.0 + std::cos(w * s));
            }
            case CurvatureKind::flat: return 0.0;
        }
        return 0.0;
    }

    // Validates the bump assumptions numerically:
    //   * k(0) = k_max exactly,
    //   * the centered five-point second difference at 0 reproduces k2 to
    //     1e-8 absolute (step 1e-2; the stencil truncation error is O(d^4)),
    //   * k(s) < k_max at a spread of nonzero sample points.
    // The flat profile instead requires k_max = k2 = 0.
    void validate() const {
        if (kind == CurvatureKind::flat) {
            require(k_max == 0.0 && k2 == 0.0,
                    "flat curvature profile requires k_max = 0 and k2 = 0");
            return;
        }
        require(std::isfinite(k_max) && k_max > 0.0,
                "curvature profile requires k_max > 0");
        require(std::isfinite(k2) && k2 < 0.0,
                "curvature profile requires k2 < 0");

        require(k(0.0) == k_max, "curvature profile must attain k_max at s = 0");

        const double d = 1e-2;
        const double second =
            (-k(2.0 * d) + 16.0 * k(d) - 30.0 * k(0.0) + 16.0 * k(-d) - k(-2.0 * d)) /
            (12.0 * d * d);
        require(std::abs(second - k2) <= 1e-8,
                "curvature profile second difference at 0 disagrees with k2 "
                "(measured " + std::to_string(second) + ", declared " +
                std::to_string(k2) + ")");

        for (const double s : {0.05, 0.25, 1.0, 2.5, 7.0}) {
            require(k(s) < k_max && k(-s) < k_max,
                    "curvature profile must be strictly below k_max away from 0");
        }
    }
};

// Tubular-coordinate rectangle (-S, S) x (-T, T).  The tangential coordinate
// s runs along the boundary, the normal coordinate t into the domain's
// two-sided collar.  Grids are uniform with n_s x n_t nodes including the
// boundary nodes; odd counts guarantee that (s, t) = (0, 0) -- the curvature
// maximum on the edge -- is a grid node.
struct EdgeDomain {
    double S = 4.0;
    double T = 0.45;
    std::size_t n_s = 241;
    std::size_t n_t = 241;
    bool periodic_s = false; // identify s = -S with s = +S instead of Dirichlet

    double ds() const { return 2.0 * S / static_cast<double>(n_s - 1); }
    double dt() const { return 2.0 * T / static_cast<double>(n_t - 1); }
    double node_s(std::size_t j) const { return -S + static_cast<double>(j) * ds(); }
    double node_t(std::size_t k) const { return -T + static_cast<double>(k) * dt(); }

    void validate(const CurvatureProfile& profile) const {
        require(std::isfinite(S) && S > 0.0, "edge domain requires S > 0");
        require(std::isfinite(T) && T > 0.0, "edge domain requires T > 0");
        require(n_s >= 5 && n_t >= 5, "edge domain grids need at least 5 nodes");
        require(n_s % 2 == 1 && n_t % 2 == 1,
                "edge domain grids must have odd node counts so (0,0) is a node");
        // The coordinate map is a diffeomorphism only while the Jacobian
        // 1 - t k(s) stays positive; insist on a uniform factor-2 margin.
        require(1.0 - T * profile.k_max >= 0.5,
                "edge domain requires 1 - T * k_max >= 1/2 (tubular coordinates "
                "degenerate otherwise)");
    }
};

} // namespace magstep
