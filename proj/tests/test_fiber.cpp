// Fiber band function: eigenvalues against frozen references, minimizer
// location, derivative formulas, grid convergence, and the half-line Neumann
// cross-check of the a = -1 limit.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "magstep/fiber.hpp"
#include "magstep/grid.hpp"
#include "magstep/invariants.hpp"
#include "fixture_values.hpp"

using namespace magstep;

namespace {
const Grid1D kFine(20.0, 4001);
}

TEST_CASE("FiberParams validation enforces the field-ratio range") {
    REQUIRE_NOTHROW((FiberParams{-0.5, 0.7}).validate());
    REQUIRE_NOTHROW((FiberParams{-1.0, 0.0}).validate());
    REQUIRE_THROWS_AS((FiberParams{0.0, 0.0}).validate(), ValidationError);
    REQUIRE_THROWS_AS((FiberParams{1.0, 0.0}).validate(), ValidationError);
    REQUIRE_THROWS_AS((FiberParams{-1.5, 0.0}).validate(), ValidationError);
}

TEST_CASE("band_value matches the frozen reference at a=-0.5, xi=-0.8") {
    REQUIRE(std::abs(band_value(FiberParams{-0.5, -0.8}, kFine) -
                     fixtures::a05_mu_xi08) < 1e-10);
    REQUIRE(std::abs(band_value(FiberParams{-0.5, -0.8}, Grid1D(20.0, 1001)) -
                     fixtures::a05_mu_xi08_n1001) < 1e-10);
    REQUIRE(std::abs(band_value(FiberParams{-0.5, -0.8}, Grid1D(20.0, 2001)) -
                     fixtures::a05_mu_xi08_n2001) < 1e-10);
}

TEST_CASE("band_value converges at second order under grid doubling") {
    const FiberParams p{-0.5, -0.8};
    const double v1 = band_value(p, Grid1D(20.0, 1001));
    const double v2 = band_value(p, Grid1D(20.0, 2001));
    const double v4 = band_value(p, Grid1D(20.0, 4001));
    const double factor = (v1 - v2) / (v2 - v4);
    REQUIRE(factor > 3.5);
    REQUIRE(factor < 4.5);
}

TEST_CASE("band eigenpair is normalized, positive, and decays at the ends") {
    BandPoint bp = band_eigenpair(FiberParams{-0.5, -0.8}, kFine);
    std::vector<double> sq(bp.phi.size());
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = bp.phi[i] * bp.phi[i];
    REQUIRE(trapezoid(sq, kFine.step()) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(bp.phi[kFine.center_index()] > 0.0);
    REQUIRE(bp.phi.front() == 0.0);
    REQUIRE(bp.phi.back() == 0.0);
    double tail = 0.0;
    for (std::size_t i = 0; i < sq.size(); ++i) {
        if (std::abs(kFine.node(i)) >= 15.0) tail = std::max(tail, std::abs(bp.phi[i]));
    }
    REQUIRE(tail < 1e-12);
}

TEST_CASE("the two derivative formulas agree and match the reference") {
    const FiberParams p{-0.5, -0.8};
    BandPoint bp = band_eigenpair(p, kFine);
    const double fh = band_derivative_fh(bp, p, kFine);
    const double bd = band_derivative_boundary(bp, p, kFine);
    REQUIRE(std::abs(fh - fixtures::a05_muprime_xi08) < 1e-9);
    REQUIRE(std::abs(fh - bd) < 1e-5);
    REQUIRE(std::abs(bp.mu_prime - fh) < 1e-14);
}

TEST_CASE("find_zeta locates the frozen band minimum for a=-0.5") {
    ZetaResult z = find_zeta(-0.5, kFine);
    REQUIRE(std::abs(z.beta - fixtures::a05_beta) < 1e-9);
    REQUIRE(std::abs(z.zeta - fixtures::a05_zeta) < 1e-6);
    BandPoint bp = band_eigenpair(FiberParams{-0.5, z.zeta}, kFine);
    REQUIRE(std::abs(band_derivative_fh(bp, FiberParams{-0.5, z.zeta}, kFine)) <
            1e-8);
}

TEST_CASE("find_zeta matches the frozen minima for a=-0.9 and a=-0.1") {
    ZetaResult z9 = find_zeta(-0.9, kFine);
    REQUIRE(std::abs(z9.beta - fixtures::a09_beta) < 1e-9);
    REQUIRE(std::abs(z9.zeta - fixtures::a09_zeta) < 1e-6);
    ZetaResult z1 = find_zeta(-0.1, kFine);
    REQUIRE(std::abs(z1.beta - fixtures::a01_beta) < 1e-9);
    REQUIRE(std::abs(z1.zeta - fixtures::a01_zeta) < 1e-6);
}

TEST_CASE("a=-1 minimizer sits at minus the square root of the minimum") {
    ZetaResult z = find_zeta(-1.0, kFine);
    REQUIRE(std::abs(z.beta - fixtures::a10_beta) < 1e-9);
    REQUIRE(std::abs(z.zeta + std::sqrt(z.beta)) < 1e-4);
}

TEST_CASE("band minimum obeys the two-sided bounds for several ratios") {
    ZetaResult theta = find_zeta(-1.0, kFine);
    for (double a : {-0.9, -0.5, -0.1}) {
        ZetaResult z = find_zeta(a, kFine);
        REQUIRE(z.beta > std::abs(a) * theta.beta);
        REQUIRE(z.beta < std::min(std::abs(a), theta.beta));
    }
}

TEST_CASE("coarse sweep plus parabolic refinement brackets the minimizer") {
    const Grid1D g(20.0, 1001);
    auto sweep = band_sweep(-0.5, -1.5, -0.1, 57, g);
    auto [xi_min, mu_min] = sweep_parabolic_min(sweep);
    REQUIRE(std::abs(xi_min - fixtures::a05_zeta) < 5e-3);
    REQUIRE(std::abs(mu_min - fixtures::a05_beta) < 1e-3);
    REQUIRE_THROWS_AS(band_sweep(-0.5, -1.0, -1.0, 5, g), ValidationError);
}

TEST_CASE("half-line Neumann minimum reproduces the a=-1 band minimum") {
    HalfLineMinimum m = neumann_half_line_minimum();
    REQUIRE(std::abs(m.theta - 0.5901) < 1e-3);
    REQUIRE(std::abs(m.xi_min + std::sqrt(m.theta)) < 1e-3);
    // symmetrized full-line value at a=-1 agrees with the half-line oracle
    ZetaResult z = find_zeta(-1.0, kFine);
    const double fine = z.beta;
    const double coarse = find_zeta(-1.0, kFine.coarsened()).beta;
    const double extrapolated = richardson_pair(fine, coarse);
    REQUIRE(std::abs(extrapolated - m.theta) < 1e-4);
    REQUIRE(std::abs(extrapolated - 0.5901) < 1e-3);
}
