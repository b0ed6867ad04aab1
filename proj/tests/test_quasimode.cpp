// Quasi-mode hierarchy on the model half-plane: harmonic-oscillator factors,
// separable projections, hierarchy residuals, and the truncated-operator
// residual of the assembled trial state.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "magstep/grid.hpp"
#include "magstep/invariants.hpp"
#include "magstep/oscillator.hpp"
#include "magstep/quasimode.hpp"
#include "fixture_values.hpp"

using namespace magstep;

namespace {

const Grid1D kFine(20.0, 4001);

const SpectralInvariants& inv05() {
    static const SpectralInvariants v = compute_invariants(-0.5, kFine);
    return v;
}

const QuasiModeExpansion& exp1() {
    static const QuasiModeExpansion e = build_expansion(
        inv05(), 1.0, -0.5, 1, default_sigma_grid(inv05(), -0.5));
    return e;
}

}  // namespace

TEST_CASE("harmonic oscillator: closed form versus discretization") {
    HarmonicOscParams p{0.7, 0.3};
    REQUIRE(p.s0() == Catch::Approx(std::pow(0.7 / 0.3, 0.25)));
    const Grid1D g(18.0, 4001);
    for (std::size_t n : {std::size_t(1), std::size_t(2), std::size_t(3)}) {
        const double exact = (2.0 * double(n) - 1.0) * std::sqrt(0.7 * 0.3);
        REQUIRE(harm_energy(n, p) == Catch::Approx(exact));
        REQUIRE(std::abs(harm_discrete_energy(n, p, g) - exact) < 1e-5);
    }
    REQUIRE_THROWS_AS(harm_energy(0, p), ValidationError);
    REQUIRE_THROWS_AS((HarmonicOscParams{-1.0, 0.5}).validate(),
                      ValidationError);
}

TEST_CASE("analytic oscillator modes satisfy their differential equation") {
    HarmonicOscParams p{0.5, 0.125};
    const Grid1D g(16.0 * p.s0(), 2001);
    for (std::size_t n : {std::size_t(1), std::size_t(2)}) {
        HarmOscMode m = harm_eigenpair(n, p, g);
        // normalization
        std::vector<double> sq(m.f.size());
        for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = m.f[i] * m.f[i];
        REQUIRE(trapezoid(sq, g.step()) == Catch::Approx(1.0).margin(1e-10));
        // -c2 f'' + K s^2 f = E f pointwise (analytic derivatives)
        double worst = 0.0;
        for (std::size_t i = 0; i < g.n_points; ++i) {
            const double s = g.node(i);
            const double r =
                -p.c2 * m.d2f[i] + p.K * s * s * m.f[i] - m.energy * m.f[i];
            worst = std::max(worst, std::abs(r));
        }
        REQUIRE(worst < 1e-10);
    }
}

TEST_CASE("expansion validates its inputs") {
    const SpectralInvariants& inv = inv05();
    const Grid1D sg = default_sigma_grid(inv, -0.5);
    REQUIRE_THROWS_AS(build_expansion(inv, 1.0, -0.5, 0, sg), ValidationError);
    REQUIRE_THROWS_AS(build_expansion(inv, -1.0, -0.5, 1, sg), ValidationError);
    REQUIRE_THROWS_AS(build_expansion(inv, 1.0, 0.5, 1, sg), ValidationError);
    REQUIRE_THROWS_AS(default_sigma_grid(inv, 0.5), ValidationError);
}

TEST_CASE("expansion coefficients reproduce the invariant combinations") {
    const SpectralInvariants& inv = inv05();
    const QuasiModeExpansion& e = exp1();
    REQUIRE(e.mu[0] == 0.0);
    REQUIRE(e.mu[1] == 0.0);
    REQUIRE(std::abs(e.mu[2] - inv.M3) < 1e-14);
    const double mu3 = std::sqrt(-0.5 * inv.M3 * inv.c2 * 0.5);
    REQUIRE(std::abs(e.mu[3] - mu3) < 1e-4 * mu3);
    // discrete pairings stay close to the invariant values
    REQUIRE(std::abs(e.I2_disc - inv.I2) < 1e-6);
    REQUIRE(std::abs(e.c2_disc - inv.c2) < 1e-5);

    // mode ladder: the n-th coefficient scales like 2n - 1
    QuasiModeExpansion e2 =
        build_expansion(inv, 1.0, -0.5, 2, default_sigma_grid(inv, -0.5));
    REQUIRE(e2.mu[3] / e.mu[3] == Catch::Approx(3.0).margin(1e-10));
}

TEST_CASE("hierarchy equations close to quadrature accuracy") {
    HierarchyResiduals r = hierarchy_residuals(exp1());
    REQUIRE(r.e0 < 1e-5);
    REQUIRE(r.e1 < 1e-5);
    REQUIRE(r.e2 < 1e-5);
    REQUIRE(expansion_solvability_residual(exp1()) < 1e-5);
}

TEST_CASE("separable projections act as expected on product states") {
    const SpectralInvariants& inv = inv05();
    const QuasiModeExpansion& e = exp1();

    // v = phi (x) f : the rank-one projection leaves it untouched
    GridFunction2D v(e.sigma_grid, e.tau_grid);
    add_separable(v, cplx(1.0, 0.0), e.f, inv.phi_a);
    Pi0Result p = project_pi0(v, inv);
    REQUIRE(p.defect < 1e-10 * p.norm_v);

    // the effective pairing maps it to (1 - 4 I2) f
    std::vector<cplx> r = project_Rnew(v, inv);
    double worst = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) {
        worst = std::max(worst,
                         std::abs(r[j] - cplx((1.0 - 4.0 * inv.I2) * e.f[j], 0.0)));
    }
    REQUIRE(worst < 1e-5);

    // a state orthogonal to phi in tau projects to zero
    std::vector<double> perp(inv.phi_a.size());
    for (std::size_t k = 0; k < perp.size(); ++k) {
        perp[k] = kFine.node(k) * inv.phi_a[k];
    }
    double pair = 0.0;
    for (std::size_t k = 0; k < perp.size(); ++k) pair += perp[k] * inv.phi_a[k];
    pair *= kFine.step();
    for (std::size_t k = 0; k < perp.size(); ++k) perp[k] -= pair * inv.phi_a[k];
    GridFunction2D w(e.sigma_grid, e.tau_grid);
    add_separable(w, cplx(1.0, 0.0), e.f, perp);
    Pi0Result q = project_pi0(w, inv);
    REQUIRE(flat_norm(q.projected) < 1e-10 * q.norm_v);
}

TEST_CASE("flat norm of a separable state factorizes") {
    const QuasiModeExpansion& e = exp1();
    GridFunction2D v(e.sigma_grid, e.tau_grid);
    add_separable(v, cplx(2.0, 0.0), e.f, inv05().phi_a);
    // both factors are unit-normalized up to quadrature error
    REQUIRE(flat_norm(v) == Catch::Approx(2.0).margin(1e-6));
}

TEST_CASE("trial state has unit leading norm") {
    const double n = flat_norm(trial_state(exp1(), 1e-3));
    REQUIRE(std::abs(n - 1.0) < 0.1);
    REQUIRE_THROWS_AS(trial_state(exp1(), 2.0), ValidationError);
}

TEST_CASE("truncated-operator residual shrinks with h at the expected rate") {
    const SpectralInvariants& inv = inv05();
    const QuasiModeExpansion& e = exp1();
    std::vector<double> hs = {1e-2, 3e-3, 1e-3};
    std::vector<double> res;
    for (double h : hs) {
        PnewResidual r = apply_Pnew_truncated_report(h, e, inv, {});
        REQUIRE(r.norm_psi > 0.5);
        REQUIRE(r.weighted < 2.0 * r.flat + 1e-12);
        res.push_back(r.flat);
    }
    REQUIRE(res[0] > res[1]);
    REQUIRE(res[1] > res[2]);
    const double slope = std::log(res[0] / res[2]) / std::log(hs[0] / hs[2]);
    REQUIRE(slope >= 0.75);
    REQUIRE(slope <= 1.0);
}

TEST_CASE("residual is sensitive to a deliberate eigenvalue shift") {
    const SpectralInvariants& inv = inv05();
    const QuasiModeExpansion& e = exp1();
    const double h = 1e-2;
    PnewOptions shifted;
    shifted.mu3_shift = 1e-2;
    const double base = apply_Pnew_truncated_report(h, e, inv, {}).flat;
    const double moved = apply_Pnew_truncated_report(h, e, inv, shifted).flat;
    REQUIRE(moved > 5.0 * base);
}

TEST_CASE("refined projection stays near the rank-one projection") {
    const SpectralInvariants& inv = inv05();
    const QuasiModeExpansion& e = exp1();
    GridFunction2D v(e.sigma_grid, e.tau_grid);
    add_separable(v, cplx(1.0, 0.0), e.f, inv.phi_a);
    const double h = 1e-4;
    GridFunction2D ph = project_pi_h(v, inv, 1.0, h, 1.0 / 16.0);
    REQUIRE(flat_distance(ph, v) < 0.1);
}
