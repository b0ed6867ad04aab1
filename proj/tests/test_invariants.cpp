// Spectral invariants of the band minimum: frozen-reference comparisons,
// moment identities, the deflated resolvent, the first-order corrector, and
// the weighted one-dimensional model.
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

// computed once and shared across test cases (about a quarter second)
const SpectralInvariants& inv05() {
    static const SpectralInvariants v = compute_invariants(-0.5, kFine);
    return v;
}

double weighted_norm2(const std::vector<double>& v, double step) {
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = v[i] * v[i];
    return std::sqrt(trapezoid(sq, step));
}

}  // namespace

TEST_CASE("invariants at a=-0.5 match the frozen references") {
    const SpectralInvariants& inv = inv05();

    // band minimum and ground-state traces (fine grid)
    REQUIRE(std::abs(inv.beta_a - fixtures::a05_beta) < 1e-9);
    REQUIRE(std::abs(inv.zeta_a - fixtures::a05_zeta) < 1e-6);
    REQUIRE(std::abs(inv.phi0 - fixtures::a05_phi0) < 1e-7);
    REQUIRE(std::abs(inv.dphi0 - fixtures::a05_dphi0) < 1e-7);

    // fine-grid quadrature moments
    REQUIRE(std::abs(inv.M1_raw - fixtures::a05_M1) < 1e-9);
    REQUIRE(std::abs(inv.M2_raw - fixtures::a05_M2) < 1e-9);
    REQUIRE(std::abs(inv.M3_raw - fixtures::a05_M3) < 1e-9);
    REQUIRE(std::abs(inv.M2_closed - fixtures::a05_M2_closed) < 1e-9);
    REQUIRE(std::abs(inv.M3_closed - fixtures::a05_M3_closed) < 1e-9);

    // grid-extrapolated values
    REQUIRE(std::abs(inv.beta_ext - fixtures::a05_beta_rich) < 1e-9);
    REQUIRE(std::abs(inv.zeta_ext - fixtures::a05_zeta_rich) < 1e-5);
    REQUIRE(std::abs(inv.M1 - fixtures::a05_M1_rich) < 1e-8);
    REQUIRE(std::abs(inv.M2 - fixtures::a05_M2_rich) < 1e-8);
    REQUIRE(std::abs(inv.M3 - fixtures::a05_M3_rich) < 1e-8);
    REQUIRE(std::abs(inv.M2_closed_ext - fixtures::a05_M2_closed_rich) < 1e-8);
    REQUIRE(std::abs(inv.M3_closed_ext - fixtures::a05_M3_closed_rich) < 1e-8);
    REQUIRE(std::abs(inv.int_binv - fixtures::a05_int_binv_rich) < 1e-7);

    // resolvent moment and band curvature
    REQUIRE(std::abs(inv.I2 - fixtures::a05_I2) < 1e-7);
    REQUIRE(std::abs(inv.c2 - fixtures::a05_c2) < 1e-6);
    REQUIRE(std::abs(inv.c2 - (1.0 - 4.0 * inv.I2)) < 1e-14);
    REQUIRE(std::abs(inv.mu_second - fixtures::a05_mu_second) < 1e-7);
    REQUIRE(inv.mu_second > 0.0);
    REQUIRE(std::abs(inv.mu_second - 2.0 * (1.0 - 4.0 * inv.I2)) < 2e-3);
}

TEST_CASE("first moment vanishes after extrapolation; identities close") {
    const SpectralInvariants& inv = inv05();
    REQUIRE(std::abs(inv.M1) < 1e-6);
    REQUIRE(inv.M3 < 0.0);

    RawInvariants r = raw_invariants(-0.5, kFine);
    MomentIdentityReport rep = moment_identities(r);
    REQUIRE(rep.max_core() < 1e-4);
    REQUIRE(rep.orthogonality < 1e-5);
    REQUIRE(rep.closed_m2 < 1e-5);
    REQUIRE(rep.closed_m3 < 1e-5);

    // moment helper agrees with the recorded raw values
    REQUIRE(std::abs(moment(1, r) - inv.M1_raw) < 1e-12);
    REQUIRE(std::abs(moment(2, r) - inv.M2_raw) < 1e-12);
    REQUIRE(std::abs(moment(3, r) - inv.M3_raw) < 1e-12);
}

TEST_CASE("third moment vanishes in the symmetric case a=-1") {
    const double fine = raw_invariants(-1.0, kFine).M3;
    const double coarse = raw_invariants(-1.0, kFine.coarsened()).M3;
    REQUIRE(std::abs(richardson_pair(fine, coarse)) < 1e-6);
}

TEST_CASE("ground state leaves the edge with negative slope for a in (-1,0)") {
    for (double a : {-0.9, -0.5, -0.1}) {
        RawInvariants r = raw_invariants(a, Grid1D(20.0, 2001));
        REQUIRE(r.dphi0 < 0.0);
    }
}

TEST_CASE("minimizer identity ties zeta to the boundary trace") {
    for (double a : {-0.9, -0.5}) {
        RawInvariants r = raw_invariants(a, kFine);
        const double ratio = r.dphi0 / r.phi0;
        REQUIRE(std::abs(-r.zeta - std::sqrt(r.beta + ratio * ratio)) < 1e-3);
    }
}

TEST_CASE("deflated resolvent annihilates the ground state") {
    const SpectralInvariants& inv = inv05();
    FiberResolvent R(-0.5, inv.zeta_a, inv.beta_a, inv.phi_a, kFine);
    std::vector<double> v = R.apply(inv.phi_a);
    REQUIRE(weighted_norm2(v, kFine.step()) < 1e-10);
}

TEST_CASE("resolvent image is orthogonal, accurate, and decays") {
    const SpectralInvariants& inv = inv05();
    FiberResolvent R(-0.5, inv.zeta_a, inv.beta_a, inv.phi_a, kFine);

    std::vector<double> u(kFine.n_points);
    for (std::size_t i = 0; i < kFine.n_points; ++i) {
        const double tau = kFine.node(i);
        u[i] = (inv.zeta_a + b_weight(tau, -0.5) * tau) * inv.phi_a[i];
    }
    std::vector<double> v = R.apply(u);

    // orthogonality to the ground state in the step-sum inner product
    double pair = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) pair += v[i] * inv.phi_a[i];
    pair *= kFine.step();
    REQUIRE(std::abs(pair) < 1e-12);

    // defining equation: (op - beta) v = u - <u, phi> phi on interior nodes
    double up = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) up += u[i] * inv.phi_a[i];
    up *= kFine.step();
    std::vector<double> lhs = R.apply_shifted_forward(v);
    std::vector<double> res(v.size(), 0.0);
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        res[i] = lhs[i] - (u[i] - up * inv.phi_a[i]);
    }
    REQUIRE(weighted_norm2(res, kFine.step()) <
            1e-8 * weighted_norm2(u, kFine.step()));

    // exponential decay away from the edge
    double far = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        peak = std::max(peak, std::abs(v[i]));
        if (std::abs(kFine.node(i)) >= 10.0) far = std::max(far, std::abs(v[i]));
    }
    REQUIRE(far < 1e-6 * peak);
}

TEST_CASE("corrector is orthogonal, admissible, and solves its equation") {
    const SpectralInvariants& inv = inv05();
    const double dt = kFine.step();

    // orthogonality to the ground state
    double pair = 0.0;
    for (std::size_t i = 0; i < inv.phi_cor.size(); ++i)
        pair += inv.phi_cor[i] * inv.phi_a[i];
    pair *= dt;
    REQUIRE(std::abs(pair) < 1e-10);

    // right-hand side (d/dtau + W) phi - M3_weak phi
    std::vector<double> W = h1_weight(-0.5, inv.zeta_a, kFine);
    std::vector<double> rhs = h1_apply(W, inv.phi_a, kFine);
    for (std::size_t i = 0; i < rhs.size(); ++i)
        rhs[i] -= inv.M3_weak * inv.phi_a[i];

    // admissibility: the shifted right-hand side pairs to zero with phi
    double adm = 0.0;
    for (std::size_t i = 0; i < rhs.size(); ++i) adm += rhs[i] * inv.phi_a[i];
    adm *= dt;
    REQUIRE(std::abs(adm) < 1e-5);
    REQUIRE(std::abs(inv.M3_weak - inv.M3) < 1e-3);

    // corrector equation: (op - beta) phi_cor + rhs = 0 on interior nodes
    FiberResolvent R(-0.5, inv.zeta_a, inv.beta_a, inv.phi_a, kFine);
    std::vector<double> lhs = R.apply_shifted_forward(inv.phi_cor);
    std::vector<double> res(lhs.size(), 0.0);
    for (std::size_t i = 1; i + 1 < lhs.size(); ++i) res[i] = lhs[i] + rhs[i];
    REQUIRE(weighted_norm2(res, dt) < 1e-7);
}

TEST_CASE("weighted model collapses to the fiber when the weight is off") {
    const SpectralInvariants& inv = inv05();
    WeightedModelParams p{-0.5, inv.zeta_a, 0.0, 1e-4};
    WeightedResult r = weighted_op_lambda1(p, kFine);
    REQUIRE(std::abs(r.lambda1 - inv.beta_a) < 1e-6 * inv.beta_a);
    REQUIRE(std::abs(r.lambda1 - r.beta_ref) < 1e-12);
}

TEST_CASE("weighted model matches the frozen references at h=1e-4") {
    WeightedModelParams plus{-0.5, fixtures::a05_zeta, 1.0, 1e-4};
    WeightedModelParams minus{-0.5, fixtures::a05_zeta, -1.0, 1e-4};
    const double lp = weighted_op_lambda1(plus, kFine).lambda1;
    const double lm = weighted_op_lambda1(minus, kFine).lambda1;
    REQUIRE(std::abs(lp - fixtures::a05_weighted_l1_kp1_h1em4) < 1e-10);
    REQUIRE(std::abs(lm - fixtures::a05_weighted_l1_km1_h1em4) < 1e-10);
    // the sign of the curvature shifts the level in opposite directions
    REQUIRE(lp < lm);
}

TEST_CASE("weighted eigenvalue tracks beta + kappa M3 sqrt(h)") {
    const SpectralInvariants& inv = inv05();
    for (double kappa : {1.0, -1.0}) {
        double prev_rem = 0.0;
        double prev_h = 0.0;
        for (double h : {1e-3, 1e-5}) {
            WeightedModelParams p{-0.5, inv.zeta_a, kappa, h};
            WeightedResult r = weighted_op_lambda1(p, kFine);
            const double rem =
                std::abs(r.lambda1 - r.beta_ref - kappa * inv.M3 * std::sqrt(h));
            if (prev_h > 0.0) {
                const double slope = std::log(prev_rem / rem) / std::log(prev_h / h);
                REQUIRE(slope > 0.9);
            }
            prev_rem = rem;
            prev_h = h;
        }
    }
}

TEST_CASE("momentum scan certifies the uniform lower bound") {
    const SpectralInvariants& inv = inv05();
    const Grid1D g(20.0, 2001);
    WeightedBoundReport rep =
        weighted_lower_bound_check(inv, 1.0, 1e-6, 1e-4, g, 5);
    REQUIRE(rep.holds);

    // far from the minimizer the level clears the minimum by a wide margin
    WeightedModelParams far{-0.5, inv.zeta_a + 1.0, 1.0, 1e-6};
    WeightedResult rf = weighted_op_lambda1(far, g);
    REQUIRE(rf.lambda1 >= inv.beta_a + 0.01);

    // near the minimizer the level grows quadratically with curvature c2
    const double off = 1e-2;
    WeightedModelParams pp{-0.5, inv.zeta_a + off, 1.0, 1e-6};
    WeightedModelParams pm{-0.5, inv.zeta_a - off, 1.0, 1e-6};
    const double lp = weighted_op_lambda1(pp, kFine).lambda1;
    const double lm = weighted_op_lambda1(pm, kFine).lambda1;
    const double l0 =
        weighted_op_lambda1({-0.5, inv.zeta_a, 1.0, 1e-6}, kFine).lambda1;
    const double curv = (lp - 2.0 * l0 + lm) / (off * off) / 2.0;
    REQUIRE(std::abs(curv - inv.c2) < 0.1 * inv.c2);
}
