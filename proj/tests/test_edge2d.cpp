// Two-dimensional curved-edge discretization: gauge potential, discrete flux,
// gauge invariance, Hermiticity, a closed-form Dirichlet box, the straight
// edge against the fiber minimum, a uniform-field Landau level, and the
// grid-refinement machinery.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "magstep/edge2d.hpp"
#include "magstep/fiber.hpp"
#include "magstep/invariants.hpp"
#include "fixture_values.hpp"

using namespace magstep;

namespace {

FieldSet model_fields(double a, const CurvatureProfile& prof) {
    FieldSet f;
    f.a_s = [a, prof](double s, double t) {
        return gauge_potential_f1(a, prof, s, t);
    };
    f.a_t = [](double, double) { return 0.0; };
    f.jac = [prof](double s, double t) { return 1.0 - t * prof.k(s); };
    return f;
}

}  // namespace

TEST_CASE("gauge potential integrates the step field across the edge") {
    CurvatureProfile flat{CurvatureKind::flat, 0.0, 0.0};
    REQUIRE(gauge_potential_f1(-0.5, flat, 0.3, 0.0) == 0.0);
    REQUIRE(gauge_potential_f1(-0.7, flat, 0.0, 1.0) == Catch::Approx(-1.0));
    CurvatureProfile kone{CurvatureKind::gaussian_bump, 1.0, -0.5};
    // t < 0 picks up the ratio a and the curvature weight
    REQUIRE(gauge_potential_f1(-0.5, kone, 0.0, -1.0) == Catch::Approx(-0.75));
}

TEST_CASE("curvature profiles validate and expose their shape") {
    CurvatureProfile g{CurvatureKind::gaussian_bump, 1.0, -0.5};
    REQUIRE_NOTHROW(g.validate());
    REQUIRE(g.k(0.0) == Catch::Approx(1.0));
    REQUIRE(g.k(3.0) < 1.0);
    CurvatureProfile c{CurvatureKind::cosine_bump, 1.0, -0.5};
    REQUIRE_NOTHROW(c.validate());
    REQUIRE(c.k(0.0) == Catch::Approx(1.0));
    CurvatureProfile bad{CurvatureKind::gaussian_bump, -1.0, -0.5};
    REQUIRE_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("plaquette flux matches the field exactly for a straight edge") {
    CurvatureProfile flat{CurvatureKind::flat, 0.0, 0.0};
    FieldSet f = model_fields(-0.5, flat);
    // plaquettes strictly above / strictly below the interface
    const double d = 0.02;
    for (double t0 : {0.11, 0.45, -0.31}) {
        const double flux = plaquette_flux_density(f, 0.2, t0, d, d);
        const double want = t0 > 0.0 ? 1.0 : -0.5;
        REQUIRE(std::abs(flux - want) < 1e-11);
    }
}

TEST_CASE("plaquette flux converges at second order for a curved edge") {
    CurvatureProfile prof{CurvatureKind::gaussian_bump, 1.0, -0.5};
    FieldSet f = model_fields(-0.5, prof);
    const double s0 = 0.2, t0 = 0.15;
    auto err = [&](double d) {
        const double flux =
            plaquette_flux_density(f, s0 - 0.5 * d, t0 - 0.5 * d, d, d);
        const double exact = edge_field_weight(-0.5, t0) * (1.0 - t0 * prof.k(s0));
        return std::abs(flux - exact);
    };
    const double ratio = err(0.02) / err(0.01);
    REQUIRE(ratio > 3.0);
    REQUIRE(ratio < 5.0);
}

TEST_CASE("assembled operator is Hermitian entry by entry") {
    CurvatureProfile prof{CurvatureKind::gaussian_bump, 1.0, -0.5};
    EdgeDomain dom;
    dom.S = 1.0;
    dom.T = 0.3;
    dom.n_s = 31;
    dom.n_t = 21;
    Operator2D op = assemble_operator2d(0.05, -0.5, prof, dom);
    double scale = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < op.stiffness.n; ++i) {
        for (std::size_t p = op.stiffness.rowptr[i]; p < op.stiffness.rowptr[i + 1];
             ++p) {
            const std::size_t j = op.stiffness.colind[p];
            const cplx v = op.stiffness.vals[p];
            scale = std::max(scale, std::abs(v));
            worst = std::max(worst,
                             std::abs(v - std::conj(op.stiffness.entry(j, i))));
        }
    }
    REQUIRE(worst < 1e-12 * scale);
    for (double m : op.mass) REQUIRE(m > 0.0);
}

TEST_CASE("a quadratic gauge change conjugates the matrix exactly") {
    CurvatureProfile prof{CurvatureKind::gaussian_bump, 1.0, -0.5};
    const double a = -0.5, h = 0.05;
    EdgeDomain dom;
    dom.S = 1.0;
    dom.T = 0.3;
    dom.n_s = 31;
    dom.n_t = 21;
    auto omega = [](double s, double t) {
        return 0.3 * s * s - 0.2 * t * t + 0.15 * s * t + 0.07 * s - 0.05 * t;
    };
    FieldSet base = model_fields(a, prof);
    FieldSet shifted = base;
    shifted.a_s = [&](double s, double t) {
        return gauge_potential_f1(a, prof, s, t) + 0.6 * s + 0.15 * t + 0.07;
    };
    shifted.a_t = [&](double s, double t) { return -0.4 * t + 0.15 * s - 0.05; };
    Operator2D A = assemble_from_fields(h, base, dom);
    Operator2D B = assemble_from_fields(h, shifted, dom);
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < A.stiffness.n; ++i) {
        const std::size_t ci = i / A.nt_dof, ki = i % A.nt_dof + 1;
        const double si = dom.node_s(A.grid_col(ci)), ti = dom.node_t(ki);
        for (std::size_t p = A.stiffness.rowptr[i]; p < A.stiffness.rowptr[i + 1];
             ++p) {
            const std::size_t j = A.stiffness.colind[p];
            const std::size_t cj = j / A.nt_dof, kj = j % A.nt_dof + 1;
            const double sj = dom.node_s(A.grid_col(cj)), tj = dom.node_t(kj);
            const cplx u = std::exp(cplx(0.0, (omega(si, ti) - omega(sj, tj)) / h));
            const cplx want = u * A.stiffness.vals[p];
            scale = std::max(scale, std::abs(want));
            worst = std::max(worst, std::abs(B.stiffness.entry(i, j) - want));
        }
    }
    REQUIRE(worst < 1e-10 * scale);
}

TEST_CASE("field-free box reproduces the discrete Dirichlet spectrum") {
    EdgeDomain dom;
    dom.S = 1.0;
    dom.T = 0.75;
    dom.n_s = 41;
    dom.n_t = 31;
    FieldSet f;
    f.a_s = [](double, double) { return 0.0; };
    f.a_t = [](double, double) { return 0.0; };
    f.jac = [](double, double) { return 1.0; };
    const double h = 0.1;
    Operator2D op = assemble_from_fields(h, f, dom);
    Solve2DOptions so;
    so.tol = 1e-10;
    EigenResult2D res = solve_eigs2d(op, 3, so);

    auto lam1d = [&](std::size_t m, double halfw, std::size_t npts) {
        const double d = 2.0 * halfw / double(npts - 1);
        return (2.0 / (d * d)) * (1.0 - std::cos(double(m) * M_PI / double(npts - 1)));
    };
    std::vector<double> want;
    for (std::size_t m = 1; m <= 3; ++m)
        for (std::size_t l = 1; l <= 3; ++l)
            want.push_back(h * h * (lam1d(m, dom.S, dom.n_s) + lam1d(l, dom.T, dom.n_t)));
    std::sort(want.begin(), want.end());
    for (int e = 0; e < 3; ++e) {
        REQUIRE(std::abs(res.lambdas[e] - want[e]) < 1e-10 * want[e]);
    }
}

TEST_CASE("straight edge recovers the fiber band minimum") {
    CurvatureProfile flat{CurvatureKind::flat, 0.0, 0.0};
    EdgeDomain dom;
    dom.S = 3.0;
    dom.T = 0.45;
    dom.n_s = 121;
    dom.n_t = 161;
    const double h = 5e-3;
    Operator2D op = assemble_operator2d(h, -0.5, flat, dom);
    EigenResult2D res = solve_eigs2d(op, 1);
    REQUIRE(std::abs(res.lambdas[0] / h - fixtures::a05_beta) < 0.02);
}

TEST_CASE("curvature at the edge lowers the ground-state energy") {
    EdgeDomain dom;
    dom.S = 3.0;
    dom.T = 0.45;
    dom.n_s = 121;
    dom.n_t = 121;
    const double h = 1e-2;
    CurvatureProfile flat{CurvatureKind::flat, 0.0, 0.0};
    CurvatureProfile bump{CurvatureKind::gaussian_bump, 1.0, -0.5};
    Operator2D opf = assemble_operator2d(h, -0.5, flat, dom);
    Operator2D opb = assemble_operator2d(h, -0.5, bump, dom);
    const double lf = solve_eigs2d(opf, 1).lambdas[0];
    const double lb = solve_eigs2d(opb, 1).lambdas[0];
    REQUIRE(lb < lf);
}

TEST_CASE("uniform field with periodic edge sits at the Landau level") {
    CurvatureProfile flat{CurvatureKind::flat, 0.0, 0.0};
    EdgeDomain dom;
    dom.S = 1.0;
    dom.T = 0.45;
    dom.n_s = 121;
    dom.n_t = 201;
    dom.periodic_s = true;
    const double h = 5e-3;
    Operator2D op = assemble_operator2d(h, 1.0, flat, dom);
    EigenResult2D res = solve_eigs2d(op, 1);
    REQUIRE(std::abs(res.lambdas[0] / h - 1.0) < 0.05);
}

TEST_CASE("iterative and banded paths agree on the same operator") {
    CurvatureProfile bump{CurvatureKind::gaussian_bump, 1.0, -0.5};
    EdgeDomain dom;
    dom.S = 2.0;
    dom.T = 0.45;
    dom.n_s = 81;
    dom.n_t = 81;
    const double h = 2e-2;
    Operator2D op = assemble_operator2d(h, -0.5, bump, dom);
    EigenResult2D direct = solve_eigs2d(op, 2);
    Solve2DOptions so;
    so.force_iterative = true;
    so.tol = 1e-9;
    EigenResult2D iter = solve_eigs2d(op, 2, so);
    REQUIRE(direct.stats.method != iter.stats.method);
    for (int e = 0; e < 2; ++e) {
        REQUIRE(std::abs(direct.lambdas[e] - iter.lambdas[e]) < 1e-8);
    }
}

TEST_CASE("bilinear prolongation reproduces bilinear functions exactly") {
    EdgeDomain from;
    from.S = 1.0;
    from.T = 0.5;
    from.n_s = 21;
    from.n_t = 11;
    EdgeDomain to = from;
    to.n_s = 41;
    to.n_t = 21;
    std::vector<cplx> coarse(from.n_s * from.n_t);
    auto val = [](double s, double t) {
        return cplx(0.3 + 0.7 * s - 0.2 * t + 0.45 * s * t,
                    -0.1 + 0.2 * s + 0.9 * t);
    };
    for (std::size_t j = 0; j < from.n_s; ++j)
        for (std::size_t k = 0; k < from.n_t; ++k)
            coarse[j * from.n_t + k] = val(from.node_s(j), from.node_t(k));
    std::vector<cplx> fine = prolong_mode_bilinear(coarse, from, to);
    double worst = 0.0;
    for (std::size_t j = 0; j < to.n_s; ++j)
        for (std::size_t k = 0; k < to.n_t; ++k)
            worst = std::max(worst, std::abs(fine[j * to.n_t + k] -
                                             val(to.node_s(j), to.node_t(k))));
    REQUIRE(worst < 1e-13);
}

TEST_CASE("grid-halving extrapolation validates its inputs and combines") {
    CurvatureProfile flat{CurvatureKind::flat, 0.0, 0.0};
    EdgeDomain dom;
    dom.S = 1.0;
    dom.T = 0.45;
    dom.n_s = 41;
    dom.n_t = 41;
    EdgeDomain fine = dom;
    fine.n_s = 81;
    fine.n_t = 81;
    const double h = 2e-2;
    Operator2D oc = assemble_operator2d(h, -0.5, flat, dom);
    Operator2D of = assemble_operator2d(h, -0.5, flat, fine);
    EigenResult2D rc = solve_eigs2d(oc, 1);
    EigenResult2D rf = solve_eigs2d(of, 1);
    EigenResult2D comb = richardson_combine(rc, rf);
    REQUIRE(comb.lambdas[0] ==
            Catch::Approx((4.0 * rf.lambdas[0] - rc.lambdas[0]) / 3.0));

    // mismatched physical parameters are rejected
    Operator2D bad = assemble_operator2d(2.0 * h, -0.5, flat, fine);
    EigenResult2D rb = solve_eigs2d(bad, 1);
    REQUIRE_THROWS_AS(richardson_combine(rc, rb), ValidationError);
    // a fine grid that does not halve the steps is rejected
    REQUIRE_THROWS_AS(richardson_combine(rc, rc), ValidationError);
}

TEST_CASE("warm-started refinement matches a cold solve") {
    CurvatureProfile bump{CurvatureKind::gaussian_bump, 1.0, -0.5};
    EdgeDomain dom;
    dom.S = 2.0;
    dom.T = 0.45;
    dom.n_s = 41;
    dom.n_t = 41;
    EdgeDomain fine = dom;
    fine.n_s = 81;
    fine.n_t = 81;
    const double h = 2e-2;
    Operator2D oc = assemble_operator2d(h, -0.5, bump, dom);
    EigenResult2D rc = solve_eigs2d(oc, 2);
    Operator2D of = assemble_operator2d(h, -0.5, bump, fine);
    Solve2DOptions warm;
    for (const auto& vec : rc.eigvecs)
        warm.warm_start.push_back(prolong_mode_bilinear(vec, dom, fine));
    EigenResult2D rw = solve_eigs2d(of, 2, warm);
    EigenResult2D rcold = solve_eigs2d(of, 2);
    for (int e = 0; e < 2; ++e) {
        REQUIRE(std::abs(rw.lambdas[e] - rcold.lambdas[e]) < 1e-9);
    }
}

TEST_CASE("domain validation rejects inconsistent geometry") {
    CurvatureProfile bump{CurvatureKind::gaussian_bump, 1.0, -0.5};
    EdgeDomain dom;
    dom.T = 0.6;  // 1 - T k_max < 0.5: coordinate chart too thin
    REQUIRE_THROWS_AS(dom.validate(bump), ValidationError);
    EdgeDomain even;
    even.n_s = 240;
    CurvatureProfile flat{CurvatureKind::flat, 0.0, 0.0};
    REQUIRE_THROWS_AS(even.validate(flat), ValidationError);
}
