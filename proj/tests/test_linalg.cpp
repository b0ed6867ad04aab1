// Core numerics: grids, quadrature, tridiagonal eigensolvers, Sturm counts,
// dense Hermitian eigenvalues, CG, the iterative block solver, and the
// three-term asymptotic fit.  Every reference value here has a closed form.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "magstep/block_eigs.hpp"
#include "magstep/cg.hpp"
#include "magstep/core.hpp"
#include "magstep/dense.hpp"
#include "magstep/fit.hpp"
#include "magstep/grid.hpp"
#include "magstep/tridiag.hpp"

using namespace magstep;

namespace {

// Discrete Dirichlet Laplacian (diag 2, offdiag -1): eigenvalues are known in
// closed form, lambda_k = 2 - 2 cos(k pi / (n+1)), k = 1..n.
TriDiag dirichlet_laplacian(std::size_t n) {
    TriDiag T;
    T.diag.assign(n, 2.0);
    T.offdiag.assign(n - 1, -1.0);
    return T;
}

double laplacian_eig(std::size_t k, std::size_t n) {
    return 2.0 - 2.0 * std::cos(static_cast<double>(k) * M_PI /
                                static_cast<double>(n + 1));
}

}  // namespace

TEST_CASE("dot conjugates its first argument") {
    std::vector<cplx> x = {cplx(0.0, 1.0), cplx(2.0, 0.0)};
    std::vector<cplx> y = {cplx(1.0, 0.0), cplx(0.0, 3.0)};
    const cplx d = dot(x, y);
    // conj(i)*1 + conj(2)*(3i) = -i + 6i = 5i
    REQUIRE(std::abs(d - cplx(0.0, 5.0)) < 1e-15);
    // <x, x> is the squared norm
    const cplx n2 = dot(x, x);
    REQUIRE(std::abs(n2.imag()) < 1e-15);
    REQUIRE(std::abs(n2.real() - 5.0) < 1e-15);
    REQUIRE(std::abs(norm2(x) - std::sqrt(5.0)) < 1e-15);
}

TEST_CASE("Grid1D validates and exposes symmetric nodes") {
    REQUIRE_THROWS_AS(Grid1D(20.0, 4000), ValidationError);  // even count
    REQUIRE_THROWS_AS(Grid1D(20.0, 1), ValidationError);     // too small
    REQUIRE_THROWS_AS(Grid1D(-1.0, 101), ValidationError);   // bad extent

    Grid1D g(5.0, 11);
    REQUIRE(g.step() == Catch::Approx(1.0));
    REQUIRE(g.node(0) == Catch::Approx(-5.0));
    REQUIRE(g.node(10) == Catch::Approx(5.0));
    REQUIRE(g.node(g.center_index()) == Catch::Approx(0.0).margin(1e-15));
    // coarsening needs n = 1 (mod 4) so the halved count stays odd
    REQUIRE_THROWS_AS(g.coarsened(), ValidationError);
    REQUIRE(Grid1D(5.0, 9).coarsened().n_points == 5u);
}

TEST_CASE("Grid1D coarsening keeps the extent and halves the resolution") {
    Grid1D g(20.0, 4001);
    Grid1D c = g.coarsened();
    REQUIRE(c.n_points == 2001u);
    REQUIRE(c.L == Catch::Approx(20.0));
    REQUIRE(c.step() == Catch::Approx(2.0 * g.step()));
}

TEST_CASE("trapezoid rule is exact on linear data and O(step^2) otherwise") {
    Grid1D g(1.0, 2001);
    std::vector<double> lin(g.n_points), quad(g.n_points);
    for (std::size_t i = 0; i < g.n_points; ++i) {
        const double x = g.node(i);
        lin[i] = 3.0 * x + 2.0;
        quad[i] = x * x;
    }
    REQUIRE(trapezoid(lin, g.step()) == Catch::Approx(4.0).margin(1e-13));
    REQUIRE(trapezoid(quad, g.step()) ==
            Catch::Approx(2.0 / 3.0).margin(1e-6));
}

TEST_CASE("cutoff_chi has a unit plateau, compact support, and is monotone") {
    REQUIRE(cutoff_chi(0.0) == 1.0);
    REQUIRE(cutoff_chi(0.5) == 1.0);
    REQUIRE(cutoff_chi(-0.49) == 1.0);
    REQUIRE(cutoff_chi(1.0) == 0.0);
    REQUIRE(cutoff_chi(-1.2) == 0.0);
    double prev = 1.0;
    for (int i = 1; i <= 100; ++i) {
        const double v = cutoff_chi(0.5 + 0.005 * i);
        REQUIRE(v <= prev + 1e-15);
        prev = v;
    }
    // scaled form: plateau radius r/2, support radius r
    REQUIRE(cutoff_chi(0.2, 0.5) == 1.0);
    REQUIRE(cutoff_chi(0.6, 0.5) == 0.0);
}

TEST_CASE("brent_minimize locates a quartic minimum") {
    auto f = [](double x) { return (x - 0.3) * (x - 0.3) * ((x - 0.3) * (x - 0.3) + 1.0); };
    const double x = brent_minimize(f, -2.0, 2.0);
    REQUIRE(std::abs(x - 0.3) < 1e-7);
}

TEST_CASE("seeded Gaussian draws are deterministic") {
    auto u = seeded_gaussian(64, 1234);
    auto v = seeded_gaussian(64, 1234);
    auto w = seeded_gaussian(64, 1235);
    REQUIRE(u == v);
    REQUIRE(u != w);
    auto z = seeded_gaussian_cplx(64, 99);
    REQUIRE(z.size() == 64u);
    REQUIRE(norm2(z) > 0.0);
}

TEST_CASE("Sturm counts match the closed-form Laplacian spectrum exactly") {
    const std::size_t n = 60;
    TriDiag T = dirichlet_laplacian(n);
    // probe midpoints between consecutive eigenvalues plus both extremes
    for (std::size_t k = 0; k <= n; ++k) {
        double sigma;
        if (k == 0) {
            sigma = 0.5 * laplacian_eig(1, n);
        } else if (k == n) {
            sigma = laplacian_eig(n, n) + 1.0;
        } else {
            sigma = 0.5 * (laplacian_eig(k, n) + laplacian_eig(k + 1, n));
        }
        REQUIRE(sturm_count_below(T, sigma) == k);
    }
}

TEST_CASE("tridiag_smallest reproduces the Laplacian eigenpairs") {
    const std::size_t n = 60;
    TriDiag T = dirichlet_laplacian(n);
    auto pairs = tridiag_smallest(T, 5);
    REQUIRE(pairs.size() == 5u);
    for (std::size_t k = 0; k < 5; ++k) {
        REQUIRE(pairs[k].value ==
                Catch::Approx(laplacian_eig(k + 1, n)).margin(1e-12));
        // eigenvector residual ||T v - lambda v||
        const auto& v = pairs[k].vector;
        REQUIRE(v.size() == n);
        std::vector<double> r(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = T.diag[i] * v[i];
            if (i > 0) acc += T.offdiag[i - 1] * v[i - 1];
            if (i + 1 < n) acc += T.offdiag[i] * v[i + 1];
            r[i] = acc - pairs[k].value * v[i];
        }
        REQUIRE(norm2(r) < 1e-10);
        REQUIRE(norm2(v) == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("dense Hermitian eigenvalues: 2x2 closed form") {
    DenseHermitian A(2);
    A.at(0, 0) = 2.0;
    A.at(1, 1) = 3.0;
    A.at(0, 1) = cplx(0.0, 1.0);
    A.at(1, 0) = cplx(0.0, -1.0);
    auto p = dense_hermitian_eigs(A, 2);
    const double mid = 2.5, rad = std::sqrt(1.25);
    REQUIRE(p[0].value == Catch::Approx(mid - rad).margin(1e-13));
    REQUIRE(p[1].value == Catch::Approx(mid + rad).margin(1e-13));
}

TEST_CASE("dense Hermitian eigenvalues match the tridiagonal path") {
    const std::size_t n = 40;
    // embed the Laplacian with a complex diagonal phase twist: the moduli of
    // the couplings (and hence the spectrum) stay those of the real matrix
    DenseHermitian A(n);
    for (std::size_t i = 0; i < n; ++i) {
        A.at(i, i) = 2.0;
        if (i + 1 < n) {
            const cplx phase = std::exp(cplx(0.0, 0.37 * static_cast<double>(i)));
            A.at(i, i + 1) = -phase;
            A.at(i + 1, i) = -std::conj(phase);
        }
    }
    auto p = dense_hermitian_eigs(A, 4);
    for (std::size_t k = 0; k < 4; ++k) {
        REQUIRE(p[k].value ==
                Catch::Approx(laplacian_eig(k + 1, n)).margin(1e-11));
    }
}

TEST_CASE("dense path rejects non-Hermitian input") {
    DenseHermitian A(3);
    A.at(0, 0) = 1.0;
    A.at(1, 1) = 1.0;
    A.at(2, 2) = 1.0;
    A.at(0, 1) = 1.0;
    A.at(1, 0) = 2.0;  // asymmetric
    REQUIRE_THROWS_AS(dense_hermitian_eigs(A, 1), ValidationError);
}

TEST_CASE("cg_solve solves an SPD system and honors deflation constraints") {
    const std::size_t n = 120;
    TriDiag T = dirichlet_laplacian(n);
    std::vector<double> b = seeded_gaussian(n, 7);

    auto res = cg_solve(T, b, 1e-12);
    std::vector<double> Ax(n);
    T.apply(res.x, Ax);
    for (std::size_t i = 0; i < n; ++i) Ax[i] -= b[i];
    REQUIRE(norm2(Ax) <= 1e-10 * norm2(b));

    // deflation: keep the solution orthogonal to the all-ones vector
    std::vector<std::vector<double>> defl = {std::vector<double>(n, 1.0)};
    auto res2 = cg_solve(T, b, 1e-12, defl);
    double s = 0.0;
    for (double v : res2.x) s += v;
    REQUIRE(std::abs(s) <= 1e-9 * norm2(res2.x));
}

TEST_CASE("iterative block solver matches the dense oracle on a PD matrix") {
    const std::size_t n = 100;
    std::mt19937_64 rng(42);
    std::normal_distribution<double> gauss(0.0, 1.0);
    // shifted sample covariance: Hermitian positive definite, condition ~10
    std::vector<cplx> B(n * n);
    for (auto& v : B) v = cplx(gauss(rng), gauss(rng));
    DenseHermitian A(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            cplx acc{0.0, 0.0};
            for (std::size_t k = 0; k < n; ++k)
                acc += std::conj(B[k * n + i]) * B[k * n + j];
            acc /= static_cast<double>(n);
            if (i == j) acc = cplx(acc.real() + 0.5, 0.0);
            A.at(i, j) = acc;
            A.at(j, i) = std::conj(acc);
        }
    }
    auto dense = dense_hermitian_eigs(A, 3);
    EigsOptions opts;
    opts.tol = 1e-10;
    opts.seed = 5;
    auto iter = hermitian_smallest_eigs(A, 3, opts);
    for (std::size_t k = 0; k < 3; ++k) {
        REQUIRE(std::abs(iter[k].value - dense[k].value) < 1e-9);
    }
}

TEST_CASE("iterative block solver rejects indefinite operators") {
    // zero-shift inverse iteration requires the shifted operator to stay
    // positive definite; a traceless random Hermitian matrix violates that
    const std::size_t n = 30;
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss(0.0, 1.0);
    DenseHermitian A(n);
    for (std::size_t i = 0; i < n; ++i) {
        A.at(i, i) = gauss(rng);
        for (std::size_t j = i + 1; j < n; ++j) {
            const cplx v(gauss(rng), gauss(rng));
            A.at(i, j) = v;
            A.at(j, i) = std::conj(v);
        }
    }
    EigsOptions opts;
    opts.seed = 3;
    REQUIRE_THROWS_AS(hermitian_smallest_eigs(A, 2, opts), SolverError);
}

TEST_CASE("fit_three_term recovers planted coefficients") {
    const std::array<double, 3> truth = {0.391, -0.0372, 0.068};
    auto model = [&](double h) {
        return truth[0] * h + truth[1] * std::pow(h, 1.5) +
               truth[2] * std::pow(h, 1.75);
    };

    SECTION("three points interpolate") {
        std::vector<double> h = {2e-2, 1e-2, 5e-3};
        std::vector<double> y;
        for (double hh : h) y.push_back(model(hh));
        auto c = fit_three_term(h, y);
        for (int j = 0; j < 3; ++j)
            REQUIRE(std::abs(c[j] - truth[j]) < 1e-12);
    }

    SECTION("five points solve least squares") {
        std::vector<double> h = {4e-2, 2e-2, 1e-2, 5e-3, 2.5e-3};
        std::vector<double> y;
        for (double hh : h) y.push_back(model(hh));
        auto c = fit_three_term(h, y);
        for (int j = 0; j < 3; ++j)
            REQUIRE(std::abs(c[j] - truth[j]) < 1e-10);
    }

    SECTION("degenerate inputs are rejected") {
        REQUIRE_THROWS_AS(fit_three_term({1e-2, 1e-2, 1e-2}, {1.0, 1.0, 1.0}),
                          ValidationError);
        REQUIRE_THROWS_AS(fit_three_term({1e-2, 5e-3}, {1.0, 1.0}),
                          ValidationError);
        REQUIRE_THROWS_AS(fit_three_term({-1e-2, 5e-3, 1e-3}, {1.0, 1.0, 1.0}),
                          ValidationError);
    }
}
