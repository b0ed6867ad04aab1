#pragma once

// Genuine 2D discretization of the magnetic Schrödinger operator in tubular
// boundary coordinates.  The domain is the rectangle (-S, S) x (-T, T) with
// tangential coordinate s and normal coordinate t, metric factor
// a(s,t) = 1 - t k(s), and a step magnetic field (strength 1 above t = 0 and
// `a` below) written in the gauge
//
//   F1(s, t) = -b_a(t) (t - t^2 k(s) / 2),   F2 = 0.
//
// The operator is assembled through its quadratic form
//
//   Q(u) = Int [ a^{-1} |(h d_s - i F1) u|^2 + a |(h d_t - i F2) u|^2 ] ds dt,
//
// discretized with first-order covariant (phased-link) difference quotients
// and midpoint coefficient sampling: every grid edge contributes
// c |e^{-i theta} u_q - u_p|^2 where theta is the gauge potential integrated
// along the edge by the midpoint rule and c combines the metric weight with
// (h / edge length)^2.  This makes the stiffness matrix Hermitian exactly, by
// construction, keeps the field-strength jump at t = 0 out of the stencils
// (t = 0 is a grid line; coefficients are sampled at cell midpoints), and is
// gauge-covariant: shifting F by a discrete link gradient conjugates the
// matrix by a unitary diagonal.
//
// Eigenvalues come from the generalized problem K x = lambda M x with the
// positive diagonal mass M = diag(a(s_j, t_k) ds dt), reduced symmetrically by
// D^{-1/2} K D^{-1/2}.  Two solve paths are provided: a banded Cholesky
// factorization with block inverse iteration (Dirichlet grids, where the
// t-fastest DOF ordering gives bandwidth n_t - 2), and the generic
// matrix-free block solver for periodic-in-s or memory-constrained runs.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "magstep/band_chol.hpp"
#include "magstep/block_eigs.hpp"
#include "magstep/core.hpp"
#include "magstep/curvature.hpp"
#include "magstep/dense.hpp"
#include "magstep/fiber.hpp"
#include "magstep/sparse.hpp"

namespace magstep {

// ---------------------------------------------------------------------------
// Model fields

/// Step-field weight as a function of the normal coordinate: 1 on t >= 0 and
/// `a` on t < 0.  `a` in [-1, 0) is the two-phase model; a = 1 gives the
/// uniform field used by reference runs.
inline double edge_field_weight(double a, double t) { return b_weight(t, a); }

inline void validate_edge_field_ratio(double a) {
    require(a == 1.0 || (a >= -1.0 && a < 0.0),
            "edge model: field ratio a must lie in [-1, 0), or equal 1 for a "
            "uniform field");
}

/// Tangential gauge potential of the step field in tubular coordinates.  The
/// normal component vanishes identically in this gauge.
inline double gauge_potential_f1(double a, const CurvatureProfile& profile, double s,
                                 double t) {
    return -edge_field_weight(a, t) * (t - 0.5 * t * t * profile.k(s));
}

/// Samples the tangential gauge potential on the full node grid, s-major
/// (index j * n_t + k for s-node j and t-node k).
inline std::vector<double> build_gauge_potential(double a, const CurvatureProfile& profile,
                                                 const EdgeDomain& domain) {
    validate_edge_field_ratio(a);
    std::vector<double> f1(domain.n_s * domain.n_t, 0.0);
    for (std::size_t j = 0; j < domain.n_s; ++j) {
        const double s = domain.node_s(j);
        for (std::size_t k = 0; k < domain.n_t; ++k)
            f1[j * domain.n_t + k] = gauge_potential_f1(a, profile, s, domain.node_t(k));
    }
    return f1;
}

// ---------------------------------------------------------------------------
// Assembly

/// Coefficient fields for the generic assembler: tangential and normal gauge
/// components plus the (positive) metric factor.
struct FieldSet {
    std::function<double(double, double)> a_s;  // F1(s, t)
    std::function<double(double, double)> a_t;  // F2(s, t)
    std::function<double(double, double)> jac;  // metric factor a(s, t) > 0
};

struct Operator2D {
    double h = 0.0;
    double a = 0.0;
    CurvatureProfile profile;
    EdgeDomain domain;
    SparseHermitian stiffness;  // quadratic-form matrix on the DOFs
    std::vector<double> mass;   // positive diagonal mass per DOF
    std::size_t ns_dof = 0, nt_dof = 0;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    std::size_t dofs() const { return ns_dof * nt_dof; }

    /// Grid column (s index) owning DOF column c.
    std::size_t grid_col(std::size_t c) const { return domain.periodic_s ? c : c + 1; }

    /// DOF id of grid node (j, k), or npos for Dirichlet boundary nodes.  For
    /// the periodic tangential direction the last column is identified with
    /// the first.
    std::size_t dof_at(std::size_t j, std::size_t k) const {
        if (k == 0 || k + 1 >= domain.n_t) return npos;
        if (domain.periodic_s) {
            if (j + 1 == domain.n_s) j = 0;
            return j * nt_dof + (k - 1);
        }
        if (j == 0 || j + 1 >= domain.n_s) return npos;
        return (j - 1) * nt_dof + (k - 1);
    }
};

/// Assembles the quadratic form for arbitrary coefficient fields.  Boundary
/// conditions: Dirichlet on t = +-T always; Dirichlet on s = +-S, or periodic
/// identification of s = -S with s = +S when the domain says so (the fields
/// are then expected to be 2S-periodic in s).
inline Operator2D assemble_from_fields(double h, const FieldSet& fields,
                                       const EdgeDomain& domain) {
    require(std::isfinite(h) && h > 0.0, "assemble_from_fields: h must be positive");
    require(static_cast<bool>(fields.a_s) && static_cast<bool>(fields.a_t) &&
                static_cast<bool>(fields.jac),
            "assemble_from_fields: all three coefficient fields must be set");
    require(domain.n_s >= 5 && domain.n_t >= 5, "assemble_from_fields: grid too small");
    require(domain.n_s % 2 == 1 && domain.n_t % 2 == 1,
            "assemble_from_fields: grids must have odd node counts so (0,0) is a node");

    Operator2D op;
    op.h = h;
    op.domain = domain;
    op.nt_dof = domain.n_t - 2;
    op.ns_dof = domain.periodic_s ? domain.n_s - 1 : domain.n_s - 2;
    const double ds = domain.ds();
    const double dt = domain.dt();
    const double area = ds * dt;
    const std::size_t ndof = op.dofs();

    const char* kJacMsg =
        "assemble_from_fields: metric factor must stay positive (tubular "
        "coordinates degenerate)";

    op.mass.assign(ndof, 0.0);
    for (std::size_t c = 0; c < op.ns_dof; ++c) {
        const double s = domain.node_s(op.grid_col(c));
        for (std::size_t k = 1; k + 1 < domain.n_t; ++k) {
            const double jac = fields.jac(s, domain.node_t(k));
            require(jac > 0.0, kJacMsg);
            op.mass[c * op.nt_dof + (k - 1)] = jac * area;
        }
    }

    std::vector<std::tuple<std::size_t, std::size_t, cplx>> trip;
    trip.reserve(10 * ndof);
    const cplx iunit(0.0, 1.0);

    // One edge of the link graph: contributes c |e^{-i theta} u_q - u_p|^2 to
    // the form, with u = 0 on boundary nodes (npos).
    auto add_link = [&](std::size_t p, std::size_t q, double coeff, double theta) {
        if (p != Operator2D::npos) trip.emplace_back(p, p, cplx(coeff));
        if (q != Operator2D::npos) trip.emplace_back(q, q, cplx(coeff));
        if (p != Operator2D::npos && q != Operator2D::npos) {
            const cplx phase = std::exp(-iunit * theta);
            trip.emplace_back(p, q, -coeff * phase);
            trip.emplace_back(q, p, -coeff * std::conj(phase));
        }
    };

    // Normal links (j, k) -- (j, k+1).
    const double ct = (h / dt) * (h / dt) * area;
    for (std::size_t c = 0; c < op.ns_dof; ++c) {
        const std::size_t j = op.grid_col(c);
        const double s = domain.node_s(j);
        for (std::size_t k = 0; k + 1 < domain.n_t; ++k) {
            const double tmid = domain.node_t(k) + 0.5 * dt;
            const double jac = fields.jac(s, tmid);
            require(jac > 0.0, kJacMsg);
            const double theta = fields.a_t(s, tmid) * dt / h;
            add_link(op.dof_at(j, k), op.dof_at(j, k + 1), jac * ct, theta);
        }
    }

    // Tangential links (j, k) -- (j+1, k); the last link wraps around when the
    // tangential direction is periodic (dof_at folds column n_s - 1 onto 0).
    const double cs = (h / ds) * (h / ds) * area;
    for (std::size_t j = 0; j + 1 < domain.n_s; ++j) {
        const double smid = domain.node_s(j) + 0.5 * ds;
        for (std::size_t k = 1; k + 1 < domain.n_t; ++k) {
            const double t = domain.node_t(k);
            const double jac = fields.jac(smid, t);
            require(jac > 0.0, kJacMsg);
            const double theta = fields.a_s(smid, t) * ds / h;
            add_link(op.dof_at(j, k), op.dof_at(j + 1, k), cs / jac, theta);
        }
    }

    op.stiffness = sparse_from_triplets(ndof, std::move(trip), /*check=*/true);
    return op;
}

/// Assembles the model operator: step field of ratio `a`, curvature profile
/// `profile`, metric factor 1 - t k(s).
inline Operator2D assemble_operator2d(double h, double a, const CurvatureProfile& profile,
                                      const EdgeDomain& domain) {
    profile.validate();
    domain.validate(profile);
    validate_edge_field_ratio(a);
    if (domain.periodic_s)
        require(profile.k(domain.S) <= 1e-12 * std::max(profile.k_max, 1.0),
                "assemble_operator2d: the periodic tangential variant needs the "
                "curvature to vanish at s = +-S");

    FieldSet fields;
    fields.a_s = [a, profile](double s, double t) {
        return gauge_potential_f1(a, profile, s, t);
    };
    fields.a_t = [](double, double) { return 0.0; };
    fields.jac = [profile](double s, double t) { return 1.0 - t * profile.k(s); };

    Operator2D op = assemble_from_fields(h, fields, domain);
    op.a = a;
    op.profile = profile;
    return op;
}

/// Discrete flux density of the plaquette [s0, s0+ds] x [t0, t0+dt]: the
/// counterclockwise circulation of the midpoint-sampled gauge potential
/// divided by the area.  Approximates curl F = d_s F2 - d_t F1 -- for the
/// model fields, b_a(t) (1 - t k(s)) away from t = 0 -- to second order.
inline double plaquette_flux_density(const FieldSet& fields, double s0, double t0,
                                     double ds, double dt) {
    const double sm = s0 + 0.5 * ds;
    const double tm = t0 + 0.5 * dt;
    const double circulation = fields.a_s(sm, t0) * ds + fields.a_t(s0 + ds, tm) * dt -
                               fields.a_s(sm, t0 + dt) * ds - fields.a_t(s0, tm) * dt;
    return circulation / (ds * dt);
}

// ---------------------------------------------------------------------------
// Eigenvalue solve

struct Solve2DOptions {
    double tol = 1e-8;             // residual tolerance relative to the norm bound
    std::size_t block = 0;         // subspace width; 0 -> k + 6
    std::size_t max_outer = 200;   // outer iteration budget
    std::uint64_t seed = 0x2d5eedULL;
    double shift = 0.0;            // initial factorization shift
    bool adaptive_shift = true;    // move the shift under the Ritz floor once settled
    bool force_iterative = false;  // skip the banded direct path
    double memory_budget_bytes = 3.2e9;          // cap for the band factor
    std::vector<std::vector<cplx>> warm_start;   // full-grid starting modes
};

struct SolverStats2D {
    std::string method;
    std::size_t iterations = 0;        // outer sweeps (banded path)
    std::size_t refactorizations = 0;  // adaptive shift updates (banded path)
    double norm_bound = 0.0;           // row-sum bound for the reduced matrix
    double shift_used = 0.0;           // final factorization shift (banded path)
};

struct EigenResult2D {
    double h = 0.0;
    double a = 0.0;
    CurvatureProfile profile;
    EdgeDomain domain;
    std::vector<double> lambdas;             // ascending
    std::vector<std::vector<cplx>> eigvecs;  // full grid, mass-normalized
    std::vector<double> residuals;           // ||A y - lambda y|| on the reduced form
    SolverStats2D stats;
};

namespace detail {

inline std::vector<cplx> reduce_to_dofs(const Operator2D& op, const std::vector<cplx>& full) {
    require(full.size() == op.domain.n_s * op.domain.n_t,
            "reduce_to_dofs: grid size mismatch");
    std::vector<cplx> y(op.dofs());
    for (std::size_t c = 0; c < op.ns_dof; ++c) {
        const std::size_t j = op.grid_col(c);
        for (std::size_t k = 1; k + 1 < op.domain.n_t; ++k) {
            const std::size_t d = c * op.nt_dof + (k - 1);
            y[d] = full[j * op.domain.n_t + k] * std::sqrt(op.mass[d]);
        }
    }
    return y;
}

inline std::vector<cplx> embed_from_dofs(const Operator2D& op, const std::vector<cplx>& y) {
    std::vector<cplx> full(op.domain.n_s * op.domain.n_t, cplx(0));
    for (std::size_t c = 0; c < op.ns_dof; ++c) {
        const std::size_t j = op.grid_col(c);
        for (std::size_t k = 1; k + 1 < op.domain.n_t; ++k) {
            const std::size_t d = c * op.nt_dof + (k - 1);
            full[j * op.domain.n_t + k] = y[d] / std::sqrt(op.mass[d]);
        }
    }
    if (op.domain.periodic_s) {
        // Ghost copy: the identified column s = +S mirrors s = -S.
        const std::size_t last = (op.domain.n_s - 1) * op.domain.n_t;
        for (std::size_t k = 0; k < op.domain.n_t; ++k) full[last + k] = full[k];
    }
    return full;
}

/// Rotates a mode so its value at the center node (s, t) = (0, 0) is real and
/// positive; falls back to the largest-magnitude node when the center value
/// is negligible (modes that are odd across the center).
inline void fix_phase_at_center(std::vector<cplx>& full, const EdgeDomain& dom) {
    const std::size_t j0 = (dom.n_s - 1) / 2;
    const std::size_t k0 = (dom.n_t - 1) / 2;
    cplx z = full[j0 * dom.n_t + k0];
    double amax = 0.0;
    std::size_t imax = 0;
    for (std::size_t i = 0; i < full.size(); ++i) {
        const double m = std::abs(full[i]);
        if (m > amax) {
            amax = m;
            imax = i;
        }
    }
    if (amax == 0.0) return;
    if (std::abs(z) < 1e-8 * amax) z = full[imax];
    const cplx rot = std::conj(z) / std::abs(z);
    for (auto& v : full) v *= rot;
}

/// Block inverse iteration with Rayleigh-Ritz extraction on a banded Cholesky
/// factorization of the reduced stiffness.  Once the bottom Ritz value has
/// settled, the factorization shift is moved just below it, which turns the
/// near-degenerate low cluster (spacing O(h^{7/4})) from a crawl into a few
/// sweeps.  A shift that overshoots the bottom eigenvalue makes the factor
/// fail positive definiteness; that attempt is abandoned and the previous
/// shift rebuilt.
inline std::vector<EigenPairZ> banded_smallest_eigs(
    const SparseHermitian& A, std::size_t k, std::size_t bw, double anorm,
    const std::vector<std::vector<cplx>>& initial, const Solve2DOptions& opts,
    SolverStats2D& stats, std::vector<double>& residuals_out) {
    const std::size_t n = A.n;
    std::size_t b = opts.block ? opts.block : k + 6;
    b = std::min(b, n);
    require(b >= k, "banded_smallest_eigs: block smaller than k");

    // Starting subspace: caller columns first, seeded noise for the rest.
    std::vector<std::vector<cplx>> X;
    X.reserve(b);
    std::uint64_t seq = 0;
    for (const auto& v0 : initial) {
        if (X.size() == b) break;
        require(v0.size() == n, "banded_smallest_eigs: warm-start size mismatch");
        std::vector<cplx> v = v0;
        if (mgs_orthonormalize(v, X)) X.push_back(std::move(v));
    }
    while (X.size() < b) {
        std::vector<cplx> v = seeded_gaussian_cplx(n, opts.seed + 0x9e37u * (++seq));
        if (mgs_orthonormalize(v, X)) X.push_back(std::move(v));
    }

    double sigma = opts.shift;
    BandCholesky F;
    for (;;) {
        try {
            F = BandCholesky::factor(A, sigma, bw);
            break;
        } catch (const SolverError&) {
            if (sigma <= 0.0) throw;
            sigma = (sigma > 1e-14 * anorm) ? 0.5 * sigma : 0.0;
        }
    }
    stats.shift_used = sigma;
    stats.refactorizations = 0;

    std::vector<double> theta(b, 0.0);
    residuals_out.assign(b, std::numeric_limits<double>::infinity());
    std::vector<std::vector<cplx>> AQ(b, std::vector<cplx>(n));
    std::vector<cplx> work(n);

    for (std::size_t outer = 1;; ++outer) {
        stats.iterations = outer;

        // Inverse-iteration sweep, then re-orthonormalize; dependent columns
        // are replaced with fresh noise.
        for (auto& col : X) F.solve(col);
        std::vector<std::vector<cplx>> Q;
        Q.reserve(b);
        for (auto& col : X) {
            if (!mgs_orthonormalize(col, Q)) {
                do {
                    col = seeded_gaussian_cplx(n, opts.seed + 0x51edu * (++seq));
                } while (!mgs_orthonormalize(col, Q));
            }
            Q.push_back(std::move(col));
        }

        // Rayleigh-Ritz on span(Q).
        DenseHermitian H(b);
        for (std::size_t jc = 0; jc < b; ++jc) {
            A.apply(Q[jc], AQ[jc]);
            for (std::size_t i = 0; i <= jc; ++i) {
                const cplx hij = dot(Q[i], AQ[jc]);
                H.at(i, jc) = hij;
                H.at(jc, i) = std::conj(hij);
            }
        }
        const auto small = dense_hermitian_eigs(H, b);
        X.assign(b, std::vector<cplx>(n, cplx(0)));
        for (std::size_t e = 0; e < b; ++e) {
            for (std::size_t c = 0; c < b; ++c) axpy(small[e].vector[c], Q[c], X[e]);
            theta[e] = small[e].value;
        }

        bool done = true;
        for (std::size_t e = 0; e < b; ++e) {
            A.apply(X[e], work);
            for (std::size_t i = 0; i < n; ++i) work[i] -= theta[e] * X[e][i];
            residuals_out[e] = norm2(work);
            if (e < k && residuals_out[e] > opts.tol * anorm) done = false;
        }
        if (done) break;
        if (outer == opts.max_outer)
            throw SolverError(
                "banded_smallest_eigs: no convergence within the outer-iteration "
                "budget");

        if (opts.adaptive_shift && stats.refactorizations < 2 && outer >= 2 &&
            theta[0] > 0.0 && residuals_out[0] <= 1e-2 * theta[0]) {
            // Shift to just below the bottom Ritz value.  The cushion keeps
            // sigma < lambda_1 (the bottom eigenvalue sits within
            // residuals_out[0] of theta[0] once the latter has settled) and
            // the Ritz spread keeps a few cluster gaps between sigma and the
            // wanted values.
            const double spread = theta[std::min(k, b - 1)] - theta[0];
            const double margin =
                std::max({10.0 * residuals_out[0], 0.5 * spread, 1e-3 * theta[0]});
            const double cand = theta[0] - margin;
            if (cand > sigma && (theta[0] - sigma) > 2.5 * margin) {
                F = BandCholesky();  // release before building the replacement
                try {
                    F = BandCholesky::factor(A, cand, bw);
                    sigma = cand;
                    ++stats.refactorizations;
                    stats.shift_used = sigma;
                } catch (const SolverError&) {
                    // Overshot the bottom of the spectrum; restore the proven shift.
                    F = BandCholesky::factor(A, sigma, bw);
                }
            }
        }
    }

    std::vector<EigenPairZ> out(k);
    for (std::size_t e = 0; e < k; ++e) {
        out[e].value = theta[e];
        out[e].vector = std::move(X[e]);
    }
    residuals_out.resize(k);
    return out;
}

}  // namespace detail

/// Solves the generalized eigenproblem K x = lambda M x for the k smallest
/// eigenvalues.  The problem is reduced symmetrically by the diagonal mass;
/// eigenvectors are returned on the full node grid, mass-normalized
/// (sum m |x|^2 = 1) and phase-fixed at the center node.
inline EigenResult2D solve_eigs2d(const Operator2D& op, std::size_t k,
                                  const Solve2DOptions& opts = {}) {
    const std::size_t ndof = op.dofs();
    require(ndof > 0 && op.stiffness.n == ndof && op.mass.size() == ndof,
            "solve_eigs2d: operator not assembled");
    require(k >= 1 && k <= ndof, "solve_eigs2d: k out of range");

    std::vector<double> isqm(ndof);
    for (std::size_t i = 0; i < ndof; ++i) {
        require(op.mass[i] > 0.0, "solve_eigs2d: mass entries must be positive");
        isqm[i] = 1.0 / std::sqrt(op.mass[i]);
    }
    SparseHermitian Ahat = op.stiffness;
    for (std::size_t i = 0; i < ndof; ++i)
        for (std::size_t p = Ahat.rowptr[i]; p < Ahat.rowptr[i + 1]; ++p)
            Ahat.vals[p] *= isqm[i] * isqm[Ahat.colind[p]];
    const double anorm = Ahat.norm_bound();

    std::vector<std::vector<cplx>> initial;
    initial.reserve(opts.warm_start.size());
    for (const auto& full : opts.warm_start)
        initial.push_back(detail::reduce_to_dofs(op, full));

    EigenResult2D res;
    res.h = op.h;
    res.a = op.a;
    res.profile = op.profile;
    res.domain = op.domain;
    res.stats.norm_bound = anorm;

    const std::size_t bw = op.nt_dof;
    const double band_bytes =
        static_cast<double>(ndof) * static_cast<double>(bw + 1) * 16.0;
    const bool banded = !opts.force_iterative && !op.domain.periodic_s &&
                        band_bytes <= opts.memory_budget_bytes;

    std::vector<EigenPairZ> pairs;
    if (banded) {
        res.stats.method = "banded_inverse_iteration";
        pairs = detail::banded_smallest_eigs(Ahat, k, bw, anorm, initial, opts, res.stats,
                                             res.residuals);
    } else {
        res.stats.method = "block_cg_rayleigh_ritz";
        EigsOptions eo;
        eo.tol = opts.tol;
        eo.block = opts.block ? opts.block : k + 6;
        eo.max_outer = opts.max_outer;
        eo.seed = opts.seed;
        eo.norm_bound = anorm;
        eo.initial = std::move(initial);
        pairs = hermitian_smallest_eigs(Ahat, k, eo);
        res.residuals.assign(k, 0.0);
        std::vector<cplx> work(ndof);
        for (std::size_t e = 0; e < k; ++e) {
            Ahat.apply(pairs[e].vector, work);
            for (std::size_t i = 0; i < ndof; ++i)
                work[i] -= pairs[e].value * pairs[e].vector[i];
            res.residuals[e] = norm2(work);
        }
    }

    res.lambdas.reserve(k);
    res.eigvecs.reserve(k);
    for (std::size_t e = 0; e < k; ++e) {
        require(pairs[e].value > 0.0, "solve_eigs2d: expected a positive spectrum");
        if (e > 0)
            require(pairs[e].value >= pairs[e - 1].value,
                    "solve_eigs2d: eigenvalues out of order");
        res.lambdas.push_back(pairs[e].value);
        std::vector<cplx> full = detail::embed_from_dofs(op, pairs[e].vector);
        detail::fix_phase_at_center(full, op.domain);
        res.eigvecs.push_back(std::move(full));
    }
    return res;
}

/// Richardson extrapolation across a coarse/fine grid pair at the same h:
/// with exactly halved steps the second-order discretization error cancels in
/// (4 fine - coarse) / 3.  Returns the fine result with the extrapolated
/// eigenvalues (modes, residuals and stats stay those of the fine grid).
inline EigenResult2D richardson_combine(const EigenResult2D& coarse,
                                        const EigenResult2D& fine) {
    require(coarse.h == fine.h && coarse.a == fine.a,
            "richardson_combine: results come from different runs");
    require(coarse.domain.S == fine.domain.S && coarse.domain.T == fine.domain.T &&
                coarse.domain.periodic_s == fine.domain.periodic_s,
            "richardson_combine: domains differ");
    require(fine.domain.n_s - 1 == 2 * (coarse.domain.n_s - 1) &&
                fine.domain.n_t - 1 == 2 * (coarse.domain.n_t - 1),
            "richardson_combine: fine grid must halve the coarse steps exactly");
    require(coarse.lambdas.size() == fine.lambdas.size(),
            "richardson_combine: eigenvalue counts differ");
    EigenResult2D out = fine;
    for (std::size_t i = 0; i < out.lambdas.size(); ++i)
        out.lambdas[i] = (4.0 * fine.lambdas[i] - coarse.lambdas[i]) / 3.0;
    return out;
}

/// Bilinear interpolation of a full-grid mode from one node grid onto another
/// over the same rectangle; used to warm-start fine-grid solves from coarse
/// ones.
inline std::vector<cplx> prolong_mode_bilinear(const std::vector<cplx>& coarse,
                                               const EdgeDomain& from,
                                               const EdgeDomain& to) {
    require(coarse.size() == from.n_s * from.n_t, "prolong_mode_bilinear: size mismatch");
    require(from.S == to.S && from.T == to.T,
            "prolong_mode_bilinear: domains must cover the same rectangle");
    std::vector<cplx> fine(to.n_s * to.n_t, cplx(0));
    const double inv_ds = 1.0 / from.ds();
    const double inv_dt = 1.0 / from.dt();
    for (std::size_t j = 0; j < to.n_s; ++j) {
        const double x = (to.node_s(j) + from.S) * inv_ds;
        std::size_t jc = static_cast<std::size_t>(std::clamp(
            std::floor(x), 0.0, static_cast<double>(from.n_s - 2)));
        const double fx = std::clamp(x - static_cast<double>(jc), 0.0, 1.0);
        for (std::size_t k = 0; k < to.n_t; ++k) {
            const double y = (to.node_t(k) + from.T) * inv_dt;
            std::size_t kc = static_cast<std::size_t>(std::clamp(
                std::floor(y), 0.0, static_cast<double>(from.n_t - 2)));
            const double fy = std::clamp(y - static_cast<double>(kc), 0.0, 1.0);
            const cplx v00 = coarse[jc * from.n_t + kc];
            const cplx v01 = coarse[jc * from.n_t + kc + 1];
            const cplx v10 = coarse[(jc + 1) * from.n_t + kc];
            const cplx v11 = coarse[(jc + 1) * from.n_t + kc + 1];
            fine[j * to.n_t + k] = (1.0 - fx) * ((1.0 - fy) * v00 + fy * v01) +
                                   fx * ((1.0 - fy) * v10 + fy * v11);
        }
    }
    return fine;
}

}  // namespace magstep
