#pragma once

// Fitting measured low eigenvalues of the 2D edge operator against the
// predicted three-term expansion
//
//   lambda_n(h) = h * beta
//               + h^{3/2} * k_max * M3
//               + h^{7/4} * (2n - 1) * sqrt(k2 * M3 * c2 / 2)
//               + (higher order),
//
// where beta, M3, c2 come from the one-dimensional fiber invariants and
// k_max, k2 describe the curvature peak.  The report carries both a global
// least-squares fit of the coefficients and per-h "peel-off" diagnostics in
// which the known lower orders are subtracted and the remainder is rescaled
// to expose the next coefficient.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "magstep/core.hpp"
#include "magstep/curvature.hpp"
#include "magstep/edge2d.hpp"
#include "magstep/invariants.hpp"

namespace magstep {

// Least-squares coefficients (x0, x1, x2) of y(h) ~ x0*h + x1*h^{3/2} +
// x2*h^{7/4}.  With exactly three distinct samples this solves the
// interpolation system directly; with more it solves the normal equations.
// Columns are rescaled to unit max before elimination so that the mixed
// powers of small h stay well conditioned.
inline std::array<double, 3> fit_three_term(const std::vector<double>& h,
                                            const std::vector<double>& y) {
    require(h.size() == y.size(), "fit_three_term: h and y lengths differ");
    {
        std::vector<double> distinct = h;
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()),
                       distinct.end());
        require(distinct.size() >= 3,
                "fit_three_term: need at least three distinct h values");
        require(distinct.front() > 0.0,
                "fit_three_term: h values must be positive");
    }

    const std::size_t n = h.size();
    std::vector<std::array<double, 3>> V(n);
    for (std::size_t i = 0; i < n; ++i)
        V[i] = {h[i], std::pow(h[i], 1.5), std::pow(h[i], 1.75)};

    std::array<double, 3> scale{};
    for (int j = 0; j < 3; ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(V[i][j]));
        scale[j] = m;  // positive because every h is positive
        for (std::size_t i = 0; i < n; ++i) V[i][j] /= m;
    }

    double A[3][3] = {};
    double rhs[3] = {};
    if (n == 3) {
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) A[i][j] = V[i][j];
            rhs[i] = y[i];
        }
    } else {
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (std::size_t r = 0; r < n; ++r) s += V[r][i] * V[r][j];
                A[i][j] = s;
            }
            double s = 0.0;
            for (std::size_t r = 0; r < n; ++r) s += V[r][i] * y[r];
            rhs[i] = s;
        }
    }

    // Gaussian elimination with partial pivoting on the scaled 3x3 system.
    int perm[3] = {0, 1, 2};
    for (int c = 0; c < 3; ++c) {
        int p = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::abs(A[perm[r]][c]) > std::abs(A[perm[p]][c])) p = r;
        std::swap(perm[c], perm[p]);
        const double piv = A[perm[c]][c];
        require(std::abs(piv) > 1e-14,
                "fit_three_term: singular system (h values too close)");
        for (int r = c + 1; r < 3; ++r) {
            const double f = A[perm[r]][c] / piv;
            for (int j = c; j < 3; ++j) A[perm[r]][j] -= f * A[perm[c]][j];
            rhs[perm[r]] -= f * rhs[perm[c]];
        }
    }
    std::array<double, 3> x{};
    for (int c = 2; c >= 0; --c) {
        double s = rhs[perm[c]];
        for (int j = c + 1; j < 3; ++j) s -= A[perm[c]][j] * x[j];
        x[c] = s / A[perm[c]][c];
    }
    for (int j = 0; j < 3; ++j) x[j] /= scale[j];
    return x;
}

// Per-h peel-off of the measured pair (lambda1, lambda2) against the
// successive orders of the expansion.
struct FitRow {
    double h = 0.0;
    double lambda1 = 0.0;    // measured ground eigenvalue
    double lambda2 = 0.0;    // measured second eigenvalue
    double c0 = 0.0;         // lambda1 / h                       -> beta
    double c1 = 0.0;         // (lambda1/h - beta) / h^{1/2}      -> k_max * M3
    double Lambda1 = 0.0;    // lambda1/h - beta - h^{1/2} k_max M3
    double Lambda2 = 0.0;    // same remainder for lambda2
    double third1 = 0.0;     // Lambda1 / h^{3/4}   -> sqrt(k2 M3 c2 / 2)
    double third2 = 0.0;     // Lambda2 / h^{3/4}   -> 3 sqrt(k2 M3 c2 / 2)
    double gap = 0.0;        // lambda2 - lambda1
    double gap_ratio = 0.0;  // gap / h^{7/4}       -> 2 sqrt(k2 M3 c2 / 2)
};

struct FitReport {
    double a = 0.0;
    CurvatureProfile profile;
    std::vector<FitRow> rows;  // sorted by decreasing h

    // predictions from the fiber invariants
    double pred_beta = 0.0;    // limit of lambda1 / h
    double pred_first = 0.0;   // k_max * M3
    double pred_third1 = 0.0;  // sqrt(k2 * M3 * c2 / 2)
    double pred_third2 = 0.0;  // 3 * pred_third1
    double pred_gap = 0.0;     // 2 * pred_third1

    // fitted coefficients of lambda_n(h) on the basis {h, h^{3/2}, h^{7/4}}
    std::array<double, 3> fit_lambda1{};
    std::array<double, 3> fit_lambda2{};

    // relative deviations of fit and smallest-h peel-off from the predictions
    double dev_beta_fit = 0.0;
    double dev_first_fit = 0.0;
    double dev_third1_fit = 0.0;
    double dev_third1_tail = 0.0;
    double dev_gap_tail = 0.0;
    double ladder_tail = 0.0;  // third2 / third1 at the smallest h -> 3
    double dev_ladder_tail = 0.0;

    // log-log slopes over the two smallest h values
    double slope_first = 0.0;  // of |lambda1/h - beta|            -> 1/2
    double slope_third = 0.0;  // of |Lambda1|                     -> 3/4
};

namespace detail {

inline double loglog_slope(double h_big, double v_big, double h_small,
                           double v_small) {
    const double fb = std::abs(v_big);
    const double fs = std::abs(v_small);
    if (fb < 1e-300 || fs < 1e-300) return 0.0;
    return std::log(fb / fs) / std::log(h_big / h_small);
}

}  // namespace detail

// Builds the asymptotics report for a family of 2D edge results at
// decreasing h.  All results must share the step ratio and curvature
// profile, each must carry at least two eigenvalues, and the profile must
// have a genuine curvature peak (the third-order prediction degenerates for
// a straight edge).
inline FitReport fit_asymptotics(const std::vector<EigenResult2D>& results,
                                 const SpectralInvariants& inv) {
    require(results.size() >= 3,
            "fit_asymptotics: need results at three or more h values");
    const double a = results.front().a;
    const CurvatureProfile& prof = results.front().profile;
    require(prof.kind != CurvatureKind::flat,
            "fit_asymptotics: curvature profile must have a peak");
    require(a == inv.a, "fit_asymptotics: invariants computed at a different a");
    for (const EigenResult2D& r : results) {
        require(r.h > 0.0, "fit_asymptotics: h must be positive");
        require(r.lambdas.size() >= 2,
                "fit_asymptotics: each result needs at least two eigenvalues");
        require(r.a == a, "fit_asymptotics: mixed field ratios");
        require(r.profile.kind == prof.kind && r.profile.k_max == prof.k_max &&
                    r.profile.k2 == prof.k2,
                "fit_asymptotics: mixed curvature profiles");
    }

    const double beta = (std::isfinite(inv.beta_ext) && inv.beta_ext != 0.0)
                            ? inv.beta_ext
                            : inv.beta_a;
    const double c2v = (std::isfinite(inv.c2_ext) && inv.c2_ext != 0.0)
                           ? inv.c2_ext
                           : inv.c2;
    require(c2v > 0.0, "fit_asymptotics: c2 must be positive");
    const double third_sq = prof.k2 * inv.M3 * c2v / 2.0;
    require(third_sq > 0.0,
            "fit_asymptotics: k2 * M3 must be positive for the third-order "
            "prediction");

    FitReport rep;
    rep.a = a;
    rep.profile = prof;
    rep.pred_beta = beta;
    rep.pred_first = prof.k_max * inv.M3;
    rep.pred_third1 = std::sqrt(third_sq);
    rep.pred_third2 = 3.0 * rep.pred_third1;
    rep.pred_gap = 2.0 * rep.pred_third1;

    std::vector<const EigenResult2D*> sorted;
    sorted.reserve(results.size());
    for (const EigenResult2D& r : results) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(),
              [](const EigenResult2D* x, const EigenResult2D* y) {
                  return x->h > y->h;
              });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        require(sorted[i]->h < sorted[i - 1]->h,
                "fit_asymptotics: duplicate h values");

    std::vector<double> hs, l1s, l2s;
    for (const EigenResult2D* r : sorted) {
        FitRow row;
        row.h = r->h;
        row.lambda1 = r->lambdas[0];
        row.lambda2 = r->lambdas[1];
        row.c0 = row.lambda1 / row.h;
        const double sqh = std::sqrt(row.h);
        row.c1 = (row.c0 - beta) / sqh;
        row.Lambda1 = row.c0 - beta - sqh * rep.pred_first;
        row.Lambda2 = row.lambda2 / row.h - beta - sqh * rep.pred_first;
        const double h34 = std::pow(row.h, 0.75);
        row.third1 = row.Lambda1 / h34;
        row.third2 = row.Lambda2 / h34;
        row.gap = row.lambda2 - row.lambda1;
        row.gap_ratio = row.gap / std::pow(row.h, 1.75);
        rep.rows.push_back(row);
        hs.push_back(row.h);
        l1s.push_back(row.lambda1);
        l2s.push_back(row.lambda2);
    }

    rep.fit_lambda1 = fit_three_term(hs, l1s);
    rep.fit_lambda2 = fit_three_term(hs, l2s);

    rep.dev_beta_fit = std::abs(rep.fit_lambda1[0] - beta) / beta;
    rep.dev_first_fit =
        std::abs(rep.fit_lambda1[1] - rep.pred_first) / std::abs(rep.pred_first);
    rep.dev_third1_fit =
        std::abs(rep.fit_lambda1[2] - rep.pred_third1) / rep.pred_third1;

    const FitRow& tail = rep.rows.back();
    rep.dev_third1_tail =
        std::abs(tail.third1 - rep.pred_third1) / rep.pred_third1;
    rep.dev_gap_tail = std::abs(tail.gap_ratio - rep.pred_gap) / rep.pred_gap;
    rep.ladder_tail = (tail.third1 != 0.0) ? tail.third2 / tail.third1 : 0.0;
    rep.dev_ladder_tail = std::abs(rep.ladder_tail - 3.0) / 3.0;

    const FitRow& prev = rep.rows[rep.rows.size() - 2];
    rep.slope_first = detail::loglog_slope(prev.h, prev.c0 - beta, tail.h,
                                           tail.c0 - beta);
    rep.slope_third =
        detail::loglog_slope(prev.h, prev.Lambda1, tail.h, tail.Lambda1);
    return rep;
}

}  // namespace magstep
