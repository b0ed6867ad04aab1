#pragma once

// Subcommand implementations behind the CLI driver: each run_* function
// consumes a validated RunConfig, performs the computation (scheduling
// independent jobs on a bounded worker pool), and writes its artifact files
// under the output directory.  Output rows always follow config order, never
// completion order, so identical configs yield byte-identical artifacts.

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "magstep/cache.hpp"
#include "magstep/core.hpp"
#include "magstep/diagnostics2d.hpp"
#include "magstep/edge2d.hpp"
#include "magstep/fiber.hpp"
#include "magstep/fit.hpp"
#include "magstep/io.hpp"
#include "magstep/quasimode.hpp"
#include "magstep/runconfig.hpp"
#include "magstep/verify.hpp"

namespace magstep {

namespace detail {

/// Runs fn(0..n-1) on up to `jobs` worker threads.  The caller provides
/// pre-sized result storage indexed by job id, so output order is
/// independent of scheduling.  The first exception thrown by any worker is
/// rethrown on the calling thread after all workers join.
template <class Fn>
void parallel_for_ordered(std::size_t n, std::size_t jobs, Fn&& fn) {
    if (n == 0) return;
    const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline std::filesystem::path artifact_path(const RunConfig& cfg,
                                           const std::string& name) {
    return std::filesystem::path(cfg.output_dir) / name;
}

/// JSON-safe upper bound: the unbounded sentinel becomes null.
inline nlohmann::ordered_json json_bound(double hi) {
    if (hi >= kVerifyUnbounded) return nullptr;
    return hi;
}

}  // namespace detail

/// Cached-or-computed invariants plus the exact serialized document bytes.
inline std::pair<SpectralInvariants, std::string> obtain_invariants(
    const RunConfig& cfg) {
    const std::filesystem::path dir = resolve_cache_dir(cfg.cache_dir);
    if (auto bytes = cache_load_bytes(dir, cfg.a, cfg.grid1d)) {
        return {invariants_from_json(*bytes), std::move(*bytes)};
    }
    SpectralInvariants inv = compute_invariants(cfg.a, cfg.grid1d);
    std::string bytes = cache_store(dir, inv);
    return {std::move(inv), std::move(bytes)};
}

// ---------------------------------------------------------------------------
// band: sweep the lowest fiber eigenvalue over the momentum window and emit
// the two-column table band.csv (xi, mu).
// ---------------------------------------------------------------------------
inline void run_band(const RunConfig& cfg, std::size_t jobs) {
    const std::size_t count = cfg.xi.count;
    std::vector<double> xi(count), mu(count);
    const double span = cfg.xi.max - cfg.xi.min;
    for (std::size_t i = 0; i < count; ++i) {
        xi[i] = (count == 1) ? cfg.xi.min
                             : cfg.xi.min + span * static_cast<double>(i) /
                                                static_cast<double>(count - 1);
    }
    detail::parallel_for_ordered(count, jobs, [&](std::size_t i) {
        mu[i] = band_value(FiberParams{cfg.a, xi[i]}, cfg.grid1d);
    });
    CsvTable table({"xi", "mu"});
    for (std::size_t i = 0; i < count; ++i) table.add_row({xi[i], mu[i]});
    table.write(detail::artifact_path(cfg, "band.csv"));
}

// ---------------------------------------------------------------------------
// invariants: compute (or replay from cache) the spectral invariants for
// (a, grid) and write the cache document itself as invariants.json, so a
// second run reproduces the file byte for byte.
// ---------------------------------------------------------------------------
inline void run_invariants(const RunConfig& cfg, std::size_t /*jobs*/) {
    auto [inv, bytes] = obtain_invariants(cfg);
    (void)inv;
    atomic_write_file(detail::artifact_path(cfg, "invariants.json"), bytes);
}

// ---------------------------------------------------------------------------
// quasimode: build the oscillator-mode expansion once and report the
// truncation residuals over h_list in quasimode_residuals.csv.
// ---------------------------------------------------------------------------
inline void run_quasimode(const RunConfig& cfg, std::size_t jobs) {
    auto [inv, bytes] = obtain_invariants(cfg);
    (void)bytes;
    const QuasiModeExpansion e =
        build_expansion(inv, cfg.profile.k_max, cfg.profile.k2, cfg.mode_n,
                        default_sigma_grid(inv, cfg.profile.k2));
    const std::size_t n = cfg.h_list.size();
    std::vector<PnewResidual> rows(n);
    detail::parallel_for_ordered(n, jobs, [&](std::size_t i) {
        rows[i] = apply_Pnew_truncated_report(cfg.h_list[i], e, inv, {});
    });
    CsvTable table({"h", "residual_flat", "residual_weighted", "mu_h"});
    for (std::size_t i = 0; i < n; ++i)
        table.add_row({cfg.h_list[i], rows[i].flat, rows[i].weighted,
                       rows[i].mu_h});
    table.write(detail::artifact_path(cfg, "quasimode_residuals.csv"));
}

namespace detail {

/// One curved-model solve at h: coarse grid from the config, optionally a
/// warm-started doubled grid whose eigenvalues are Richardson-combined.
inline EigenResult2D solve_model_at(const RunConfig& cfg, double h) {
    Solve2DOptions opts;
    opts.tol = cfg.solver_tol;
    Operator2D op = assemble_operator2d(h, cfg.a, cfg.profile, cfg.domain);
    EigenResult2D coarse = solve_eigs2d(op, cfg.n_modes, opts);
    if (!cfg.richardson) return coarse;
    EdgeDomain fine = cfg.domain;
    fine.n_s = 2 * (cfg.domain.n_s - 1) + 1;
    fine.n_t = 2 * (cfg.domain.n_t - 1) + 1;
    Solve2DOptions fopts = opts;
    for (const auto& vec : coarse.eigvecs)
        fopts.warm_start.push_back(
            prolong_mode_bilinear(vec, cfg.domain, fine));
    Operator2D opf = assemble_operator2d(h, cfg.a, cfg.profile, fine);
    EigenResult2D refined = solve_eigs2d(opf, cfg.n_modes, fopts);
    return richardson_combine(coarse, refined);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// solve2d: eigenpairs of the curved model over h_list; writes eigs2d.csv
// (h, index, lambda, residual, iterations) and optional binary mode dumps.
// ---------------------------------------------------------------------------
inline void run_solve2d(const RunConfig& cfg, std::size_t jobs) {
    const std::size_t n = cfg.h_list.size();
    std::vector<EigenResult2D> results(n);
    detail::parallel_for_ordered(n, jobs, [&](std::size_t i) {
        results[i] = detail::solve_model_at(cfg, cfg.h_list[i]);
    });
    CsvTable table({"h", "index", "lambda", "residual", "iterations"});
    for (std::size_t i = 0; i < n; ++i) {
        const EigenResult2D& r = results[i];
        for (std::size_t k = 0; k < r.lambdas.size(); ++k)
            table.add_row({r.h, static_cast<double>(k), r.lambdas[k],
                           r.residuals[k],
                           static_cast<double>(r.stats.iterations)});
    }
    table.write(detail::artifact_path(cfg, "eigs2d.csv"));
    if (cfg.dump_modes) {
        for (std::size_t i = 0; i < n; ++i) {
            const EigenResult2D& r = results[i];
            for (std::size_t k = 0; k < r.eigvecs.size(); ++k) {
                const std::string name = "mode_h" + format_double(r.h) + "_k" +
                                         std::to_string(k) + ".mstp";
                write_grid_dump(detail::artifact_path(cfg, name),
                                r.domain.n_s, r.domain.n_t, r.eigvecs[k]);
            }
        }
    }
}

namespace detail {

/// Parses an eigs2d.csv table back into per-h eigenvalue lists (file order).
inline std::vector<EigenResult2D> parse_eigs2d_csv(const RunConfig& cfg,
                                                   const std::string& path) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    bool header_seen = false;
    std::map<double, std::vector<std::pair<int, double>>> by_h;
    std::vector<double> h_order;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            require(line.rfind("h,index,lambda", 0) == 0,
                    path + ": expected an eigenvalue table with columns "
                           "h,index,lambda,...");
            header_seen = true;
            continue;
        }
        std::istringstream row(line);
        std::string field;
        std::vector<double> vals;
        while (std::getline(row, field, ',')) {
            try {
                vals.push_back(std::stod(field));
            } catch (const std::exception&) {
                throw ValidationError(path + ":" + std::to_string(lineno) +
                                      ": malformed numeric field '" + field +
                                      "'");
            }
        }
        require(vals.size() >= 3, path + ":" + std::to_string(lineno) +
                                      ": expected at least three columns");
        const double h = vals[0];
        if (by_h.find(h) == by_h.end()) h_order.push_back(h);
        by_h[h].emplace_back(static_cast<int>(vals[1]), vals[2]);
    }
    require(header_seen, path + ": missing header row");
    std::vector<EigenResult2D> results;
    for (double h : h_order) {
        auto rows = by_h[h];
        std::sort(rows.begin(), rows.end());
        EigenResult2D r;
        r.h = h;
        r.a = cfg.a;
        r.profile = cfg.profile;
        r.domain = cfg.domain;
        for (const auto& [idx, lam] : rows) {
            (void)idx;
            r.lambdas.push_back(lam);
        }
        r.residuals.assign(r.lambdas.size(), 0.0);
        results.push_back(std::move(r));
    }
    return results;
}

inline nlohmann::ordered_json fit_report_json(const FitReport& rep) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = 1;
    doc["a"] = rep.a;
    doc["profile"] = {{"kind", curvature_kind_name(rep.profile.kind)},
                      {"k_max", rep.profile.k_max},
                      {"k2", rep.profile.k2}};
    doc["predictions"] = {{"beta", rep.pred_beta},
                          {"first", rep.pred_first},
                          {"third1", rep.pred_third1},
                          {"third2", rep.pred_third2},
                          {"gap", rep.pred_gap}};
    doc["fit"] = {{"lambda1", rep.fit_lambda1}, {"lambda2", rep.fit_lambda2}};
    doc["deviations"] = {{"beta_fit", rep.dev_beta_fit},
                         {"first_fit", rep.dev_first_fit},
                         {"third1_fit", rep.dev_third1_fit},
                         {"third1_tail", rep.dev_third1_tail},
                         {"gap_tail", rep.dev_gap_tail},
                         {"ladder_tail", rep.dev_ladder_tail}};
    doc["ladder_tail"] = rep.ladder_tail;
    doc["slopes"] = {{"first", rep.slope_first}, {"third", rep.slope_third}};
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const FitRow& r : rep.rows) {
        rows.push_back({{"h", r.h},
                        {"lambda1", r.lambda1},
                        {"lambda2", r.lambda2},
                        {"c0", r.c0},
                        {"c1", r.c1},
                        {"Lambda1", r.Lambda1},
                        {"Lambda2", r.Lambda2},
                        {"third1", r.third1},
                        {"third2", r.third2},
                        {"gap", r.gap},
                        {"gap_ratio", r.gap_ratio}});
    }
    doc["rows"] = std::move(rows);
    return doc;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// fit: eigenvalues from a previous table (input_csv) or fresh solves, fitted
// against the three-term expansion; writes fit_report.json.
// ---------------------------------------------------------------------------
inline void run_fit(const RunConfig& cfg, std::size_t jobs) {
    auto [inv, bytes] = obtain_invariants(cfg);
    (void)bytes;
    std::vector<EigenResult2D> results;
    if (!cfg.input_csv.empty()) {
        results = detail::parse_eigs2d_csv(cfg, cfg.input_csv);
    } else {
        results.resize(cfg.h_list.size());
        detail::parallel_for_ordered(cfg.h_list.size(), jobs,
                                     [&](std::size_t i) {
                                         results[i] = detail::solve_model_at(
                                             cfg, cfg.h_list[i]);
                                     });
    }
    const FitReport rep = fit_asymptotics(results, inv);
    atomic_write_file(detail::artifact_path(cfg, "fit_report.json"),
                      detail::fit_report_json(rep).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// diagnostics: localization and projection diagnostics of the computed
// ground state per h; writes diagnostics.csv and a small summary document.
// Eigenvectors are consumed directly, so the solves stay on the configured
// grid (no Richardson pairing here).
// ---------------------------------------------------------------------------
inline void run_diagnostics(const RunConfig& cfg, std::size_t jobs) {
    auto [inv, bytes] = obtain_invariants(cfg);
    (void)bytes;
    const std::size_t n = cfg.h_list.size();
    std::vector<Diagnostics2D> diag(n);
    std::vector<double> lambda1(n);
    detail::parallel_for_ordered(n, jobs, [&](std::size_t i) {
        Solve2DOptions opts;
        opts.tol = cfg.solver_tol;
        Operator2D op =
            assemble_operator2d(cfg.h_list[i], cfg.a, cfg.profile, cfg.domain);
        EigenResult2D res = solve_eigs2d(op, cfg.n_modes, opts);
        lambda1[i] = res.lambdas[0];
        diag[i] = localization_diagnostics(res, inv, 0);
    });

    CsvTable table({"h",           "lambda1",       "norm_v",
                    "defect_pi0",  "defect_dtau",   "defect_tau",
                    "norm_Rnew",   "mass_n2",       "mass_n4",
                    "mass_n8",     "mass_t2",       "mass_t4",
                    "mass_t8",     "ratio_normal",  "ratio_tangent",
                    "rate_normal", "rate_tangent",  "dsigma_norm",
                    "dsigma2_norm"});
    for (std::size_t i = 0; i < n; ++i) {
        const Diagnostics2D& d = diag[i];
        table.add_row({d.h, lambda1[i], d.proj.norm_v, d.proj.defect_pi0,
                       d.proj.defect_dtau, d.proj.defect_tau, d.proj.norm_Rnew,
                       d.decay.mass_normal[0], d.decay.mass_normal[1],
                       d.decay.mass_normal[2], d.decay.mass_tangent[0],
                       d.decay.mass_tangent[1], d.decay.mass_tangent[2],
                       d.decay.ratio_normal, d.decay.ratio_tangent,
                       d.decay.rate_normal, d.decay.rate_tangent,
                       d.decay.dsigma_norm, d.decay.dsigma2_norm});
    }
    table.write(detail::artifact_path(cfg, "diagnostics.csv"));

    nlohmann::ordered_json doc;
    doc["schema_version"] = 1;
    doc["a"] = cfg.a;
    doc["rows"] = n;
    if (n >= 2) {
        std::vector<double> hs(cfg.h_list.begin(), cfg.h_list.end());
        std::vector<double> defect(n);
        for (std::size_t i = 0; i < n; ++i)
            defect[i] = diag[i].proj.defect_pi0 / diag[i].proj.norm_v;
        doc["defect_slope"] = detail::loglog_slope_all(hs, defect);
    }
    atomic_write_file(detail::artifact_path(cfg, "diagnostics_summary.json"),
                      doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// verify: run the selected acceptance groups and write verify_report.json
// with per-check values, windows, runtimes, and pass/fail flags.  Returns
// true when every check passed.
// ---------------------------------------------------------------------------
inline bool run_verify(const RunConfig& cfg, std::size_t /*jobs*/,
                       std::vector<VerifyCheck>* checks_out = nullptr) {
    std::vector<std::string> groups = cfg.groups;
    if (groups.empty()) groups = known_verify_groups();
    for (const std::string& g : groups) {
        bool known = false;
        for (const std::string& k : known_verify_groups()) known |= (k == g);
        require(known, "unknown verify group: " + g);
    }

    VerifyContext ctx;
    std::vector<VerifyCheck> checks;
    for (const std::string& g : groups) run_verify_group(g, ctx, checks);

    std::size_t passed = 0;
    for (const VerifyCheck& c : checks) passed += c.pass ? 1 : 0;

    nlohmann::ordered_json doc;
    doc["schema_version"] = 1;
    doc["groups"] = groups;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const VerifyCheck& c : checks) {
        rows.push_back({{"group", c.group},
                        {"criterion", c.criterion},
                        {"name", c.name},
                        {"value", c.value},
                        {"lo", c.lo},
                        {"hi", detail::json_bound(c.hi)},
                        {"pass", c.pass},
                        {"seconds", c.seconds},
                        {"note", c.note}});
    }
    doc["checks"] = std::move(rows);
    doc["counts"] = {{"total", checks.size()},
                     {"passed", passed},
                     {"failed", checks.size() - passed}};
    const bool all_pass = passed == checks.size();
    doc["all_pass"] = all_pass;
    atomic_write_file(detail::artifact_path(cfg, "verify_report.json"),
                      doc.dump(2) + "\n");

    if (checks_out) *checks_out = std::move(checks);
    return all_pass;
}

/// Dispatches a parsed config to its subcommand runner.  For verify the
/// return value distinguishes "ran, some checks failed" (false) from success.
inline bool run_command(Command cmd, const RunConfig& cfg, std::size_t jobs,
                        std::vector<VerifyCheck>* checks_out = nullptr) {
    switch (cmd) {
        case Command::band: run_band(cfg, jobs); return true;
        case Command::invariants: run_invariants(cfg, jobs); return true;
        case Command::quasimode: run_quasimode(cfg, jobs); return true;
        case Command::solve2d: run_solve2d(cfg, jobs); return true;
        case Command::fit: run_fit(cfg, jobs); return true;
        case Command::diagnostics: run_diagnostics(cfg, jobs); return true;
        case Command::verify: return run_verify(cfg, jobs, checks_out);
    }
    throw ValidationError("run_command: unhandled subcommand");
}

}  // namespace magstep
