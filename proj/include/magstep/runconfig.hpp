#pragma once

// Strict JSON run configuration for the command-line driver.  One document
// format for every subcommand; each subcommand validates exactly the blocks
// it consumes, unknown keys are rejected everywhere, and parse errors carry
// line/column anchors.

#include <cstddef>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "magstep/core.hpp"
#include "magstep/curvature.hpp"
#include "magstep/edge2d.hpp"
#include "magstep/grid.hpp"
#include "magstep/io.hpp"

namespace magstep {

enum class Command {
    band,
    invariants,
    quasimode,
    solve2d,
    fit,
    diagnostics,
    verify,
};

inline Command parse_command(std::string_view s) {
    if (s == "band") return Command::band;
    if (s == "invariants") return Command::invariants;
    if (s == "quasimode") return Command::quasimode;
    if (s == "solve2d") return Command::solve2d;
    if (s == "fit") return Command::fit;
    if (s == "diagnostics") return Command::diagnostics;
    if (s == "verify") return Command::verify;
    throw ValidationError("unknown subcommand: " + std::string(s));
}

inline const char* command_name(Command c) {
    switch (c) {
        case Command::band: return "band";
        case Command::invariants: return "invariants";
        case Command::quasimode: return "quasimode";
        case Command::solve2d: return "solve2d";
        case Command::fit: return "fit";
        case Command::diagnostics: return "diagnostics";
        case Command::verify: return "verify";
    }
    return "?";
}

struct XiRange {
    double min = -2.0;
    double max = -1e-3;
    std::size_t count = 81;
};

struct RunConfig {
    double a = -0.5;
    Grid1D grid1d{20.0, 4001};
    CurvatureProfile profile{};
    EdgeDomain domain{};
    std::vector<double> h_list;
    std::size_t n_modes = 2;
    double solver_tol = 1e-8;
    double resolvent_tol = 1e-10;
    std::string output_dir = "out";
    std::string cache_dir = "cache";
    XiRange xi{};                     // band
    std::size_t mode_n = 1;           // quasimode: oscillator index
    bool richardson = true;           // solve2d/fit: refine + extrapolate
    bool dump_modes = false;          // solve2d: write binary mode dumps
    std::string input_csv;            // fit: consume an existing eigenvalue table
    std::vector<std::string> groups;  // verify
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, const std::string& where,
                           std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) {
            if (it.key() == k) {
                known = true;
                break;
            }
        }
        require(known,
                "config: unknown key '" + it.key() + "' in " + where);
    }
}

template <class T>
inline void get_if(const nlohmann::json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

/// Converts a byte offset from a JSON parse error into "line:column".
inline std::string line_anchor(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return std::to_string(line) + ":" + std::to_string(col);
}

}  // namespace detail

/// Parses and validates a configuration document for `cmd`.  `origin` names
/// the source (file path) in error messages.
inline RunConfig parse_run_config(Command cmd, const std::string& text,
                                  const std::string& origin) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(origin + ":" +
                              detail::line_anchor(text, e.byte) + ": " +
                              e.what());
    }
    require(doc.is_object(), origin + ": top level must be a JSON object");

    detail::reject_unknown(
        doc, "top level",
        {"a", "grid1d", "profile", "domain", "h_list", "n_modes", "tolerances",
         "output_dir", "cache_dir", "xi", "mode_n", "richardson", "dump_modes",
         "input_csv", "groups"});

    RunConfig cfg;
    detail::get_if(doc, "a", cfg.a);
    if (doc.contains("grid1d")) {
        const auto& g = doc.at("grid1d");
        detail::reject_unknown(g, "grid1d", {"L", "n"});
        double L = cfg.grid1d.L;
        std::size_t n = cfg.grid1d.n_points;
        detail::get_if(g, "L", L);
        detail::get_if(g, "n", n);
        cfg.grid1d = Grid1D(L, n);  // constructor re-validates
    }
    if (doc.contains("profile")) {
        const auto& p = doc.at("profile");
        detail::reject_unknown(p, "profile", {"kind", "k_max", "k2"});
        if (p.contains("kind")) {
            const std::string kind = p.at("kind").get<std::string>();
            if (kind == "gaussian_bump") {
                cfg.profile.kind = CurvatureKind::gaussian_bump;
            } else if (kind == "cosine_bump") {
                cfg.profile.kind = CurvatureKind::cosine_bump;
            } else if (kind == "flat") {
                cfg.profile.kind = CurvatureKind::flat;
                cfg.profile.k_max = 0.0;
                cfg.profile.k2 = 0.0;
            } else {
                throw ValidationError("config: unknown profile kind '" + kind +
                                      "'");
            }
        }
        detail::get_if(p, "k_max", cfg.profile.k_max);
        detail::get_if(p, "k2", cfg.profile.k2);
    }
    if (doc.contains("domain")) {
        const auto& d = doc.at("domain");
        detail::reject_unknown(d, "domain",
                               {"S", "T", "n_s", "n_t", "periodic_s"});
        detail::get_if(d, "S", cfg.domain.S);
        detail::get_if(d, "T", cfg.domain.T);
        detail::get_if(d, "n_s", cfg.domain.n_s);
        detail::get_if(d, "n_t", cfg.domain.n_t);
        detail::get_if(d, "periodic_s", cfg.domain.periodic_s);
    }
    detail::get_if(doc, "h_list", cfg.h_list);
    detail::get_if(doc, "n_modes", cfg.n_modes);
    if (doc.contains("tolerances")) {
        const auto& t = doc.at("tolerances");
        detail::reject_unknown(t, "tolerances", {"solver", "resolvent"});
        detail::get_if(t, "solver", cfg.solver_tol);
        detail::get_if(t, "resolvent", cfg.resolvent_tol);
        require(cfg.solver_tol > 0.0 && cfg.resolvent_tol > 0.0,
                "config: tolerances must be positive");
    }
    detail::get_if(doc, "output_dir", cfg.output_dir);
    detail::get_if(doc, "cache_dir", cfg.cache_dir);
    if (doc.contains("xi")) {
        const auto& x = doc.at("xi");
        detail::reject_unknown(x, "xi", {"min", "max", "count"});
        detail::get_if(x, "min", cfg.xi.min);
        detail::get_if(x, "max", cfg.xi.max);
        detail::get_if(x, "count", cfg.xi.count);
        require(cfg.xi.count >= 1, "config: xi.count must be at least 1");
        require(cfg.xi.count == 1 || cfg.xi.max > cfg.xi.min,
                "config: xi.max must exceed xi.min");
    }
    detail::get_if(doc, "mode_n", cfg.mode_n);
    detail::get_if(doc, "richardson", cfg.richardson);
    detail::get_if(doc, "dump_modes", cfg.dump_modes);
    detail::get_if(doc, "input_csv", cfg.input_csv);
    detail::get_if(doc, "groups", cfg.groups);

    // h_list ordering is global: strictly decreasing wherever given.
    for (std::size_t i = 1; i < cfg.h_list.size(); ++i) {
        require(cfg.h_list[i] < cfg.h_list[i - 1],
                "config: h_list must be strictly decreasing");
    }
    for (double h : cfg.h_list) {
        require(h > 0.0 && h < 1.0, "config: every h must lie in (0, 1)");
    }

    // Command-specific block validation (module invariants re-checked here).
    const bool fiber_cmd = cmd == Command::band || cmd == Command::invariants ||
                           cmd == Command::quasimode;
    if (fiber_cmd) {
        require(cfg.a >= -1.0 && cfg.a < 0.0,
                "config: the field ratio a must lie in [-1, 0) for fiber "
                "computations");
    }
    switch (cmd) {
        case Command::band:
            break;
        case Command::invariants:
            break;
        case Command::quasimode:
            require(cfg.mode_n >= 1, "config: mode_n must be at least 1");
            require(cfg.profile.k2 < 0.0,
                    "config: quasimode requires a curvature peak (k2 < 0)");
            require(!cfg.h_list.empty(), "config: h_list must not be empty");
            break;
        case Command::solve2d:
        case Command::fit:
        case Command::diagnostics: {
            validate_edge_field_ratio(cfg.a);
            cfg.profile.validate();
            cfg.domain.validate(cfg.profile);
            require(cfg.n_modes >= 1, "config: n_modes must be at least 1");
            if (cmd == Command::fit) {
                require(cfg.n_modes >= 2,
                        "config: fit needs at least two modes per h");
            }
            const bool needs_h =
                cmd != Command::fit || cfg.input_csv.empty();
            if (needs_h) {
                require(!cfg.h_list.empty(),
                        "config: h_list must not be empty");
            }
            break;
        }
        case Command::verify:
            break;
    }
    return cfg;
}

inline RunConfig load_run_config(Command cmd, const std::string& path) {
    return parse_run_config(cmd, read_file(path), path);
}

}  // namespace magstep
