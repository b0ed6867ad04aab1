// magstep command-line driver.
//
//   magstep <band|invariants|quasimode|solve2d|fit|diagnostics|verify>
//           --config <path> [--output <dir>] [--jobs N]
//
// Exit codes: 0 success, 1 verify-check failure, 2 validation failure
// (malformed usage or config), 3 solver failure.

#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "magstep/runner.hpp"

namespace {

struct SubArgs {
    std::string config_path;
    std::string output_override;
    std::size_t jobs = 1;
};

void print_checks(const std::vector<magstep::VerifyCheck>& checks) {
    for (const auto& c : checks) {
        const std::string hi = c.hi >= magstep::kVerifyUnbounded
                                   ? "inf"
                                   : magstep::format_double(c.hi);
        std::printf("%-4s %-12s %-34s value=%s window=[%s, %s] (%.1fs)\n",
                    c.pass ? "PASS" : "FAIL", c.group.c_str(), c.name.c_str(),
                    magstep::format_double(c.value).c_str(),
                    magstep::format_double(c.lo).c_str(), hi.c_str(),
                    c.seconds);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "magstep: band functions, spectral invariants, quasi-modes, and "
        "curved-edge eigenvalue asymptotics for the step magnetic "
        "Schrodinger operator"};
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"band", "sweep the lowest fiber eigenvalue over a momentum window"},
        {"invariants", "compute (and cache) the spectral invariants"},
        {"quasimode", "quasi-mode truncation residuals over h_list"},
        {"solve2d", "eigenpairs of the curved 2D model over h_list"},
        {"fit", "three-term asymptotic fit of 2D eigenvalues"},
        {"diagnostics", "localization/projection diagnostics per h"},
        {"verify", "run acceptance check groups and write a report"}};

    std::map<std::string, SubArgs> args;
    for (const auto& [name, blurb] : commands) {
        CLI::App* sub = app.add_subcommand(name, blurb);
        SubArgs& sa = args[name];
        sub->add_option("--config", sa.config_path, "JSON config file")
            ->required();
        sub->add_option("--output", sa.output_override,
                        "output directory (overrides config output_dir)");
        sub->add_option("--jobs", sa.jobs, "worker pool width (default 1)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    const SubArgs& sa = args[sub->get_name()];

    try {
        const magstep::Command cmd = magstep::parse_command(sub->get_name());
        magstep::RunConfig cfg = magstep::load_run_config(cmd, sa.config_path);
        if (!sa.output_override.empty()) cfg.output_dir = sa.output_override;

        std::vector<magstep::VerifyCheck> checks;
        const bool ok = magstep::run_command(cmd, cfg, sa.jobs, &checks);
        if (cmd == magstep::Command::verify) {
            print_checks(checks);
            if (!ok) {
                for (const auto& c : checks) {
                    if (!c.pass)
                        std::fprintf(stderr, "verify: check failed: %s/%s\n",
                                     c.group.c_str(), c.name.c_str());
                }
                return 1;
            }
        }
        return 0;
    } catch (const magstep::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const magstep::SolverError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 3;
    }
}
