#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fpa/averaging.hpp"
#include "fpa/cli.hpp"

namespace {

fpa::RunConfig load_or_die(const std::string& path) { return fpa::load_config_file(path); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fpa: kinetic Fokker-Planck-Alignment solver, particle simulator and "
                 "hypocoercivity audit"};
    app.require_subcommand(1);

    std::string config_path, out_override, snapshot_path, series_path, fit_out;
    int threads = 0;
    double t0 = 0.0, t1 = 0.0;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* opt = sub->add_option("--config", config_path, "JSON run configuration");
        if (needs_config) opt->required();
        sub->add_option("--out", out_override, "override io.out_dir");
        sub->add_option("--threads", threads, "worker threads (default: FPA_THREADS or hardware)");
    };

    CLI::App* solve = app.add_subcommand("solve", "integrate the kinetic equation");
    add_common(solve, true);
    CLI::App* particles = app.add_subcommand("particles", "run the interacting-particle simulator");
    add_common(particles, true);
    CLI::App* check = app.add_subcommand("check", "audit the decay assumptions on a snapshot");
    add_common(check, true);
    check->add_option("--snapshot", snapshot_path, "FPA1 snapshot to audit (default: io preset)");
    CLI::App* fit = app.add_subcommand("fit", "fit an exponential decay rate to a series.csv");
    fit->add_option("--series", series_path, "series.csv with t and H columns")->required();
    fit->add_option("--t0", t0, "fit window start")->required();
    fit->add_option("--t1", t1, "fit window end")->required();
    fit->add_option("--out", fit_out, "optional path for the fit JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fpa::exit_code::config_error;
    }

    try {
        if (fit->parsed()) return fpa::cmd_fit(series_path, t0, t1, fit_out);
        fpa::RunConfig cfg = load_or_die(config_path);
        if (!out_override.empty()) cfg.io.out_dir = out_override;
        const int nthreads = fpa::resolve_threads(threads);
        if (solve->parsed()) return fpa::cmd_solve(cfg, nthreads);
        if (particles->parsed()) return fpa::cmd_particles(cfg, nthreads);
        if (check->parsed()) return fpa::cmd_check(cfg, snapshot_path, nthreads);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fpa::exit_code::config_error;
    } catch (const fpa::degenerate_density_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fpa::exit_code::numeric_abort;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fpa::exit_code::numeric_abort;
    }
    return fpa::exit_code::config_error;
}
