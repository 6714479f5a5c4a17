#include "fpa/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "fpa/diagnostics.hpp"
#include "fpa/particles.hpp"
#include "fpa/solver.hpp"

namespace fpa {

namespace fs = std::filesystem;

void atomic_write_text(const std::string& path, const std::string& content) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("atomic_write_text: cannot open " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("atomic_write_text: short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

int resolve_threads(int cli_threads) {
    if (cli_threads > 0) return cli_threads;
    if (const char* env = std::getenv("FPA_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

std::string snapshot_name(const std::string& dir, int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshot_%04d.fpa", index);
    return (fs::path(dir) / buf).string();
}

int status_to_exit(const RunResult& res) {
    switch (res.status) {
        case RunStatus::ok:
            return exit_code::ok;
        case RunStatus::assumption_gate_failed:
            return exit_code::assumption_gate;
        case RunStatus::numeric_abort:
            return exit_code::numeric_abort;
    }
    return exit_code::numeric_abort;
}

}  // namespace

int cmd_solve(const RunConfig& cfg, int threads) {
    const Grid grid = cfg.make_grid();
    const AveragingModel model = cfg.make_model(grid.Nx);
    KineticSolver solver(grid, cfg.force, model, threads);
    KineticState state = init_state(grid, cfg.make_init_spec(), solver.equilibrium_table());

    SolverRunOptions opt;
    opt.dt = cfg.solver.dt;
    opt.T = cfg.solver.T;
    opt.record_every = cfg.solver.record_every;
    opt.snapshot_every = cfg.solver.snapshot_every;
    opt.cfl_guard = cfg.solver.cfl_guard;
    opt.hard_gate_assumptions = cfg.diagnostics.hard_gate_assumptions;
    opt.gap_subspace = cfg.gap_subspace_enum();

    RunResult res = run_solver(solver, std::move(state), opt);
    if (!res.message.empty()) std::cerr << "run: " << res.message << "\n";

    const std::string dir = cfg.io.out_dir;
    fs::create_directories(dir);
    atomic_write_text((fs::path(dir) / "series.csv").string(), series_csv_text(res.records));
    int snap_idx = 0;
    for (const auto& snap : res.snapshots) {
        atomic_write_text(snapshot_name(dir, snap_idx++), snapshot_text(snap));
    }
    atomic_write_text(snapshot_name(dir, snap_idx), snapshot_text(res.final_state));

    // Assumption audit of the final state.
    MacroFields macro = macro_fields(res.final_state, model, cfg.force);
    AssumptionReport rep = make_assumption_report(macro.rho, macro.u, macro.u_F, model, grid.dx(),
                                                  cfg.gap_subspace_enum());
    atomic_write_text((fs::path(dir) / "assumptions.json").string(), rep.to_json());

    // Decay fit over the second half of the run.
    std::vector<double> ts, Hs;
    for (const auto& r : res.records) {
        ts.push_back(r.t);
        Hs.push_back(r.H);
    }
    try {
        DecayFit fit = fit_decay(ts, Hs, 0.5 * cfg.solver.T, cfg.solver.T);
        atomic_write_text((fs::path(dir) / "fit.json").string(), fit.to_json());
    } catch (const std::invalid_argument& e) {
        std::cerr << "fit: skipped (" << e.what() << ")\n";
    }
    return status_to_exit(res);
}

int cmd_particles(const RunConfig& cfg, int threads) {
    const Grid grid = cfg.make_grid();
    const AveragingModel model = cfg.make_model(grid.Nx);
    const EquilibriumTable eq = equilibrium(grid, cfg.force);

    InitSpec spec = cfg.make_init_spec();
    spec.file = cfg.io.input_ensemble;
    ParticleEnsemble ens = init_ensemble(cfg.particles.N, cfg.grid.L, spec, eq, cfg.particles.seed);

    SdeParams params;
    params.dt = cfg.particles.dt;
    params.noise_on = cfg.particles.noise_on;
    params.force = cfg.force;
    params.kernel = model.kernel;
    params.threads = threads;

    const long nsteps = std::lround(cfg.solver.T / cfg.particles.dt);
    const int rec_every = cfg.solver.record_every > 0 ? cfg.solver.record_every
                                                      : std::max(1L, nsteps);

    const std::string dir = cfg.io.out_dir;
    fs::create_directories(dir);
    std::ostringstream csv;
    csv << "t,momentum,kinetic_energy,max_speed\n";
    char buf[32];
    auto put = [&](double v, char sep) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        csv << buf << sep;
    };
    int snap_idx = 0;
    auto record = [&](const ParticleEnsemble& e) {
        Moments mo = empirical_moments(e);
        put(e.t, ',');
        put(mo.momentum, ',');
        put(mo.kinetic_energy, ',');
        put(mo.max_speed, '\n');
        if (!std::isfinite(mo.kinetic_energy)) {
            throw std::runtime_error("cmd_particles: non-finite moments at t=" + std::to_string(e.t));
        }
    };

    record(ens);
    for (long n = 1; n <= nsteps; ++n) {
        em_step(ens, params);
        if (n % rec_every == 0 || n == nsteps) record(ens);
        if (cfg.solver.snapshot_every > 0 && n % cfg.solver.snapshot_every == 0) {
            atomic_write_text((fs::path(dir) / ("ensemble_" + std::to_string(snap_idx) + ".fpp")).string(),
                              ensemble_text(ens));
            // histogram snapshot in the solver format for side-by-side comparison
            DensityResult dens = empirical_density(ens, grid);
            atomic_write_text(snapshot_name(dir, snap_idx), snapshot_text(dens.state));
            ++snap_idx;
        }
    }
    atomic_write_text((fs::path(dir) / "ensemble_final.fpp").string(), ensemble_text(ens));
    {
        DensityResult dens = empirical_density(ens, grid);
        atomic_write_text((fs::path(dir) / "density_final.fpa").string(), snapshot_text(dens.state));
    }
    // final speed histogram
    {
        Moments mo = empirical_moments(ens);
        std::ostringstream hist;
        hist << "bin_lo,bin_hi,mass\n";
        const double wbin = mo.speed_hist_max / mo.speed_hist.size();
        for (std::size_t b = 0; b < mo.speed_hist.size(); ++b) {
            hist << b * wbin << ',' << (b + 1) * wbin << ',' << mo.speed_hist[b] << '\n';
        }
        atomic_write_text((fs::path(dir) / "speed_hist.csv").string(), hist.str());
    }
    atomic_write_text((fs::path(dir) / "moments.csv").string(), csv.str());
    return exit_code::ok;
}

int cmd_check(const RunConfig& cfg, const std::string& snapshot_path, int threads) {
    (void)threads;
    KineticState state;
    if (!snapshot_path.empty()) {
        state = read_snapshot(snapshot_path);
    } else {
        const Grid grid = cfg.make_grid();
        state = init_state(grid, cfg.make_init_spec(), equilibrium(grid, cfg.force));
    }
    // The audit runs on the snapshot's own grid with the configured model.
    const AveragingModel model = cfg.make_model(state.grid.Nx);
    MacroFields macro = macro_fields(state, model, cfg.force);
    AssumptionReport rep = make_assumption_report(macro.rho, macro.u, macro.u_F, model,
                                                  state.grid.dx(), cfg.gap_subspace_enum());
    fs::create_directories(cfg.io.out_dir);
    atomic_write_text((fs::path(cfg.io.out_dir) / "assumptions.json").string(), rep.to_json());
    auto line = [&](const char* name, bool pass, double value) {
        std::cout << (pass ? "PASS" : "FAIL") << " assumption " << name << " (" << value << ")\n";
    };
    line("(i)   c0 > 0            ", rep.pass_i, rep.c0);
    line("(ii)  operator bounded  ", rep.pass_ii, rep.op_norm_ii);
    line("(iii) spectral gap      ", rep.pass_iii,
         cfg.gap_subspace_enum() == GapSubspace::full ? rep.gap_sup_full : rep.gap_sup_mean_zero);
    line("(iv)  force ratio < 1   ", rep.pass_iv, rep.force_ratio);
    return exit_code::ok;
}

int cmd_fit(const std::string& series_csv, double t0, double t1, const std::string& out_path) {
    std::ifstream in(series_csv);
    if (!in) {
        std::cerr << "error: cannot open " << series_csv << "\n";
        return exit_code::config_error;
    }
    std::string header;
    if (!std::getline(in, header)) {
        std::cerr << "error: empty CSV " << series_csv << "\n";
        return exit_code::config_error;
    }
    // locate t and H columns by name
    int col_t = -1, col_H = -1, col = 0;
    std::stringstream hs(header);
    std::string name;
    while (std::getline(hs, name, ',')) {
        if (name == "t") col_t = col;
        if (name == "H") col_H = col;
        ++col;
    }
    if (col_t < 0 || col_H < 0) {
        std::cerr << "error: CSV needs 't' and 'H' columns\n";
        return exit_code::config_error;
    }
    std::vector<double> ts, Hs;
    std::string linestr;
    while (std::getline(in, linestr)) {
        if (linestr.empty()) continue;
        std::stringstream ls(linestr);
        std::string cellstr;
        int c = 0;
        double tv = 0.0, hv = 0.0;
        while (std::getline(ls, cellstr, ',')) {
            if (c == col_t) tv = std::strtod(cellstr.c_str(), nullptr);
            if (c == col_H) hv = std::strtod(cellstr.c_str(), nullptr);
            ++c;
        }
        ts.push_back(tv);
        Hs.push_back(hv);
    }
    try {
        DecayFit fit = fit_decay(ts, Hs, t0, t1);
        const std::string text = fit.to_json();
        std::cout << text;
        if (!out_path.empty()) atomic_write_text(out_path, text);
        return exit_code::ok;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::config_error;
    }
}

}  // namespace fpa
