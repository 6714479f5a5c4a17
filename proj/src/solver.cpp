#include "fpa/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fpa/parallel.hpp"

namespace fpa {

namespace {

// B(x) = x / (e^x - 1), the exponential-fitting weight; B(w), B(-w) pairs
// make the discrete Gibbs ratio exp(-(W_{j+1} - W_j)) flux-free.
double bern(double x) {
    if (std::abs(x) < 1e-10) return 1.0 - 0.5 * x + x * x / 12.0;
    return x / std::expm1(x);
}

}  // namespace

KineticState init_state(const Grid& grid, const InitSpec& spec, const EquilibriumTable& eq) {
    grid.validate();
    KineticState st;
    st.grid = grid;
    st.t = 0.0;
    st.f.assign(grid.size(), 0.0);
    switch (spec.preset) {
        case Preset::equilibrium: {
            for (int i = 0; i < grid.Nx; ++i)
                for (int j = 0; j < grid.Nv; ++j) st.at(i, j) = eq.f_inf[j];
            return st;  // already unit mass by construction of the table
        }
        case Preset::shifted_maxwellian: {
            if (!(spec.T > 0.0)) throw std::invalid_argument("shifted_maxwellian: T must be > 0");
            for (int j = 0; j < grid.Nv; ++j) {
                const double d = grid.v(j) - spec.a;
                const double val = std::exp(-d * d / (2.0 * spec.T));
                for (int i = 0; i < grid.Nx; ++i) st.at(i, j) = val;
            }
            break;
        }
        case Preset::two_bump: {
            // Two counter-propagating wrapped-Gaussian bumps; mirror-symmetric
            // under (x,v) -> (L-x,-v).
            const double sx = grid.L / 10.0;
            const double ab = 1.0, Tb = 0.5;
            for (int i = 0; i < grid.Nx; ++i) {
                double g1 = 0.0, g2 = 0.0;
                for (int k = -6; k <= 6; ++k) {
                    const double d1 = grid.x(i) - 0.25 * grid.L + k * grid.L;
                    const double d2 = grid.x(i) - 0.75 * grid.L + k * grid.L;
                    g1 += std::exp(-d1 * d1 / (2.0 * sx * sx));
                    g2 += std::exp(-d2 * d2 / (2.0 * sx * sx));
                }
                for (int j = 0; j < grid.Nv; ++j) {
                    const double vp = grid.v(j) - ab;
                    const double vm = grid.v(j) + ab;
                    st.at(i, j) = g1 * std::exp(-vp * vp / (2.0 * Tb)) +
                                  g2 * std::exp(-vm * vm / (2.0 * Tb));
                }
            }
            break;
        }
        case Preset::from_file: {
            KineticState loaded = read_snapshot(spec.file);
            if (!(loaded.grid == grid)) {
                throw std::runtime_error("init_state: snapshot grid does not match the configured grid");
            }
            return loaded;
        }
    }
    double m = st.mass();
    if (!(m > 0.0)) throw std::runtime_error("init_state: preset produced non-positive mass");
    for (double& v : st.f) v /= m;
    return st;
}

KineticSolver::KineticSolver(const Grid& grid, const ForceParams& force, const AveragingModel& model,
                             int threads)
    : grid_(grid), force_(force), model_(model), eq_(equilibrium(grid, force)),
      threads_(std::max(1, threads)) {}

double KineticSolver::transport_step(KineticState& state, double dt) const {
    const Grid& g = grid_;
    std::vector<double> out(g.size());
    parallel_for(g.Nv, threads_, [&](int jb, int je) {
        std::vector<double> row(g.Nx);
        for (int j = jb; j < je; ++j) {
            const double s = g.v(j) * dt / g.dx();
            const long k = static_cast<long>(std::floor(s));
            const double th = s - static_cast<double>(k);
            for (int i = 0; i < g.Nx; ++i) row[i] = state.f[g.idx(i, j)];
            for (int i = 0; i < g.Nx; ++i) {
                long im = (i - k) % g.Nx;
                if (im < 0) im += g.Nx;
                const int i0 = static_cast<int>(im);
                const int i1 = (i0 + g.Nx - 1) % g.Nx;  // donor one cell upwind
                const int i0p = (i0 + 1) % g.Nx;
                const int i1m = (i1 + g.Nx - 1) % g.Nx;
                const double slope0 = 0.5 * (row[i0p] - row[i1]);
                const double slope1 = 0.5 * (row[i0] - row[i1m]);
                // increment form: x-uniform rows pass through bit-exactly
                out[g.idx(i, j)] = row[i0] + th * (row[i1] - row[i0]) +
                                   0.5 * th * (1.0 - th) * (slope1 - slope0);
            }
        }
    });
    // Positivity clip; the reconstruction is not monotone so small
    // undershoots appear near smooth minima. Clipping alone would inject
    // mass, so each clipped row is rescaled back to its pre-clip sum.
    double clipped = 0.0;
    for (int j = 0; j < g.Nv; ++j) {
        double neg = 0.0, pos = 0.0;
        for (int i = 0; i < g.Nx; ++i) {
            const double v = out[g.idx(i, j)];
            if (v < 0.0) {
                neg -= v;
            } else {
                pos += v;
            }
        }
        if (neg == 0.0) continue;
        clipped += neg;
        const double scale = pos > 0.0 ? (pos - neg) / pos : 0.0;
        for (int i = 0; i < g.Nx; ++i) {
            double& v = out[g.idx(i, j)];
            v = v < 0.0 ? 0.0 : (scale > 0.0 ? v * scale : v);
        }
    }
    clipped_ = clipped * g.dx() * g.dv();
    state.f.swap(out);
    return clipped_;
}

void KineticSolver::collision_step(KineticState& state, const MacroFields& macro, double dt) const {
    const Grid& g = grid_;
    if (!(dt > 0.0)) throw std::invalid_argument("collision_step: dt must be > 0");
    const double dv = g.dv();
    parallel_for(g.Nx, threads_, [&](int ib, int ie) {
        std::vector<double> dia(g.Nv), low(g.Nv), upp(g.Nv), rhs(g.Nv), cp(g.Nv);
        for (int i = ib; i < ie; ++i) {
            const double r = dt * macro.s_rho[i] / (dv * dv);
            for (int j = 0; j < g.Nv; ++j) {
                dia[j] = 1.0;
                low[j] = 0.0;
                upp[j] = 0.0;
                rhs[j] = state.f[g.idx(i, j)];
            }
            for (int j = 0; j + 1 < g.Nv; ++j) {
                const double w = (eq_.V[j + 1] - eq_.V[j]) - macro.u_avg[i] * dv;
                const double Bp = bern(w);
                const double Bm = bern(-w);
                dia[j] += r * Bp;
                upp[j] = -r * Bm;
                dia[j + 1] += r * Bm;
                low[j + 1] = -r * Bp;
            }
            // Thomas sweep; the matrix is an M-matrix (diagonally dominant,
            // nonpositive off-diagonals) so no pivoting is needed.
            cp[0] = upp[0] / dia[0];
            rhs[0] /= dia[0];
            for (int j = 1; j < g.Nv; ++j) {
                const double m = dia[j] - low[j] * cp[j - 1];
                if (m == 0.0 || !std::isfinite(m)) {
                    throw std::runtime_error("collision_step: tridiagonal breakdown at x-cell " +
                                             std::to_string(i) + ", v-cell " + std::to_string(j));
                }
                cp[j] = upp[j] / m;
                rhs[j] = (rhs[j] - low[j] * rhs[j - 1]) / m;
            }
            state.f[g.idx(i, g.Nv - 1)] = rhs[g.Nv - 1];
            for (int j = g.Nv - 2; j >= 0; --j) {
                state.f[g.idx(i, j)] = rhs[j] - cp[j] * state.f[g.idx(i, j + 1)];
            }
        }
    });
}

MacroFields KineticSolver::strang_step(KineticState& state, double dt) const {
    double clip = transport_step(state, 0.5 * dt);
    MacroFields macro = macro_fields(state, model_, force_);
    collision_step(state, macro, dt);
    clip += transport_step(state, 0.5 * dt);
    state.t += dt;
    clipped_ = clip;
    return macro;
}

RunResult run_solver(const KineticSolver& solver, KineticState state, const SolverRunOptions& opt) {
    RunResult res;
    const Grid& g = state.grid;
    if (opt.cfl_guard && g.Vmax * opt.dt / g.dx() > 1.0) {
        throw std::invalid_argument("run_solver: CFL guard tripped, Vmax dt / dx > 1");
    }
    const long nsteps = std::lround(opt.T / opt.dt);
    const int rec_every = opt.record_every > 0 ? opt.record_every : static_cast<int>(nsteps);
    const EquilibriumTable& eq = solver.equilibrium_table();
    double clip_since_record = 0.0;

    auto record = [&](const KineticState& st) {
        DiagnosticsRecord r = make_record(st, eq, solver.model(), solver.force(), opt.gap_subspace);
        r.clipped_mass = clip_since_record;
        clip_since_record = 0.0;
        res.records.push_back(r);
        return r;
    };

    DiagnosticsRecord r0 = record(state);
    if (opt.hard_gate_assumptions && !(r0.pass_i && r0.pass_ii && r0.pass_iii && r0.pass_iv)) {
        res.status = RunStatus::assumption_gate_failed;
        res.message = "assumption gate failed at t=0";
        res.final_state = std::move(state);
        return res;
    }
    KineticState last_good = state;
    for (long n = 1; n <= nsteps; ++n) {
        solver.strang_step(state, opt.dt);
        state.t = n * opt.dt;  // avoid drift from repeated addition
        clip_since_record = std::max(clip_since_record, solver.last_clipped_mass());
        res.max_clipped_per_step = std::max(res.max_clipped_per_step, solver.last_clipped_mass());
        const double m = state.mass();
        if (!std::isfinite(m)) {
            res.status = RunStatus::numeric_abort;
            res.message = "non-finite mass at t=" + std::to_string(state.t) + "; keeping last good state";
            res.final_state = std::move(last_good);
            return res;
        }
        if (n % rec_every == 0 || n == nsteps) {
            DiagnosticsRecord r = record(state);
            if (!std::isfinite(r.H)) {
                res.status = RunStatus::numeric_abort;
                res.message = "non-finite entropy at t=" + std::to_string(state.t);
                res.final_state = std::move(last_good);
                return res;
            }
            if (opt.hard_gate_assumptions && !(r.pass_i && r.pass_ii && r.pass_iii && r.pass_iv)) {
                res.status = RunStatus::assumption_gate_failed;
                res.message = "assumption gate failed at t=" + std::to_string(state.t);
                res.final_state = std::move(state);
                return res;
            }
            last_good = state;
        }
        if (opt.snapshot_every > 0 && n % opt.snapshot_every == 0) {
            res.snapshots.push_back(state);
        }
    }
    fill_dhdt_fd(res.records);
    res.final_state = std::move(state);
    return res;
}

std::string snapshot_text(const KineticState& state) {
    std::ostringstream os;
    char buf[32];
    os << "FPA1\n";
    std::snprintf(buf, sizeof buf, "%.17g", state.grid.L);
    os << state.grid.Nx << ' ' << state.grid.Nv << ' ' << buf << ' ';
    std::snprintf(buf, sizeof buf, "%.17g", state.grid.Vmax);
    os << buf << ' ';
    std::snprintf(buf, sizeof buf, "%.17g", state.t);
    os << buf << '\n';
    for (int i = 0; i < state.grid.Nx; ++i) {
        for (int j = 0; j < state.grid.Nv; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", state.at(i, j));
            os << buf << (j + 1 == state.grid.Nv ? '\n' : ' ');
        }
    }
    return os.str();
}

void write_snapshot(const std::string& path, const KineticState& state) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_snapshot: cannot open " + path);
    out << snapshot_text(state);
}

KineticState parse_snapshot(const std::string& text) {
    std::istringstream in(text);
    std::string magic;
    in >> magic;
    if (magic != "FPA1") throw std::runtime_error("parse_snapshot: bad magic '" + magic + "'");
    KineticState st;
    in >> st.grid.Nx >> st.grid.Nv >> st.grid.L >> st.grid.Vmax >> st.t;
    if (!in) throw std::runtime_error("parse_snapshot: bad header line");
    st.grid.validate();
    st.f.resize(st.grid.size());
    for (std::size_t c = 0; c < st.f.size(); ++c) {
        if (!(in >> st.f[c])) throw std::runtime_error("parse_snapshot: truncated cell data");
        if (st.f[c] < 0.0) throw std::runtime_error("parse_snapshot: negative cell value");
    }
    return st;
}

KineticState read_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_snapshot: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_snapshot(ss.str());
}

}  // namespace fpa
