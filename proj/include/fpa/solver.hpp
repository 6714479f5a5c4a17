#ifndef FPA_SOLVER_HPP
#define FPA_SOLVER_HPP

#include <string>
#include <vector>

#include "fpa/averaging.hpp"
#include "fpa/diagnostics.hpp"
#include "fpa/force.hpp"
#include "fpa/grid.hpp"

namespace fpa {

enum class Preset { equilibrium, shifted_maxwellian, two_bump, from_file };

struct InitSpec {
    Preset preset = Preset::equilibrium;
    double a = 0.5;  // shifted_maxwellian drift
    double T = 1.0;  // shifted_maxwellian temperature
    std::string file;
};

KineticState init_state(const Grid& grid, const InitSpec& spec, const EquilibriumTable& eq);

// Strang-split solver: conservative semi-Lagrangian free transport (periodic
// piecewise-linear reconstruction) and an implicit Chang-Cooper collision
// step whose discrete stationary state is the exact Gibbs table.
class KineticSolver {
  public:
    KineticSolver(const Grid& grid, const ForceParams& force, const AveragingModel& model,
                  int threads = 1);

    // Exact shift x -> x - v dt per velocity row; returns the mass removed by
    // the positivity clip. Sub-steps leave state.t alone; strang_step owns the
    // time stamp.
    double transport_step(KineticState& state, double dt) const;

    // Per x-cell implicit drift-diffusion in v with W(v) = V(v) - [u]_rho v,
    // zero-flux at +/-Vmax. Macro fields are frozen for the step.
    void collision_step(KineticState& state, const MacroFields& macro, double dt) const;

    // Half transport, macro refresh, full collision, half transport; advances
    // state.t by dt. Returns the macro fields used by the collision stage.
    MacroFields strang_step(KineticState& state, double dt) const;

    double last_clipped_mass() const { return clipped_; }
    const EquilibriumTable& equilibrium_table() const { return eq_; }
    const AveragingModel& model() const { return model_; }
    const ForceParams& force() const { return force_; }
    const Grid& grid() const { return grid_; }

  private:
    Grid grid_;
    ForceParams force_;
    AveragingModel model_;
    EquilibriumTable eq_;
    int threads_;
    mutable double clipped_ = 0.0;
};

enum class RunStatus { ok, assumption_gate_failed, numeric_abort };

struct SolverRunOptions {
    double dt = 1e-3;
    double T = 1.0;
    int record_every = 100;    // steps between DiagnosticsRecords (0 = only t=0 and T)
    int snapshot_every = 0;    // steps between stored snapshots (0 = none)
    bool cfl_guard = false;    // refuse Vmax dt / dx > 1 when set
    bool hard_gate_assumptions = false;
    GapSubspace gap_subspace = GapSubspace::mean_zero;
};

struct RunResult {
    RunStatus status = RunStatus::ok;
    std::string message;
    std::vector<DiagnosticsRecord> records;
    std::vector<KineticState> snapshots;
    KineticState final_state;
    double max_clipped_per_step = 0.0;
};

RunResult run_solver(const KineticSolver& solver, KineticState state, const SolverRunOptions& opt);

// Snapshot text format "FPA1": header, grid line, then Nx*Nv cell values
// row-major (x outer), 17 significant digits.
void write_snapshot(const std::string& path, const KineticState& state);
std::string snapshot_text(const KineticState& state);
KineticState read_snapshot(const std::string& path);
KineticState parse_snapshot(const std::string& text);

}  // namespace fpa

#endif
