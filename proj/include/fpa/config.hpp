#ifndef FPA_CONFIG_HPP
#define FPA_CONFIG_HPP

#include <cstdint>
#include <string>

#include "fpa/averaging.hpp"
#include "fpa/force.hpp"
#include "fpa/grid.hpp"
#include "fpa/solver.hpp"

namespace fpa {

// Whole-run configuration; JSON with exactly these sections and keys,
// unknown keys are hard errors. grid.Vmax <= 0 requests the automatic
// velocity cutoff derived from the force parameters.
struct RunConfig {
    struct GridCfg {
        int Nx = 64;
        int Nv = 128;
        double L = 6.283185307179586;
        double Vmax = 0.0;
        bool operator==(const GridCfg&) const = default;
    } grid;

    ForceParams force;

    struct AveragingCfg {
        std::string variant = "cs";      // cs | double_conv | identity
        std::string kernel = "global";   // global | tent
        double r0 = 1.5707963267948966;  // tent support radius
        bool operator==(const AveragingCfg&) const = default;
    } averaging;

    struct SolverCfg {
        double dt = 1e-3;
        double T = 1.0;
        int snapshot_every = 0;
        int record_every = 100;
        bool cfl_guard = false;
        bool operator==(const SolverCfg&) const = default;
    } solver;

    struct ParticlesCfg {
        int N = 10000;
        double dt = 1e-3;
        bool noise_on = true;
        std::uint64_t seed = 12345;
        bool operator==(const ParticlesCfg&) const = default;
    } particles;

    struct DiagnosticsCfg {
        double epsilon_tilde = 0.1;
        std::string gamma_mode = "auto";  // "auto" or a number
        std::string gap_subspace = "mean_zero";
        bool hard_gate_assumptions = false;
        bool operator==(const DiagnosticsCfg&) const = default;
    } diagnostics;

    struct IoCfg {
        std::string out_dir = "out";
        std::string preset = "equilibrium";
        double preset_a = 0.5;
        double preset_T = 1.0;
        std::string input_state;
        std::string input_ensemble;
        bool operator==(const IoCfg&) const = default;
    } io;

    bool operator==(const RunConfig&) const = default;

    void validate() const;

    Grid make_grid() const;  // resolves Vmax <= 0 via auto_vmax
    AveragingModel make_model(int Nx) const;
    InitSpec make_init_spec() const;
    GapSubspace gap_subspace_enum() const;
    double gamma_fixed() const;  // -1 when gamma_mode == "auto"
};

RunConfig parse_config(const std::string& json_text);
std::string serialize_config(const RunConfig& cfg);
RunConfig load_config_file(const std::string& path);

}  // namespace fpa

#endif
