#ifndef FPA_PARTICLES_HPP
#define FPA_PARTICLES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fpa/averaging.hpp"
#include "fpa/force.hpp"
#include "fpa/grid.hpp"
#include "fpa/solver.hpp"

namespace fpa {

struct ParticleEnsemble {
    std::vector<double> m, x, v;  // masses sum to 1, positions in [0,L)
    double L = 6.283185307179586;
    double t = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t step = 0;  // completed EM steps, part of the noise key

    int N() const { return static_cast<int>(m.size()); }
};

struct SdeParams {
    double dt = 1e-3;
    bool noise_on = true;
    ForceParams force;
    Kernel kernel;
    int threads = 1;
};

struct DriftResult {
    std::vector<double> s;     // s_i = sum_j m_j phi(d_ij)
    std::vector<double> vbar;  // [v]_i
};

// Cucker-Smale strengths and velocity averages with the periodic distance;
// cell-list accelerated for compactly supported kernels.
DriftResult cs_drift(const ParticleEnsemble& ens, const Kernel& kernel, int threads = 1);

// One Euler-Maruyama step; noise keyed by (seed, step, agent).
void em_step(ParticleEnsemble& ens, const SdeParams& params);

struct DensityResult {
    KineticState state;
    double bandwidth_x = 0.0, bandwidth_v = 0.0;  // 0 = no smoothing applied
};

// Mass-weighted phase-space histogram, unit mass; optional Gaussian smoothing
// (Scott-type bandwidth per axis when smooth=true and bandwidths not given).
DensityResult empirical_density(const ParticleEnsemble& ens, const Grid& grid, bool smooth = false,
                                double hx = 0.0, double hv = 0.0);

struct Moments {
    double momentum = 0.0;        // mass-weighted mean velocity
    double kinetic_energy = 0.0;  // mass-weighted |v|^2 / 2
    double max_speed = 0.0;
    std::vector<double> speed_hist;  // counts of |v| in uniform bins
    double speed_hist_max = 0.0;     // upper edge of the histogram
};

Moments empirical_moments(const ParticleEnsemble& ens, int hist_bins = 32);

// Mean-field samplers matching the solver presets; velocities for the
// equilibrium preset are drawn from the tabulated f_inf by inverse CDF.
ParticleEnsemble init_ensemble(int N, double L, const InitSpec& spec, const EquilibriumTable& eq,
                               std::uint64_t seed);

// Text format "FPP1": header, "N L t seed", then one "m x v" line per agent.
std::string ensemble_text(const ParticleEnsemble& ens);
void write_ensemble(const std::string& path, const ParticleEnsemble& ens);
ParticleEnsemble parse_ensemble(const std::string& text);
ParticleEnsemble read_ensemble(const std::string& path);

}  // namespace fpa

#endif
