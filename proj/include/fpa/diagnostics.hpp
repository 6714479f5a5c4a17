#ifndef FPA_DIAGNOSTICS_HPP
#define FPA_DIAGNOSTICS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fpa/averaging.hpp"
#include "fpa/force.hpp"
#include "fpa/grid.hpp"

namespace fpa {

// Velocity moments plus the averaging fields, per x-cell. Cells with
// rho below the vacuum floor carry a flag; their u, u_F are set to 0.
struct MacroFields {
    std::vector<double> rho, u, u_F, u_V, s_rho, u_avg;
    std::vector<std::uint8_t> vacuum;
    int n_vacuum = 0;
};

MacroFields macro_fields(const KineticState& state, const AveragingModel& model,
                         const ForceParams& fp);

// sum f log(f/f_inf) dx dv with 0 log 0 = 0; cells with f < 1e-30 contribute 0.
double relative_entropy(const KineticState& state, const EquilibriumTable& eq);

struct FisherInfo {
    double Ivv_w = 0.0;  // s_rho-weighted form from the entropy identity
    double Ivv = 0.0, Ixv = 0.0, Ixx = 0.0;
    int masked_cells = 0;
    double masked_mass = 0.0;
};

FisherInfo fisher_functionals(const KineticState& state, const EquilibriumTable& eq,
                              const MacroFields& macro);

struct Dissipation {
    double Dvv = 0.0, Dxv = 0.0;
};

Dissipation dissipation_functionals(const KineticState& state, const EquilibriumTable& eq,
                                    const MacroFields& macro);

// Csiszar-Kullback slack 2H - ||f - f_inf||_1^2 (classical constant 2 for
// unit-mass densities).
double ck_check(const KineticState& state, const EquilibriumTable& eq, double H);

struct EntropyProduction {
    double dHdt_formula = 0.0;  // -Ivv_w + <u_V, [u]_rho>_kappa
    double uV_norm2 = 0.0;
    double pairing = 0.0;
    double c3 = 0.0;            // realized from measured (epsilon0, epsilon1)
    bool gap_bound_ok = false;  // pairing <= (1 - c3) ||u_V||^2
};

EntropyProduction entropy_production(const KineticState& state, const EquilibriumTable& eq,
                                     const MacroFields& macro, double epsilon0, double epsilon1);

struct DiagnosticsRecord {
    double t = 0.0, mass = 0.0, H = 0.0;
    double Ivv_w = 0.0, Ivv = 0.0, Ixv = 0.0, Ixx = 0.0;
    double Dvv = 0.0, Dxv = 0.0;
    double uV_norm2 = 0.0, pairing = 0.0;
    double gap_sup = 0.0, force_ratio = 0.0;
    double ck_slack = 0.0, logsob_ratio = 0.0;
    double dHdt_formula = 0.0, dHdt_fd = 0.0;
    // extras carried for the monitors and gates, not exported to CSV
    double u_norm2 = 0.0;  // ||u||^2_kappa
    double c0 = 0.0;
    double clipped_mass = 0.0;
    bool pass_i = true, pass_ii = true, pass_iii = true, pass_iv = true;
    bool force_vacuous = false;
};

DiagnosticsRecord make_record(const KineticState& state, const EquilibriumTable& eq,
                              const AveragingModel& model, const ForceParams& fp,
                              GapSubspace subspace);

// Centered finite differences of H in time; endpoints get NaN.
void fill_dhdt_fd(std::vector<DiagnosticsRecord>& records);

// Time-series CSV with the fixed column set; non-finite values print as
// nan/inf.
void write_series_csv(const std::string& path, const std::vector<DiagnosticsRecord>& records);
std::string series_csv_text(const std::vector<DiagnosticsRecord>& records);

struct LemmaFits {
    // Smallest admissible constant per interior sample, one series per lemma.
    std::vector<double> t, c_lemma1, c_lemma2, c_lemma3;
    double max1 = 0.0, max2 = 0.0, max3 = 0.0;
};

// Fits the constants of the three Fisher-derivative estimates along a
// trajectory window; the constants are existential, so no hard assertion.
LemmaFits lemma_monitors(std::span<const DiagnosticsRecord> records, double lambda, double c0);

struct ModifiedSeries {
    std::vector<double> t, Itilde, lyapunov;  // lyapunov = Itilde + gamma H
    double gamma = 0.0;
    double kappa_coeff = 0.0;  // lambda c0 / c_lemma
    double frac_nonincreasing = 0.0;
};

// gamma_auto < 0 means "choose gamma so gamma H_0 = Itilde_0".
ModifiedSeries modified_functional(std::span<const DiagnosticsRecord> records, double epsilon,
                                   double lambda, double c0, double c_lemma, double gamma_fixed = -1.0);

struct DecayFit {
    double t0 = 0.0, t1 = 0.0;
    double delta_fit = 0.0;  // -slope of log H
    double C_fit = 0.0;      // exp(intercept)
    double r_squared = 0.0;
    int n_samples = 0;

    std::string to_json() const;
};

// Least squares on (t, log H) over [t0,t1], using samples with H > 1e-14.
// Throws std::invalid_argument with fewer than 10 usable samples.
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& H, double t0, double t1);

}  // namespace fpa

#endif
