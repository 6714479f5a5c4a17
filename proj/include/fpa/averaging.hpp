#ifndef FPA_AVERAGING_HPP
#define FPA_AVERAGING_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fpa {

// A kernel footprint reached a vacuum region (phi * rho below floor).
struct degenerate_density_error : std::runtime_error {
    explicit degenerate_density_error(const std::string& msg) : std::runtime_error(msg) {}
};

enum class KernelShape { tent, global };

// Radial non-negative non-increasing communication kernel, tabulated on the
// periodic x grid and normalized so the discrete quadrature is exactly 1.
struct Kernel {
    KernelShape shape = KernelShape::global;
    double r0 = 0.0;       // support radius (tent only)
    double c0_floor = 0.0; // min of phi over grid nodes with |x| < r0
    double L = 0.0;
    int Nx = 0;
    std::vector<double> phi;  // phi[k] = phi(periodic distance of k cells)

    // Continuous normalization, used by the particle simulator.
    double phi_continuous(double dist) const;
};

Kernel make_kernel(KernelShape shape, double r0, int Nx, double L);

enum class AveragingVariant { cs, double_conv, identity };

struct AveragingModel {
    AveragingVariant variant = AveragingVariant::cs;
    Kernel kernel;
};

// Discrete circular convolution (phi * field) with the grid quadrature weight.
// Exact for the global kernel (returns the mean).
std::vector<double> convolve_periodic(const std::vector<double>& field, const Kernel& kernel);

struct StrengthAverage {
    std::vector<double> s_rho;  // s_rho per x-cell
    std::vector<double> u_avg;  // [u]_rho per x-cell
};

StrengthAverage strength_and_average(const std::vector<double>& rho, const std::vector<double>& u,
                                     const AveragingModel& model);

// <w1, w2>_kappa = sum w1 w2 s_rho rho dx
double kappa_inner(const std::vector<double>& w1, const std::vector<double>& w2,
                   const std::vector<double>& rho, const std::vector<double>& s_rho, double dx);

struct AssumptionI {
    double c0 = 0.0;  // min s_rho
    double c1 = 0.0;  // max s_rho
    double c2 = 0.0;  // max |grad_x s_rho| (centered differences)
};

AssumptionI check_assumption_i(const std::vector<double>& rho, const AveragingModel& model, double dx);

// Operator norm of u -> grad_x(s_rho [u]_rho) on L^2(rho), via power iteration
// (tolerance 1e-8, at most 1000 iterations).
double check_assumption_ii(const std::vector<double>& rho, const AveragingModel& model, double dx);

enum class GapSubspace { full, mean_zero };

// sup <w, [w]_rho>_kappa over ||w||_kappa = 1, restricted to the chosen
// subspace (mean_zero = kappa-orthogonal complement of constants); dense
// symmetric eigensolve of the symmetrized operator.
double spectral_gap(const std::vector<double>& rho, const AveragingModel& model, GapSubspace subspace,
                    double dx);

struct ForceRatio {
    double ratio = 0.0;
    bool vacuous = false;   // both norms below 1e-14
    bool violated = false;  // ||u|| ~ 0 while ||u_F|| is not
};

ForceRatio check_assumption_iv(const std::vector<double>& u, const std::vector<double>& u_F,
                               const std::vector<double>& rho, const std::vector<double>& s_rho,
                               double dx);

struct AssumptionReport {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    double op_norm_ii = 0.0;
    double gap_sup_full = 0.0;
    double gap_sup_mean_zero = 0.0;
    double epsilon0 = 0.0;
    double force_ratio = 0.0;
    double epsilon1 = 0.0;
    bool pass_i = false, pass_ii = false, pass_iii = false, pass_iv = false;

    static constexpr double tol_gap = 1e-3;
    static constexpr double c0_min = 1e-10;

    std::string to_json() const;
};

// Full audit of the decay conditions on a single snapshot. The gap is
// judged on `subspace` (constants pair to exactly 1 for any unital average,
// so mean_zero is the informative reading).
AssumptionReport make_assumption_report(const std::vector<double>& rho, const std::vector<double>& u,
                                        const std::vector<double>& u_F, const AveragingModel& model,
                                        double dx, GapSubspace subspace);

}  // namespace fpa

#endif
