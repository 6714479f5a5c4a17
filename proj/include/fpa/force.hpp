#ifndef FPA_FORCE_HPP
#define FPA_FORCE_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "fpa/grid.hpp"

namespace fpa {

using Vec = std::vector<double>;

// Rayleigh friction / self-propulsion force F(v) = sigma (|v|^p - 1) v / eta(|v|)
// with the cutoff family eta(z) = (1 + max(z-R,0)^2 / w^2)^(q/2).
struct ForceParams {
    double sigma = 0.25;
    double p = 2.0;
    double q = 4.0;
    double R = 2.0;
    double w = 2.5;

    // sigma = 0 is admitted as a degenerate configuration (pure quadratic
    // potential); it gives closed-form oracles.
    void validate() const {
        if (!(sigma >= 0.0 && sigma < 1.0)) throw std::invalid_argument("force.sigma must be in [0,1)");
        if (!(p > 0.0)) throw std::invalid_argument("force.p must be > 0");
        if (!(q > p)) throw std::invalid_argument("force.q must be > p");
        if (!(R > 0.0)) throw std::invalid_argument("force.R must be > 0");
        if (!(w > 0.0)) throw std::invalid_argument("force.w must be > 0");
    }

    bool operator==(const ForceParams&) const = default;
};

struct CoercivityBounds {
    double lambda = 0.0;   // lower spectral bound of the Hessian of V
    double Lambda = 0.0;   // upper operator-norm bound
};

// Thrown when the numeric minimum of the Hessian spectrum is <= 0, i.e. the
// required Hessian coercivity cannot be certified for these parameters.
struct coercivity_error : std::runtime_error {
    explicit coercivity_error(const std::string& msg) : std::runtime_error(msg) {}
    double lambda_found = 0.0;
};

double eta(double z, const ForceParams& fp);
double eta_prime(double z, const ForceParams& fp);

// 1-d force value; vector version applies the radial formula component-wise.
double force1(double v, const ForceParams& fp);
Vec force(const Vec& v, const ForceParams& fp);

// G(z) = int_0^z sigma (y^{p+1} - y) / eta(y) dy, adaptive Simpson, abs tol 1e-12.
double potential_G(double z, const ForceParams& fp);

double potential_V(const Vec& v, const ForceParams& fp);
double potential_V_radial(double speed, const ForceParams& fp);
Vec grad_V(const Vec& v, const ForceParams& fp);

// Row-major n x n Hessian of V. At v = 0 the radial limit (1-sigma) I applies.
std::vector<double> hess_V(const Vec& v, const ForceParams& fp);

// Eigenvalues of hess_V restricted to the tangential / radial directions as
// functions of the speed; used by the coercivity scan and its tests.
void hess_eigs(double speed, const ForceParams& fp, double& tangential, double& radial);

// Dense 1-d scan of the Hessian spectrum over speeds [0, z_max] followed by
// local refinement. Throws coercivity_error if lambda <= 0.
CoercivityBounds coercivity_bounds(const ForceParams& fp);

// Smallest velocity cutoff (multiple of 0.25) with exp(-V(Vmax)) < 1e-14.
double auto_vmax(const ForceParams& fp);

// Tabulated Gibbs equilibrium f_inf(v) = exp(-V(v))/Z on the velocity nodes.
struct EquilibriumTable {
    Grid grid;
    std::vector<double> f_inf;  // length Nv, density per phase-space volume
    std::vector<double> V;      // length Nv
    double Z = 0.0;
};

EquilibriumTable equilibrium(const Grid& grid, const ForceParams& fp);

}  // namespace fpa

#endif
