#include "fpa/force.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fpa {

double eta(double z, const ForceParams& fp) {
    if (z < 0.0) throw std::domain_error("eta: negative speed");
    if (z <= fp.R) return 1.0;
    const double u = (z - fp.R) / fp.w;
    return std::pow(1.0 + u * u, 0.5 * fp.q);
}

double eta_prime(double z, const ForceParams& fp) {
    if (z < 0.0) throw std::domain_error("eta_prime: negative speed");
    if (z <= fp.R) return 0.0;
    const double u = (z - fp.R) / fp.w;
    return (fp.q / fp.w) * u * std::pow(1.0 + u * u, 0.5 * fp.q - 1.0);
}

double force1(double v, const ForceParams& fp) {
    const double z = std::abs(v);
    if (z == 0.0) return 0.0;
    return fp.sigma * (std::pow(z, fp.p) - 1.0) * v / eta(z, fp);
}

static double norm2(const Vec& v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

Vec force(const Vec& v, const ForceParams& fp) {
    const double z = norm2(v);
    Vec out(v.size(), 0.0);
    if (z == 0.0) return out;
    const double g = fp.sigma * (std::pow(z, fp.p) - 1.0) / eta(z, fp);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = g * v[i];
    return out;
}

namespace {

double g_integrand(double y, const ForceParams& fp) {
    return fp.sigma * (std::pow(y, fp.p + 1.0) - y) / eta(y, fp);
}

// Adaptive Simpson with absolute tolerance; the integrand is C^1 so plain
// bisection recursion converges quickly.
double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(double a, double b, double fa, double fm, double fb, double whole,
                        double tol, int depth, const ForceParams& fp) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = g_integrand(lm, fp);
    const double frm = g_integrand(rm, fp);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    const double delta = left + right - whole;
    if (depth <= 0) {
        throw std::runtime_error("potential_G: adaptive quadrature failed to converge (interval [" +
                                 std::to_string(a) + "," + std::to_string(b) + "])");
    }
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, fp) +
           adaptive_simpson(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, fp);
}

double integrate_G(double a, double b, const ForceParams& fp, double tol) {
    if (b <= a) return 0.0;
    const double fa = g_integrand(a, fp);
    const double fb = g_integrand(b, fp);
    const double m = 0.5 * (a + b);
    const double fm = g_integrand(m, fp);
    return adaptive_simpson(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 60, fp);
}

}  // namespace

double potential_G(double z, const ForceParams& fp) {
    if (z < 0.0) throw std::domain_error("potential_G: negative speed");
    if (z == 0.0 || fp.sigma == 0.0) return 0.0;
    // Split at the eta cutoff; below R the integrand is polynomial.
    if (z <= fp.R) return integrate_G(0.0, z, fp, 1e-12);
    return integrate_G(0.0, fp.R, fp, 5e-13) + integrate_G(fp.R, z, fp, 5e-13);
}

double potential_V_radial(double speed, const ForceParams& fp) {
    return 0.5 * speed * speed + potential_G(speed, fp);
}

double potential_V(const Vec& v, const ForceParams& fp) {
    return potential_V_radial(norm2(v), fp);
}

Vec grad_V(const Vec& v, const ForceParams& fp) {
    Vec out = force(v, fp);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] += v[i];
    return out;
}

void hess_eigs(double z, const ForceParams& fp, double& tangential, double& radial) {
    if (fp.sigma == 0.0) {
        tangential = radial = 1.0;
        return;
    }
    const double e = eta(z, fp);
    const double ep = eta_prime(z, fp);
    const double zp = std::pow(z, fp.p);
    const double g = fp.sigma * (zp - 1.0) / e;
    tangential = 1.0 + g;
    radial = 1.0 + g + fp.sigma * fp.p * zp / e - fp.sigma * (zp - 1.0) * z * ep / (e * e);
}

std::vector<double> hess_V(const Vec& v, const ForceParams& fp) {
    const std::size_t n = v.size();
    std::vector<double> H(n * n, 0.0);
    const double z = norm2(v);
    if (z == 0.0) {
        for (std::size_t i = 0; i < n; ++i) H[i * n + i] = 1.0 - fp.sigma;
        return H;
    }
    double tang, rad;
    hess_eigs(z, fp, tang, rad);
    // (1+g) I + (rad - tang) vhat (x) vhat
    const double r1 = rad - tang;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            H[i * n + j] = r1 * (v[i] / z) * (v[j] / z);
        }
        H[i * n + i] += tang;
    }
    return H;
}

CoercivityBounds coercivity_bounds(const ForceParams& fp) {
    fp.validate();
    // The transition region of eta can push the radial eigenvalue below its
    // asymptote, so the scan must cover it; beyond R + 10w both eigenvalues
    // approach 1 monotonically since q > p.
    const double z_max = std::max({10.0, 3.0 * fp.R, fp.R + 10.0 * fp.w});
    const int n = 10000;
    double lo = 1e300, hi = -1e300, z_lo = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double z = z_max * k / n;
        double t, r;
        hess_eigs(z, fp, t, r);
        const double mn = std::min(t, r);
        if (mn < lo) {
            lo = mn;
            z_lo = z;
        }
        hi = std::max(hi, std::max(std::abs(t), std::abs(r)));
    }
    // Golden-section refinement of the minimum around the coarse argmin.
    const double h = z_max / n;
    double a = std::max(0.0, z_lo - h), b = std::min(z_max, z_lo + h);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    auto min_eig = [&](double z) {
        double t, r;
        hess_eigs(z, fp, t, r);
        return std::min(t, r);
    };
    double fc = min_eig(c), fd = min_eig(d);
    for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = min_eig(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = min_eig(d);
        }
    }
    lo = std::min(lo, std::min(fc, fd));
    // Certificate margin against samples landing between scan points.
    const double margin = 1e-9 * std::max(1.0, std::abs(lo));
    CoercivityBounds cb{lo - margin, hi + margin};
    if (!(cb.lambda > 0.0)) {
        std::ostringstream os;
        os << "coercivity fails for these parameters: min Hessian eigenvalue " << lo
           << " at |v| = " << 0.5 * (a + b) << " (sigma=" << fp.sigma << ", p=" << fp.p
           << ", q=" << fp.q << ", R=" << fp.R << ", w=" << fp.w << ")";
        coercivity_error err(os.str());
        err.lambda_found = lo;
        throw err;
    }
    return cb;
}

double auto_vmax(const ForceParams& fp) {
    for (double z = 4.0; z <= 40.0; z += 0.25) {
        if (std::exp(-potential_V_radial(z, fp)) < 1e-14) return z;
    }
    throw std::runtime_error("auto_vmax: equilibrium tail does not reach 1e-14 below speed 40");
}

EquilibriumTable equilibrium(const Grid& grid, const ForceParams& fp) {
    grid.validate();
    fp.validate();
    EquilibriumTable tab;
    tab.grid = grid;
    tab.V.resize(grid.Nv);
    tab.f_inf.resize(grid.Nv);
    double gmax = 0.0;
    for (int j = 0; j < grid.Nv; ++j) {
        tab.V[j] = potential_V_radial(std::abs(grid.v(j)), fp);
        tab.f_inf[j] = std::exp(-tab.V[j]);
        gmax = std::max(gmax, tab.f_inf[j]);
    }
    const double tail = std::max(tab.f_inf.front(), tab.f_inf.back());
    if (tail >= 1e-12 * gmax) {
        std::ostringstream os;
        os << "equilibrium: Vmax=" << grid.Vmax << " too small, f_inf at the boundary is "
           << tail / gmax << " of the peak (need < 1e-12); try Vmax >= " << auto_vmax(fp);
        throw std::runtime_error(os.str());
    }
    double s = 0.0;
    for (double g : tab.f_inf) s += g;
    tab.Z = grid.L * s * grid.dv();
    for (double& g : tab.f_inf) g /= tab.Z;
    return tab;
}

}  // namespace fpa
