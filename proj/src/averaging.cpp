#include "fpa/averaging.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fpa {

namespace {
constexpr double kVacuumFloor = 1e-30;

double periodic_dist(double d, double L) {
    d = std::abs(d);
    return std::min(d, L - d);
}
}  // namespace

double Kernel::phi_continuous(double dist) const {
    if (shape == KernelShape::global) return 1.0 / L;
    const double d = periodic_dist(dist, L);
    return d >= r0 ? 0.0 : (1.0 - d / r0) / r0;
}

Kernel make_kernel(KernelShape shape, double r0, int Nx, double L) {
    if (Nx < 2 || !(L > 0.0)) throw std::invalid_argument("make_kernel: bad grid");
    Kernel k;
    k.shape = shape;
    k.L = L;
    k.Nx = Nx;
    k.phi.assign(Nx, 0.0);
    const double dx = L / Nx;
    if (shape == KernelShape::global) {
        for (int i = 0; i < Nx; ++i) k.phi[i] = 1.0 / L;
        k.r0 = 0.5 * L;
        k.c0_floor = 1.0 / L;
        return k;
    }
    if (!(r0 > 0.0 && r0 <= 0.5 * L)) {
        throw std::invalid_argument("make_kernel: tent r0 must be in (0, L/2]");
    }
    k.r0 = r0;
    double s = 0.0;
    for (int i = 0; i < Nx; ++i) {
        const double d = periodic_dist(i * dx, L);
        k.phi[i] = std::max(1.0 - d / r0, 0.0);
        s += k.phi[i];
    }
    if (s <= 0.0) throw std::invalid_argument("make_kernel: tent support below grid resolution");
    // Normalize discretely so sum(phi) dx = 1 exactly.
    for (double& v : k.phi) v /= s * dx;
    k.c0_floor = std::numeric_limits<double>::infinity();
    for (int i = 0; i < Nx; ++i) {
        if (periodic_dist(i * dx, L) < r0) k.c0_floor = std::min(k.c0_floor, k.phi[i]);
    }
    return k;
}

std::vector<double> convolve_periodic(const std::vector<double>& field, const Kernel& kernel) {
    const int n = kernel.Nx;
    if (static_cast<int>(field.size()) != n) {
        throw std::invalid_argument("convolve_periodic: field/kernel size mismatch");
    }
    const double dx = kernel.L / n;
    std::vector<double> out(n, 0.0);
    if (kernel.shape == KernelShape::global) {
        double mean = 0.0;
        for (double v : field) mean += v;
        mean *= dx / kernel.L;
        std::fill(out.begin(), out.end(), mean);
        return out;
    }
    // Accumulate over kernel offsets so a k-cell shift of the input yields a
    // bitwise k-cell shift of the output.
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int d = 0; d < n; ++d) {
            if (kernel.phi[d] == 0.0) continue;
            int j = i - d;
            if (j < 0) j += n;
            s += kernel.phi[d] * field[j];
        }
        out[i] = s * dx;
    }
    return out;
}

namespace {

// s_rho * [u]_rho without the intermediate division; for the cs variant this
// is phi * (u rho) directly, with no intermediate division.
std::vector<double> strength_times_average(const std::vector<double>& rho,
                                           const std::vector<double>& u,
                                           const AveragingModel& model) {
    const int n = model.kernel.Nx;
    std::vector<double> urho(n);
    for (int i = 0; i < n; ++i) urho[i] = u[i] * rho[i];
    switch (model.variant) {
        case AveragingVariant::cs:
            return convolve_periodic(urho, model.kernel);
        case AveragingVariant::double_conv: {
            auto num = convolve_periodic(urho, model.kernel);
            auto den = convolve_periodic(rho, model.kernel);
            std::vector<double> quot(n);
            for (int i = 0; i < n; ++i) {
                if (den[i] < kVacuumFloor) {
                    throw degenerate_density_error("double_conv averaging: phi*rho below floor at cell " +
                                                   std::to_string(i));
                }
                quot[i] = num[i] / den[i];
            }
            auto avg = convolve_periodic(quot, model.kernel);
            auto srho = convolve_periodic(rho, model.kernel);
            for (int i = 0; i < n; ++i) avg[i] *= srho[i];
            return avg;
        }
        case AveragingVariant::identity: {
            auto srho = convolve_periodic(rho, model.kernel);
            std::vector<double> out(n);
            for (int i = 0; i < n; ++i) out[i] = srho[i] * u[i];
            return out;
        }
    }
    throw std::logic_error("unreachable");
}

std::vector<double> apply_average(const std::vector<double>& rho, const std::vector<double>& w,
                                  const AveragingModel& model, const std::vector<double>& s_rho) {
    if (model.variant == AveragingVariant::identity) return w;
    auto sw = strength_times_average(rho, w, model);
    std::vector<double> out(sw.size());
    for (std::size_t i = 0; i < sw.size(); ++i) {
        if (s_rho[i] < kVacuumFloor) {
            throw degenerate_density_error("averaging: s_rho below floor at cell " + std::to_string(i));
        }
        out[i] = sw[i] / s_rho[i];
    }
    return out;
}

std::vector<double> centered_dx(const std::vector<double>& g, double dx) {
    const int n = static_cast<int>(g.size());
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        out[i] = (g[(i + 1) % n] - g[(i + n - 1) % n]) / (2.0 * dx);
    }
    return out;
}

}  // namespace

StrengthAverage strength_and_average(const std::vector<double>& rho, const std::vector<double>& u,
                                     const AveragingModel& model) {
    if (rho.size() != u.size() || static_cast<int>(rho.size()) != model.kernel.Nx) {
        throw std::invalid_argument("strength_and_average: size mismatch");
    }
    StrengthAverage sa;
    sa.s_rho = convolve_periodic(rho, model.kernel);
    for (std::size_t i = 0; i < sa.s_rho.size(); ++i) {
        if (sa.s_rho[i] < kVacuumFloor) {
            throw degenerate_density_error("strength_and_average: s_rho below floor at cell " +
                                           std::to_string(i));
        }
    }
    sa.u_avg = apply_average(rho, u, model, sa.s_rho);
    return sa;
}

double kappa_inner(const std::vector<double>& w1, const std::vector<double>& w2,
                   const std::vector<double>& rho, const std::vector<double>& s_rho, double dx) {
    if (w1.size() != w2.size() || w1.size() != rho.size() || w1.size() != s_rho.size()) {
        throw std::invalid_argument("kappa_inner: size mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < w1.size(); ++i) s += w1[i] * w2[i] * s_rho[i] * rho[i];
    return s * dx;
}

AssumptionI check_assumption_i(const std::vector<double>& rho, const AveragingModel& model, double dx) {
    auto srho = convolve_periodic(rho, model.kernel);
    AssumptionI a;
    a.c0 = *std::min_element(srho.begin(), srho.end());
    a.c1 = *std::max_element(srho.begin(), srho.end());
    auto d = centered_dx(srho, dx);
    a.c2 = 0.0;
    for (double v : d) a.c2 = std::max(a.c2, std::abs(v));
    return a;
}

double check_assumption_ii(const std::vector<double>& rho, const AveragingModel& model, double dx) {
    const int n = model.kernel.Nx;
    for (int i = 0; i < n; ++i) {
        if (rho[i] < kVacuumFloor) {
            throw degenerate_density_error("check_assumption_ii: vacuum cell " + std::to_string(i));
        }
    }
    // Columns of u -> grad_x(s_rho [u]_rho), then conjugate into the L^2(rho)
    // geometry: A = D^{1/2} M D^{-1/2}, D = diag(rho).
    Eigen::MatrixXd A(n, n);
    std::vector<double> e(n, 0.0);
    for (int k = 0; k < n; ++k) {
        e[k] = 1.0;
        auto col = centered_dx(strength_times_average(rho, e, model), dx);
        e[k] = 0.0;
        for (int i = 0; i < n; ++i) {
            A(i, k) = col[i] * std::sqrt(rho[i] / rho[k]);
        }
    }
    // Power iteration on A^T A for the largest singular value.
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) v(i) = std::cos(2.0 * M_PI * (i + 0.37) / n) + 0.5;
    v.normalize();
    double lam = 0.0;
    for (int it = 0; it < 1000; ++it) {
        Eigen::VectorXd w = A.transpose() * (A * v);
        const double nw = w.norm();
        if (nw < 1e-300) return 0.0;  // operator is (numerically) zero
        w /= nw;
        const double lam_new = w.dot(A.transpose() * (A * w));
        if (std::abs(lam_new - lam) <= 1e-8 * std::max(1.0, std::abs(lam_new))) {
            return std::sqrt(std::max(lam_new, 0.0));
        }
        lam = lam_new;
        v = w;
    }
    throw std::runtime_error("check_assumption_ii: power iteration did not converge in 1000 iterations");
}

double spectral_gap(const std::vector<double>& rho, const AveragingModel& model, GapSubspace subspace,
                    double dx) {
    (void)dx;  // cancels in the Rayleigh quotient; kept for signature parity
    const int n = model.kernel.Nx;
    auto s_rho = convolve_periodic(rho, model.kernel);
    Eigen::VectorXd kw(n);  // kappa weights (dx cancels in the Rayleigh quotient)
    for (int i = 0; i < n; ++i) {
        const double k = s_rho[i] * rho[i];
        if (!(k > 0.0)) {
            throw degenerate_density_error("spectral_gap: kappa weight vanishes at cell " +
                                           std::to_string(i));
        }
        kw(i) = std::sqrt(k);
    }
    // P column by column, conjugated: G = K^{1/2} P K^{-1/2}.
    Eigen::MatrixXd G(n, n);
    std::vector<double> e(n, 0.0);
    for (int k = 0; k < n; ++k) {
        e[k] = 1.0;
        auto col = apply_average(rho, e, model, s_rho);
        e[k] = 0.0;
        for (int i = 0; i < n; ++i) {
            G(i, k) = col[i] * kw(i) / kw(k);
        }
        if (!G.col(k).allFinite()) {
            throw degenerate_density_error("spectral_gap: non-finite operator entry in column " +
                                           std::to_string(k));
        }
    }
    Eigen::MatrixXd S = 0.5 * (G + G.transpose());
    if (subspace == GapSubspace::full) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
        return es.eigenvalues().maxCoeff();
    }
    // Restrict to the kappa-orthogonal complement of constants: Householder
    // basis whose first column is the (tilde-coordinates) constant direction.
    Eigen::VectorXd c = kw.normalized();
    Eigen::VectorXd uvec = c;
    uvec(0) += (c(0) >= 0.0 ? 1.0 : -1.0);
    uvec.normalize();
    Eigen::MatrixXd Hh = Eigen::MatrixXd::Identity(n, n) - 2.0 * uvec * uvec.transpose();
    Eigen::MatrixXd Q = Hh.rightCols(n - 1);
    Eigen::MatrixXd Sr = Q.transpose() * S * Q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Sr, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

ForceRatio check_assumption_iv(const std::vector<double>& u, const std::vector<double>& u_F,
                               const std::vector<double>& rho, const std::vector<double>& s_rho,
                               double dx) {
    ForceRatio fr;
    const double nu = std::sqrt(std::max(kappa_inner(u, u, rho, s_rho, dx), 0.0));
    const double nf = std::sqrt(std::max(kappa_inner(u_F, u_F, rho, s_rho, dx), 0.0));
    if (nu < 1e-14 && nf < 1e-14) {
        fr.ratio = 0.0;
        fr.vacuous = true;
    } else if (nu < 1e-14) {
        fr.ratio = std::numeric_limits<double>::infinity();
        fr.violated = true;
    } else {
        fr.ratio = nf / nu;
    }
    return fr;
}

AssumptionReport make_assumption_report(const std::vector<double>& rho, const std::vector<double>& u,
                                        const std::vector<double>& u_F, const AveragingModel& model,
                                        double dx, GapSubspace subspace) {
    AssumptionReport r;
    auto a1 = check_assumption_i(rho, model, dx);
    r.c0 = a1.c0;
    r.c1 = a1.c1;
    r.c2 = a1.c2;
    r.op_norm_ii = check_assumption_ii(rho, model, dx);
    r.gap_sup_full = spectral_gap(rho, model, GapSubspace::full, dx);
    r.gap_sup_mean_zero = spectral_gap(rho, model, GapSubspace::mean_zero, dx);
    const double gap = subspace == GapSubspace::full ? r.gap_sup_full : r.gap_sup_mean_zero;
    r.epsilon0 = gap < 1.0 ? 1.0 - gap : 0.0;
    auto srho = convolve_periodic(rho, model.kernel);
    auto fr = check_assumption_iv(u, u_F, rho, srho, dx);
    r.force_ratio = fr.ratio;
    r.epsilon1 = fr.ratio;
    r.pass_i = r.c0 >= AssumptionReport::c0_min && std::isfinite(r.c1) && std::isfinite(r.c2);
    r.pass_ii = std::isfinite(r.op_norm_ii);
    r.pass_iii = gap <= 1.0 - AssumptionReport::tol_gap;
    r.pass_iv = fr.vacuous || fr.ratio < 1.0;
    return r;
}

std::string AssumptionReport::to_json() const {
    std::ostringstream os;
    os.precision(17);
    auto num = [&](double v) -> std::ostringstream& {
        if (std::isfinite(v)) {
            os << v;
        } else {
            os << "\"" << (v > 0 ? "inf" : (v < 0 ? "-inf" : "nan")) << "\"";
        }
        return os;
    };
    os << "{\n";
    os << "  \"c0\": ";
    num(c0) << ",\n  \"c1\": ";
    num(c1) << ",\n  \"c2\": ";
    num(c2) << ",\n  \"op_norm_ii\": ";
    num(op_norm_ii) << ",\n  \"gap_sup_full\": ";
    num(gap_sup_full) << ",\n  \"gap_sup_mean_zero\": ";
    num(gap_sup_mean_zero) << ",\n  \"epsilon0\": ";
    num(epsilon0) << ",\n  \"force_ratio\": ";
    num(force_ratio) << ",\n  \"epsilon1\": ";
    num(epsilon1) << ",\n";
    os << "  \"pass_i\": " << (pass_i ? "true" : "false") << ",\n";
    os << "  \"pass_ii\": " << (pass_ii ? "true" : "false") << ",\n";
    os << "  \"pass_iii\": " << (pass_iii ? "true" : "false") << ",\n";
    os << "  \"pass_iv\": " << (pass_iv ? "true" : "false") << "\n";
    os << "}\n";
    return os.str();
}

}  // namespace fpa
