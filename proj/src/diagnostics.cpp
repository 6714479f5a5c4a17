#include "fpa/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace fpa {

namespace {
constexpr double kVacuumFloor = 1e-30;
constexpr double kMaskRel = 1e-30;  // support mask: f >= 1e-30 * max f

double nan_d() { return std::numeric_limits<double>::quiet_NaN(); }
}  // namespace

MacroFields macro_fields(const KineticState& state, const AveragingModel& model,
                         const ForceParams& fp) {
    const Grid& g = state.grid;
    MacroFields m;
    m.rho.assign(g.Nx, 0.0);
    m.u.assign(g.Nx, 0.0);
    m.u_F.assign(g.Nx, 0.0);
    m.u_V.assign(g.Nx, 0.0);
    m.vacuum.assign(g.Nx, 0);
    std::vector<double> Fv(g.Nv);
    for (int j = 0; j < g.Nv; ++j) Fv[j] = force1(g.v(j), fp);
    const double dv = g.dv();
    for (int i = 0; i < g.Nx; ++i) {
        double r = 0.0, mu = 0.0, mf = 0.0;
        const double* row = state.f.data() + g.idx(i, 0);
        for (int j = 0; j < g.Nv; ++j) {
            r += row[j];
            mu += g.v(j) * row[j];
            mf += Fv[j] * row[j];
        }
        m.rho[i] = r * dv;
        if (m.rho[i] < kVacuumFloor) {
            m.vacuum[i] = 1;
            ++m.n_vacuum;
        } else {
            m.u[i] = mu * dv / m.rho[i];
            m.u_F[i] = mf * dv / m.rho[i];
        }
        m.u_V[i] = m.u[i] + m.u_F[i];
    }
    auto sa = strength_and_average(m.rho, m.u, model);
    m.s_rho = std::move(sa.s_rho);
    m.u_avg = std::move(sa.u_avg);
    return m;
}

double relative_entropy(const KineticState& state, const EquilibriumTable& eq) {
    const Grid& g = state.grid;
    double s = 0.0;
    for (int i = 0; i < g.Nx; ++i) {
        const double* row = state.f.data() + g.idx(i, 0);
        for (int j = 0; j < g.Nv; ++j) {
            const double f = row[j];
            if (f < kVacuumFloor) continue;
            s += f * std::log(f / eq.f_inf[j]);
        }
    }
    return s * g.dx() * g.dv();
}

namespace {

struct HField {
    std::vector<double> h;        // f / f_inf
    std::vector<std::uint8_t> mask;
    int masked_cells = 0;
    double masked_mass = 0.0;
};

HField make_h(const KineticState& state, const EquilibriumTable& eq) {
    const Grid& g = state.grid;
    HField out;
    out.h.resize(g.size());
    out.mask.assign(g.size(), 0);
    double fmax = 0.0;
    for (double f : state.f) fmax = std::max(fmax, f);
    const double floor = kMaskRel * fmax;
    for (int i = 0; i < g.Nx; ++i) {
        for (int j = 0; j < g.Nv; ++j) {
            const std::size_t c = g.idx(i, j);
            out.h[c] = state.f[c] / eq.f_inf[j];
            if (state.f[c] >= floor && state.f[c] > 0.0) {
                out.mask[c] = 1;
            } else {
                ++out.masked_cells;
                out.masked_mass += std::max(state.f[c], 0.0);
            }
        }
    }
    out.masked_mass *= g.dx() * g.dv();
    return out;
}

}  // namespace

FisherInfo fisher_functionals(const KineticState& state, const EquilibriumTable& eq,
                              const MacroFields& macro) {
    const Grid& g = state.grid;
    HField hf = make_h(state, eq);
    FisherInfo out;
    out.masked_cells = hf.masked_cells;
    out.masked_mass = hf.masked_mass;
    const double dx = g.dx(), dv = g.dv();
    const double cell = dx * dv;
    for (int i = 0; i < g.Nx; ++i) {
        const int ip = (i + 1) % g.Nx, im = (i + g.Nx - 1) % g.Nx;
        for (int j = 0; j < g.Nv; ++j) {
            const std::size_t c = g.idx(i, j);
            if (!hf.mask[c]) continue;
            const double h = hf.h[c];
            // centered in x (periodic); centered in v, one-sided at the
            // boundary rows (normally masked by the tail threshold anyway)
            const double dxh = (hf.h[g.idx(ip, j)] - hf.h[g.idx(im, j)]) / (2.0 * dx);
            double dvh;
            if (j == 0) {
                dvh = (hf.h[g.idx(i, 1)] - h) / dv;
            } else if (j == g.Nv - 1) {
                dvh = (h - hf.h[g.idx(i, j - 1)]) / dv;
            } else {
                dvh = (hf.h[g.idx(i, j + 1)] - hf.h[g.idx(i, j - 1)]) / (2.0 * dv);
            }
            const double wgt = eq.f_inf[j] * cell / h;
            out.Ivv += dvh * dvh * wgt;
            out.Ixv += dxh * dvh * wgt;
            out.Ixx += dxh * dxh * wgt;
            out.Ivv_w += macro.s_rho[i] * dvh * dvh * wgt;
        }
    }
    return out;
}

Dissipation dissipation_functionals(const KineticState& state, const EquilibriumTable& eq,
                                    const MacroFields& macro) {
    const Grid& g = state.grid;
    HField hf = make_h(state, eq);
    std::vector<double> hbar(g.size(), 0.0);
    for (std::size_t c = 0; c < g.size(); ++c) {
        if (hf.mask[c]) hbar[c] = std::log(hf.h[c]);
    }
    Dissipation out;
    const double dx = g.dx(), dv = g.dv();
    const double cell = dx * dv;
    for (int i = 0; i < g.Nx; ++i) {
        const int ip = (i + 1) % g.Nx, im = (i + g.Nx - 1) % g.Nx;
        for (int j = 1; j < g.Nv - 1; ++j) {
            const std::size_t c = g.idx(i, j);
            if (!hf.mask[c]) continue;
            if (!hf.mask[g.idx(i, j + 1)] || !hf.mask[g.idx(i, j - 1)] || !hf.mask[g.idx(ip, j + 1)] ||
                !hf.mask[g.idx(ip, j - 1)] || !hf.mask[g.idx(im, j + 1)] || !hf.mask[g.idx(im, j - 1)]) {
                continue;  // stencil leaves the support region
            }
            const double d2v =
                (hbar[g.idx(i, j + 1)] - 2.0 * hbar[c] + hbar[g.idx(i, j - 1)]) / (dv * dv);
            const double dxdv = (hbar[g.idx(ip, j + 1)] - hbar[g.idx(ip, j - 1)] -
                                 hbar[g.idx(im, j + 1)] + hbar[g.idx(im, j - 1)]) /
                                (4.0 * dx * dv);
            const double wgt = macro.s_rho[i] * hf.h[c] * eq.f_inf[j] * cell;
            out.Dvv += wgt * d2v * d2v;
            out.Dxv += wgt * dxdv * dxdv;
        }
    }
    return out;
}

double ck_check(const KineticState& state, const EquilibriumTable& eq, double H) {
    const Grid& g = state.grid;
    double l1 = 0.0;
    for (int i = 0; i < g.Nx; ++i) {
        for (int j = 0; j < g.Nv; ++j) {
            l1 += std::abs(state.f[g.idx(i, j)] - eq.f_inf[j]);
        }
    }
    l1 *= g.dx() * g.dv();
    return 2.0 * H - l1 * l1;
}

EntropyProduction entropy_production(const KineticState& state, const EquilibriumTable& eq,
                                     const MacroFields& macro, double epsilon0, double epsilon1) {
    EntropyProduction ep;
    const double dx = state.grid.dx();
    ep.uV_norm2 = kappa_inner(macro.u_V, macro.u_V, macro.rho, macro.s_rho, dx);
    ep.pairing = kappa_inner(macro.u_V, macro.u_avg, macro.rho, macro.s_rho, dx);
    FisherInfo fi = fisher_functionals(state, eq, macro);
    ep.dHdt_formula = -fi.Ivv_w + ep.pairing;
    double slack = 0.0;
    if (ep.uV_norm2 > 1e-300) slack = 1.0 - ep.pairing / ep.uV_norm2;
    const double c3_bound = epsilon1 < 1.0 ? epsilon0 - epsilon1 / (1.0 - epsilon1) : 0.0;
    ep.c3 = std::max(0.0, std::min(c3_bound, slack));
    ep.gap_bound_ok = ep.pairing <= (1.0 - ep.c3) * ep.uV_norm2 + 1e-12;
    return ep;
}

DiagnosticsRecord make_record(const KineticState& state, const EquilibriumTable& eq,
                              const AveragingModel& model, const ForceParams& fp,
                              GapSubspace subspace) {
    DiagnosticsRecord r;
    r.t = state.t;
    r.mass = state.mass();
    MacroFields macro = macro_fields(state, model, fp);
    r.H = relative_entropy(state, eq);
    FisherInfo fi = fisher_functionals(state, eq, macro);
    r.Ivv_w = fi.Ivv_w;
    r.Ivv = fi.Ivv;
    r.Ixv = fi.Ixv;
    r.Ixx = fi.Ixx;
    Dissipation d = dissipation_functionals(state, eq, macro);
    r.Dvv = d.Dvv;
    r.Dxv = d.Dxv;
    const double dx = state.grid.dx();
    r.uV_norm2 = kappa_inner(macro.u_V, macro.u_V, macro.rho, macro.s_rho, dx);
    r.pairing = kappa_inner(macro.u_V, macro.u_avg, macro.rho, macro.s_rho, dx);
    r.u_norm2 = kappa_inner(macro.u, macro.u, macro.rho, macro.s_rho, dx);
    r.dHdt_formula = -r.Ivv_w + r.pairing;
    r.ck_slack = ck_check(state, eq, r.H);
    const double I = r.Ivv + r.Ixx;
    r.logsob_ratio = I > 1e-300 ? r.H / I : nan_d();
    AssumptionReport rep = make_assumption_report(macro.rho, macro.u, macro.u_F, model, dx, subspace);
    r.gap_sup = subspace == GapSubspace::full ? rep.gap_sup_full : rep.gap_sup_mean_zero;
    r.force_ratio = rep.force_ratio;
    r.c0 = rep.c0;
    r.pass_i = rep.pass_i;
    r.pass_ii = rep.pass_ii;
    r.pass_iii = rep.pass_iii;
    r.pass_iv = rep.pass_iv;
    auto fr = check_assumption_iv(macro.u, macro.u_F, macro.rho, macro.s_rho, dx);
    r.force_vacuous = fr.vacuous;
    r.dHdt_fd = nan_d();
    return r;
}

void fill_dhdt_fd(std::vector<DiagnosticsRecord>& records) {
    for (std::size_t k = 0; k < records.size(); ++k) {
        if (k == 0 || k + 1 >= records.size()) {
            records[k].dHdt_fd = nan_d();
            continue;
        }
        const double dt = records[k + 1].t - records[k - 1].t;
        records[k].dHdt_fd = dt > 0.0 ? (records[k + 1].H - records[k - 1].H) / dt : nan_d();
    }
}

std::string series_csv_text(const std::vector<DiagnosticsRecord>& records) {
    std::ostringstream os;
    os << "t,mass,H,Ivv_w,Ivv,Ixv,Ixx,Dvv,Dxv,uV_norm2,pairing,gap_sup,force_ratio,ck_slack,"
          "logsob_ratio,dHdt_formula,dHdt_fd\n";
    char buf[32];
    auto put = [&](double v, char sep) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf << sep;
    };
    for (const auto& r : records) {
        put(r.t, ',');
        put(r.mass, ',');
        put(r.H, ',');
        put(r.Ivv_w, ',');
        put(r.Ivv, ',');
        put(r.Ixv, ',');
        put(r.Ixx, ',');
        put(r.Dvv, ',');
        put(r.Dxv, ',');
        put(r.uV_norm2, ',');
        put(r.pairing, ',');
        put(r.gap_sup, ',');
        put(r.force_ratio, ',');
        put(r.ck_slack, ',');
        put(r.logsob_ratio, ',');
        put(r.dHdt_formula, ',');
        put(r.dHdt_fd, '\n');
    }
    return os.str();
}

void write_series_csv(const std::string& path, const std::vector<DiagnosticsRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_series_csv: cannot open " + path);
    out << series_csv_text(records);
}

namespace {

// Smallest c >= 0 with numerator <= c * denominator.
double fit_constant(double numerator, double denominator) {
    if (numerator <= 1e-12) return 0.0;
    if (denominator <= 1e-300) return std::numeric_limits<double>::infinity();
    return numerator / denominator;
}

}  // namespace

LemmaFits lemma_monitors(std::span<const DiagnosticsRecord> records, double lambda, double c0) {
    if (records.size() < 3) throw std::invalid_argument("lemma_monitors: need >= 3 records");
    LemmaFits out;
    for (std::size_t k = 1; k + 1 < records.size(); ++k) {
        const auto& a = records[k - 1];
        const auto& b = records[k];
        const auto& c = records[k + 1];
        const double dt = c.t - a.t;
        if (!(dt > 0.0)) continue;
        const double dIvv = (c.Ivv - a.Ivv) / dt;
        const double dIxv = (c.Ixv - a.Ixv) / dt;
        const double dIxx = (c.Ixx - a.Ixx) / dt;
        out.t.push_back(b.t);
        out.c_lemma1.push_back(
            fit_constant(dIvv + 2.0 * b.Dvv + lambda * c0 * b.Ivv + 2.0 * b.Ixv, b.u_norm2));
        out.c_lemma2.push_back(
            fit_constant(dIxv + 0.5 * b.Ixx - 2.0 * b.Dvv - b.Dxv, b.Ivv + b.u_norm2));
        out.c_lemma3.push_back(fit_constant(dIxx + b.Dxv, b.Ivv + b.u_norm2));
    }
    auto vmax = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m = std::max(m, x);
        return m;
    };
    out.max1 = vmax(out.c_lemma1);
    out.max2 = vmax(out.c_lemma2);
    out.max3 = vmax(out.c_lemma3);
    return out;
}

ModifiedSeries modified_functional(std::span<const DiagnosticsRecord> records, double epsilon,
                                   double lambda, double c0, double c_lemma, double gamma_fixed) {
    if (records.empty()) throw std::invalid_argument("modified_functional: empty record set");
    if (!(epsilon > 0.0)) throw std::invalid_argument("modified_functional: epsilon must be > 0");
    ModifiedSeries out;
    out.kappa_coeff = c_lemma > 1e-14 ? lambda * c0 / c_lemma : 0.0;
    for (const auto& r : records) {
        const double it = r.Ivv + epsilon * r.Ixv + out.kappa_coeff * r.Ixx;
        const double lower = 0.5 * (r.Ivv + out.kappa_coeff * r.Ixx);
        if (it < lower - 1e-12) {
            std::ostringstream os;
            os << "modified_functional: equivalence Itilde >= (Ivv + kappa Ixx)/2 violated at t=" << r.t
               << "; epsilon=" << epsilon << " is too large, try a smaller value";
            throw std::invalid_argument(os.str());
        }
        out.t.push_back(r.t);
        out.Itilde.push_back(it);
    }
    if (gamma_fixed >= 0.0) {
        out.gamma = gamma_fixed;
    } else {
        out.gamma = records.front().H > 1e-300 ? out.Itilde.front() / records.front().H : 1.0;
    }
    int ok = 0, n = 0;
    for (std::size_t k = 0; k < records.size(); ++k) {
        out.lyapunov.push_back(out.Itilde[k] + out.gamma * records[k].H);
        if (k > 0) {
            ++n;
            if (out.lyapunov[k] <= out.lyapunov[k - 1] + 1e-8) ++ok;
        }
    }
    out.frac_nonincreasing = n > 0 ? static_cast<double>(ok) / n : 1.0;
    return out;
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& H, double t0, double t1) {
    if (t.size() != H.size()) throw std::invalid_argument("fit_decay: size mismatch");
    if (!(t0 < t1)) throw std::invalid_argument("fit_decay: need t0 < t1");
    std::vector<double> ts, ys;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] >= t0 && t[k] <= t1 && H[k] > 1e-14) {
            ts.push_back(t[k]);
            ys.push_back(std::log(H[k]));
        }
    }
    if (ts.size() < 10) {
        throw std::invalid_argument("fit_decay: fewer than 10 usable samples in [" +
                                    std::to_string(t0) + "," + std::to_string(t1) + "]");
    }
    const std::size_t n = ts.size();
    double mt = 0.0, my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mt += ts[k];
        my += ys[k];
    }
    mt /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sxx += (ts[k] - mt) * (ts[k] - mt);
        sxy += (ts[k] - mt) * (ys[k] - my);
        syy += (ys[k] - my) * (ys[k] - my);
    }
    const double slope = sxy / sxx;
    const double icept = my - slope * mt;
    double ss_res = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double e = ys[k] - (slope * ts[k] + icept);
        ss_res += e * e;
    }
    DecayFit fit;
    fit.t0 = t0;
    fit.t1 = t1;
    fit.delta_fit = -slope;
    fit.C_fit = std::exp(icept);
    fit.r_squared = syy > 1e-300 ? 1.0 - ss_res / syy : 1.0;
    fit.n_samples = static_cast<int>(n);
    return fit;
}

std::string DecayFit::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\n  \"t0\": " << t0 << ",\n  \"t1\": " << t1 << ",\n  \"delta_fit\": " << delta_fit
       << ",\n  \"C_fit\": " << C_fit << ",\n  \"r_squared\": " << r_squared
       << ",\n  \"n_samples\": " << n_samples << "\n}\n";
    return os.str();
}

}  // namespace fpa
