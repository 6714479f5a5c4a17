#include "fpa/particles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fpa/parallel.hpp"
#include "fpa/rng.hpp"

namespace fpa {

namespace {

constexpr double kIsolatedFloor = 1e-30;

double wrap(double x, double L) {
    x = std::fmod(x, L);
    return x < 0.0 ? x + L : x;
}

double periodic_dist(double a, double b, double L) {
    double d = std::abs(a - b);
    return std::min(d, L - d);
}

}  // namespace

DriftResult cs_drift(const ParticleEnsemble& ens, const Kernel& kernel, int threads) {
    const int N = ens.N();
    DriftResult out;
    out.s.assign(N, 0.0);
    out.vbar.assign(N, 0.0);
    if (N == 0) return out;
    if (kernel.shape == KernelShape::global) {
        double M = 0.0, P = 0.0;
        for (int j = 0; j < N; ++j) {
            M += ens.m[j];
            P += ens.m[j] * ens.v[j];
        }
        const double s = M / kernel.L;
        const double vb = P / M;
        for (int i = 0; i < N; ++i) {
            out.s[i] = s;
            out.vbar[i] = vb;
        }
        return out;
    }
    // Cell list with bin width >= r0, so +/-1 bins cover the support.
    const double L = kernel.L;
    const int nb = std::max(1, static_cast<int>(std::floor(L / kernel.r0)));
    const double wb = L / nb;
    std::vector<std::vector<int>> bins(nb);
    for (int j = 0; j < N; ++j) {
        int b = static_cast<int>(ens.x[j] / wb);
        if (b >= nb) b = nb - 1;
        bins[b].push_back(j);
    }
    parallel_for(N, threads, [&](int ib, int ie) {
        for (int i = ib; i < ie; ++i) {
            const int b = std::min(nb - 1, static_cast<int>(ens.x[i] / wb));
            int cand[3] = {(b + nb - 1) % nb, b, (b + 1) % nb};
            double s = 0.0, p = 0.0;
            for (int kbin = 0; kbin < 3; ++kbin) {
                bool seen = false;
                for (int prev = 0; prev < kbin; ++prev) seen = seen || cand[prev] == cand[kbin];
                if (seen) continue;
                for (int j : bins[cand[kbin]]) {
                    const double phi = kernel.phi_continuous(periodic_dist(ens.x[i], ens.x[j], L));
                    s += ens.m[j] * phi;
                    p += ens.m[j] * phi * ens.v[j];
                }
            }
            out.s[i] = s;
            out.vbar[i] = s > 0.0 ? p / s : 0.0;
        }
    });
    for (int i = 0; i < N; ++i) {
        if (out.s[i] < kIsolatedFloor) {
            throw degenerate_density_error("cs_drift: agent " + std::to_string(i) +
                                           " is isolated (no neighbors in the kernel footprint)");
        }
    }
    return out;
}

void em_step(ParticleEnsemble& ens, const SdeParams& params) {
    if (!(params.dt > 0.0)) throw std::invalid_argument("em_step: dt must be > 0");
    const int N = ens.N();
    DriftResult drift = cs_drift(ens, params.kernel, params.threads);
    const CounterRng rng{ens.seed};
    const double dt = params.dt;
    const std::uint64_t step = ens.step;
    parallel_for(N, params.threads, [&](int ib, int ie) {
        for (int i = ib; i < ie; ++i) {
            const double s = drift.s[i];
            const double z = std::abs(ens.v[i]);
            // The mean-field limit puts the deterministic force inside the
            // s_rho bracket of the kinetic equation, so it is scaled by s_i
            // here; see the sign-convention test in the suite.
            const double Fdet =
                s * params.force.sigma * (1.0 - std::pow(z, params.force.p)) * ens.v[i] /
                eta(z, params.force);
            double dv = s * (drift.vbar[i] - ens.v[i]) * dt + Fdet * dt;
            if (params.noise_on) {
                dv += std::sqrt(2.0 * s * dt) * rng.normal(rng_stream::em_noise, step, i);
            }
            ens.x[i] = wrap(ens.x[i] + ens.v[i] * dt, ens.L);
            ens.v[i] += dv;
        }
    });
    ens.step += 1;
    ens.t += dt;
}

DensityResult empirical_density(const ParticleEnsemble& ens, const Grid& grid, bool smooth,
                                double hx, double hv) {
    DensityResult out;
    out.state.grid = grid;
    out.state.t = ens.t;
    out.state.f.assign(grid.size(), 0.0);
    const double dx = grid.dx(), dv = grid.dv();
    for (int i = 0; i < ens.N(); ++i) {
        const double v = ens.v[i];
        if (v < -grid.Vmax || v >= grid.Vmax) continue;  // outside the velocity window
        int ix = static_cast<int>(ens.x[i] / dx);
        if (ix >= grid.Nx) ix = grid.Nx - 1;
        const int jv = static_cast<int>((v + grid.Vmax) / dv);
        out.state.f[grid.idx(ix, jv)] += ens.m[i];
    }
    if (smooth) {
        if (hx <= 0.0 || hv <= 0.0) {
            // Scott's rule per axis for a 2-d sample.
            double mx = 0.0, mv = 0.0, sx = 0.0, sv = 0.0, M = 0.0;
            for (int i = 0; i < ens.N(); ++i) {
                M += ens.m[i];
                mx += ens.m[i] * ens.x[i];
                mv += ens.m[i] * ens.v[i];
            }
            mx /= M;
            mv /= M;
            for (int i = 0; i < ens.N(); ++i) {
                sx += ens.m[i] * (ens.x[i] - mx) * (ens.x[i] - mx);
                sv += ens.m[i] * (ens.v[i] - mv) * (ens.v[i] - mv);
            }
            const double nfac = std::pow(static_cast<double>(std::max(ens.N(), 2)), -1.0 / 6.0);
            if (hx <= 0.0) hx = std::sqrt(sx / M) * nfac;
            if (hv <= 0.0) hv = std::sqrt(sv / M) * nfac;
        }
        out.bandwidth_x = hx;
        out.bandwidth_v = hv;
        auto gauss_taps = [](double h, double cell) {
            const int r = std::max(1, static_cast<int>(std::ceil(4.0 * h / cell)));
            std::vector<double> taps(2 * r + 1);
            double s = 0.0;
            for (int k = -r; k <= r; ++k) {
                taps[k + r] = std::exp(-0.5 * (k * cell / h) * (k * cell / h));
                s += taps[k + r];
            }
            for (double& tval : taps) tval /= s;
            return taps;
        };
        const auto tx = gauss_taps(hx, dx);
        const auto tv = gauss_taps(hv, dv);
        const int rx = (static_cast<int>(tx.size()) - 1) / 2;
        const int rv = (static_cast<int>(tv.size()) - 1) / 2;
        std::vector<double> tmp(grid.size(), 0.0);
        for (int i = 0; i < grid.Nx; ++i) {  // periodic in x
            for (int j = 0; j < grid.Nv; ++j) {
                const double val = out.state.f[grid.idx(i, j)];
                if (val == 0.0) continue;
                for (int k = -rx; k <= rx; ++k) {
                    tmp[grid.idx((i + k + grid.Nx * 8) % grid.Nx, j)] += val * tx[k + rx];
                }
            }
        }
        std::fill(out.state.f.begin(), out.state.f.end(), 0.0);
        for (int i = 0; i < grid.Nx; ++i) {  // clamped in v
            for (int j = 0; j < grid.Nv; ++j) {
                const double val = tmp[grid.idx(i, j)];
                if (val == 0.0) continue;
                for (int k = -rv; k <= rv; ++k) {
                    const int jj = std::clamp(j + k, 0, grid.Nv - 1);
                    out.state.f[grid.idx(i, jj)] += val * tv[k + rv];
                }
            }
        }
    }
    double mass = 0.0;
    for (double v : out.state.f) mass += v;
    if (mass > 0.0) {
        const double cell = dx * dv;
        for (double& v : out.state.f) v /= mass * cell;
    }
    return out;
}

Moments empirical_moments(const ParticleEnsemble& ens, int hist_bins) {
    Moments mo;
    double M = 0.0;
    for (int i = 0; i < ens.N(); ++i) {
        M += ens.m[i];
        mo.momentum += ens.m[i] * ens.v[i];
        mo.kinetic_energy += 0.5 * ens.m[i] * ens.v[i] * ens.v[i];
        mo.max_speed = std::max(mo.max_speed, std::abs(ens.v[i]));
    }
    if (M > 0.0) {
        mo.momentum /= M;
        mo.kinetic_energy /= M;
    }
    mo.speed_hist.assign(std::max(1, hist_bins), 0.0);
    mo.speed_hist_max = std::max(mo.max_speed, 1e-12);
    for (int i = 0; i < ens.N(); ++i) {
        int b = static_cast<int>(std::abs(ens.v[i]) / mo.speed_hist_max * hist_bins);
        if (b >= hist_bins) b = hist_bins - 1;
        mo.speed_hist[b] += ens.m[i];
    }
    return mo;
}

ParticleEnsemble init_ensemble(int N, double L, const InitSpec& spec, const EquilibriumTable& eq,
                               std::uint64_t seed) {
    if (N < 1) throw std::invalid_argument("init_ensemble: N must be >= 1");
    if (spec.preset == Preset::from_file) return read_ensemble(spec.file);
    ParticleEnsemble ens;
    ens.L = L;
    ens.seed = seed;
    ens.m.assign(N, 1.0 / N);
    ens.x.resize(N);
    ens.v.resize(N);
    const CounterRng rng{seed};
    const Grid& g = eq.grid;
    std::vector<double> cdf;
    if (spec.preset == Preset::equilibrium) {
        cdf.resize(g.Nv + 1, 0.0);
        for (int j = 0; j < g.Nv; ++j) cdf[j + 1] = cdf[j] + eq.f_inf[j];
        for (double& c : cdf) c /= cdf.back();
    }
    for (int i = 0; i < N; ++i) {
        const double u0 = rng.uniform(rng_stream::init_sample, 0, i, 0);
        switch (spec.preset) {
            case Preset::equilibrium: {
                ens.x[i] = u0 * L;
                const double u = rng.uniform(rng_stream::init_sample, 0, i, 1);
                const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
                int j = static_cast<int>(it - cdf.begin()) - 1;
                j = std::clamp(j, 0, g.Nv - 1);
                const double frac = (u - cdf[j]) / std::max(cdf[j + 1] - cdf[j], 1e-300);
                ens.v[i] = g.v(j) - 0.5 * g.dv() + frac * g.dv();
                break;
            }
            case Preset::shifted_maxwellian: {
                if (!(spec.T > 0.0)) throw std::invalid_argument("init_ensemble: T must be > 0");
                ens.x[i] = u0 * L;
                ens.v[i] = spec.a +
                           std::sqrt(spec.T) * rng.normal(rng_stream::init_sample, 1, i);
                break;
            }
            case Preset::two_bump: {
                // Matches the solver preset: centers L/4 and 3L/4, width L/10,
                // drifts +/-1, velocity temperature 0.5.
                const bool first = u0 < 0.5;
                const double cx = first ? 0.25 * L : 0.75 * L;
                const double drift = first ? 1.0 : -1.0;
                ens.x[i] = wrap(cx + (L / 10.0) * rng.normal(rng_stream::init_sample, 2, i), L);
                ens.v[i] = drift + std::sqrt(0.5) * rng.normal(rng_stream::init_sample, 3, i);
                break;
            }
            case Preset::from_file:
                break;  // handled above
        }
    }
    return ens;
}

std::string ensemble_text(const ParticleEnsemble& ens) {
    std::ostringstream os;
    char buf[32];
    os << "FPP1\n" << ens.N() << ' ';
    std::snprintf(buf, sizeof buf, "%.17g", ens.L);
    os << buf << ' ';
    std::snprintf(buf, sizeof buf, "%.17g", ens.t);
    os << buf << ' ' << ens.seed << '\n';
    for (int i = 0; i < ens.N(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", ens.m[i]);
        os << buf << ' ';
        std::snprintf(buf, sizeof buf, "%.17g", ens.x[i]);
        os << buf << ' ';
        std::snprintf(buf, sizeof buf, "%.17g", ens.v[i]);
        os << buf << '\n';
    }
    return os.str();
}

void write_ensemble(const std::string& path, const ParticleEnsemble& ens) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_ensemble: cannot open " + path);
    out << ensemble_text(ens);
}

ParticleEnsemble parse_ensemble(const std::string& text) {
    std::istringstream in(text);
    std::string magic;
    in >> magic;
    if (magic != "FPP1") throw std::runtime_error("parse_ensemble: bad magic '" + magic + "'");
    ParticleEnsemble ens;
    int N = 0;
    in >> N >> ens.L >> ens.t >> ens.seed;
    if (!in || N < 0) throw std::runtime_error("parse_ensemble: bad header line");
    ens.m.resize(N);
    ens.x.resize(N);
    ens.v.resize(N);
    double msum = 0.0;
    for (int i = 0; i < N; ++i) {
        if (!(in >> ens.m[i] >> ens.x[i] >> ens.v[i])) {
            throw std::runtime_error("parse_ensemble: truncated agent data");
        }
        if (!(ens.m[i] > 0.0)) throw std::runtime_error("parse_ensemble: non-positive mass");
        ens.x[i] = wrap(ens.x[i], ens.L);
        msum += ens.m[i];
    }
    if (N > 0 && std::abs(msum - 1.0) > 1e-12) {
        throw std::runtime_error("parse_ensemble: masses sum to " + std::to_string(msum) +
                                 ", expected 1");
    }
    return ens;
}

ParticleEnsemble read_ensemble(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_ensemble: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_ensemble(ss.str());
}

}  // namespace fpa
