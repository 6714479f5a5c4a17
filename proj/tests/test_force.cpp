#include <cmath>
#include <random>

#include "doctest.h"
#include "fpa/force.hpp"

using namespace fpa;

namespace {

ForceParams params(double sigma, double p = 2.0, double q = 4.0, double R = 2.0, double w = 2.5) {
    ForceParams fp;
    fp.sigma = sigma;
    fp.p = p;
    fp.q = q;
    fp.R = R;
    fp.w = w;
    return fp;
}

// Closed-form G for eta == 1 (R beyond every sampled speed).
double G_closed_form(double z, double sigma, double p) {
    return sigma * (std::pow(z, p + 2.0) / (p + 2.0) - z * z / 2.0);
}

Vec fd_grad_V(const Vec& v, const ForceParams& fp, double h = 1e-5) {
    Vec g(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        Vec vp = v, vm = v;
        vp[k] += h;
        vm[k] -= h;
        g[k] = (potential_V(vp, fp) - potential_V(vm, fp)) / (2.0 * h);
    }
    return g;
}

std::vector<double> fd_hess_V(const Vec& v, const ForceParams& fp, double h = 1e-5) {
    const std::size_t n = v.size();
    std::vector<double> H(n * n);
    for (std::size_t k = 0; k < n; ++k) {
        Vec vp = v, vm = v;
        vp[k] += h;
        vm[k] -= h;
        const Vec gp = grad_V(vp, fp), gm = grad_V(vm, fp);
        for (std::size_t r = 0; r < n; ++r) H[r * n + k] = (gp[r] - gm[r]) / (2.0 * h);
    }
    return H;
}

}  // namespace

TEST_CASE("eta: cutoff plateau, monotone growth, asymptote") {
    const ForceParams fp = params(0.5, 2, 4, 2, 1);
    CHECK(eta(0.0, fp) == 1.0);
    CHECK(eta(fp.R, fp) == 1.0);
    CHECK(eta(0.5 * fp.R, fp) == 1.0);
    double prev = 1.0;
    for (double z = fp.R; z < 20.0; z += 0.01) {
        const double e = eta(z, fp);
        CHECK(e >= prev);
        prev = e;
    }
    // asymptotic check against ((z-R)/w)^q
    const double z = fp.R + 10.0 * fp.w;
    const double ref = std::pow((z - fp.R) / fp.w, fp.q);
    CHECK(std::abs(eta(z, fp) - ref) / ref < 0.05);
    CHECK_THROWS_AS(eta(-0.1, fp), std::domain_error);
    // C1 continuity across the cutoff
    CHECK(eta_prime(fp.R, fp) == 0.0);
    CHECK(eta_prime(fp.R + 1e-9, fp) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("force: zeros at |v| in {0,1}, direct value, parity") {
    const ForceParams fp = params(0.5, 2, 4, 2, 1);
    CHECK(force({1.0, 0.0}, fp) == Vec{0.0, 0.0});
    CHECK(force({0.0, 0.0}, fp) == Vec{0.0, 0.0});
    const Vec F = force({0.5, 0.0}, fp);
    CHECK(F[0] == doctest::Approx(-0.1875).epsilon(1e-14));
    CHECK(F[1] == 0.0);
    // odd in v; friction above unit speed, propulsion below
    std::mt19937 gen(1234);
    std::uniform_real_distribution<double> U(-4.0, 4.0);
    for (int it = 0; it < 2000; ++it) {
        Vec v = {U(gen), U(gen)};
        Vec Fm = force({-v[0], -v[1]}, fp);
        Vec Fp = force(v, fp);
        CHECK(Fm[0] == doctest::Approx(-Fp[0]).epsilon(1e-12));
        const double speed = std::hypot(v[0], v[1]);
        const double fdotv = Fp[0] * v[0] + Fp[1] * v[1];
        CHECK(fdotv * (speed - 1.0) >= -1e-15);
    }
}

TEST_CASE("potential_G: quadrature against the closed form") {
    ForceParams fp = params(0.5, 2, 4, 99.0, 1.0);  // eta == 1 on the sampled range
    CHECK(potential_G(0.0, fp) == 0.0);
    CHECK(potential_G(1.0, fp) == doctest::Approx(-0.125).epsilon(1e-11));
    CHECK(potential_G(std::sqrt(2.0), fp) == doctest::Approx(0.0).epsilon(1e-11));
    for (double z : {0.3, 0.9, 1.7, 2.6}) {
        CHECK(potential_G(z, fp) ==
              doctest::Approx(G_closed_form(z, fp.sigma, fp.p)).epsilon(1e-10));
    }
    // antiderivative property with the real cutoff in play
    fp = params(0.25, 2, 4, 2, 2.5);
    for (double z : {0.5, 1.5, 2.5, 4.0, 6.0}) {
        const double h = 1e-5;
        const double fd = (potential_G(z + h, fp) - potential_G(z - h, fp)) / (2.0 * h);
        const double exact = fp.sigma * (std::pow(z, fp.p + 1.0) - z) / eta(z, fp);
        CHECK(fd == doctest::Approx(exact).epsilon(1e-6));
    }
}

TEST_CASE("potential_V / grad_V / hess_V at pinned points") {
    const ForceParams fp = params(0.5, 2, 4, 2, 1);
    // v = 0: radial limit
    CHECK(potential_V({0.0, 0.0}, fp) == 0.0);
    CHECK(grad_V({0.0, 0.0}, fp) == Vec{0.0, 0.0});
    const auto H0 = hess_V({0.0, 0.0}, fp);
    CHECK(H0[0] == doctest::Approx(1.0 - fp.sigma).epsilon(1e-15));
    CHECK(H0[3] == doctest::Approx(1.0 - fp.sigma).epsilon(1e-15));
    CHECK(H0[1] == 0.0);
    // |v| = 1: V = 1/2 + G(1) = 0.375, grad = v (force vanishes)
    CHECK(potential_V({1.0, 0.0}, fp) == doctest::Approx(0.375).epsilon(1e-11));
    const Vec g = grad_V({1.0, 0.0}, fp);
    CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g[1] == 0.0);
}

TEST_CASE("grad_V identity and finite-difference oracles") {
    const ForceParams fp = params(0.25);
    std::mt19937 gen(99);
    std::uniform_real_distribution<double> U(-5.0, 5.0);
    for (int it = 0; it < 300; ++it) {
        const int n = 1 + it % 3;
        Vec v(n);
        for (auto& c : v) c = U(gen);
        // gradV == v + F exactly as implemented
        const Vec g = grad_V(v, fp);
        const Vec F = force(v, fp);
        for (int k = 0; k < n; ++k) CHECK(g[k] == v[k] + F[k]);
        // FD gradient of V
        const Vec gfd = fd_grad_V(v, fp);
        for (int k = 0; k < n; ++k) {
            CHECK(g[k] == doctest::Approx(gfd[k]).epsilon(1e-6));
        }
        // FD Jacobian of grad_V vs analytic Hessian
        const auto Ha = hess_V(v, fp);
        const auto Hf = fd_hess_V(v, fp);
        double num = 0.0, den = 0.0;
        for (int c = 0; c < n * n; ++c) {
            num += (Ha[c] - Hf[c]) * (Ha[c] - Hf[c]);
            den += Ha[c] * Ha[c];
        }
        CHECK(std::sqrt(num) <= 1e-6 * std::max(1.0, std::sqrt(den)));
        // symmetry
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) CHECK(Ha[r * n + c] == doctest::Approx(Ha[c * n + r]).epsilon(1e-15));
    }
}

TEST_CASE("coercivity_bounds: degenerate sigma=0 and the default configuration") {
    const CoercivityBounds id = coercivity_bounds(params(0.0));
    CHECK(id.lambda == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(id.Lambda == doctest::Approx(1.0).epsilon(1e-8));

    const ForceParams fp = params(0.25);  // default w = 2.5
    const CoercivityBounds cb = coercivity_bounds(fp);
    CHECK(cb.lambda > 0.0);
    CHECK(cb.lambda <= 1.0 - fp.sigma);  // the v=0 eigenvalue participates in the min
    CHECK(cb.Lambda >= 1.0);

    // rejection sampling of the sandwich, n in {1,2,3}
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> U(-8.0, 8.0);
    for (int it = 0; it < 10000; ++it) {
        const int n = 1 + it % 3;
        Vec v(n), y(n);
        for (auto& c : v) c = U(gen);
        for (auto& c : y) c = U(gen);
        const auto H = hess_V(v, fp);
        double quad = 0.0, y2 = 0.0;
        for (int r = 0; r < n; ++r) {
            y2 += y[r] * y[r];
            for (int c = 0; c < n; ++c) quad += y[r] * H[r * n + c] * y[c];
        }
        CHECK(quad >= cb.lambda * y2);
        CHECK(quad <= cb.Lambda * y2);
    }
}

TEST_CASE("coercivity_bounds: rejection when the Hessian loses positivity") {
    // For sigma=0.5, q=4, R=2, w=1 the eta transition drives the radial
    // eigenvalue negative near |v| ~ 2.9; verified against the independent
    // finite-difference scan below.
    const ForceParams fp = params(0.5, 2, 4, 2, 1);
    double fd_min = 1e300;
    for (int k = 0; k <= 4000; ++k) {
        const double z = 10.0 * k / 4000;
        const auto H = fd_hess_V({z, 0.0}, fp);
        fd_min = std::min(fd_min, std::min(H[0], H[3]));
    }
    CHECK(fd_min < 0.0);
    CHECK(fd_min == doctest::Approx(-1.8259830508).epsilon(1e-4));
    CHECK_THROWS_AS(coercivity_bounds(fp), coercivity_error);
    try {
        coercivity_bounds(fp);
    } catch (const coercivity_error& e) {
        CHECK(e.lambda_found == doctest::Approx(fd_min).epsilon(1e-5));
    }
}

TEST_CASE("equilibrium: Gaussian partition constant, symmetry, zero momentum") {
    ForceParams fp = params(0.0);
    Grid grid{8, 256, 2.0 * M_PI, auto_vmax(fp)};
    CHECK(grid.Vmax >= 8.0);
    const EquilibriumTable tab = equilibrium(grid, fp);
    const double Zexact = 2.0 * M_PI * std::sqrt(2.0 * M_PI);
    CHECK(tab.Z == doctest::Approx(Zexact).epsilon(1e-8));
    // discrete mass exactly 1 after normalization
    double mass = 0.0;
    for (double g : tab.f_inf) mass += g;
    mass *= grid.L * grid.dv();
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    // even in v, exactly, and zero discrete momentum
    double mom = 0.0;
    for (int j = 0; j < grid.Nv; ++j) {
        CHECK(tab.f_inf[j] == tab.f_inf[grid.Nv - 1 - j]);
        mom += grid.v(j) * tab.f_inf[j];
    }
    CHECK(std::abs(mom) * grid.dv() * grid.L < 1e-14);

    // also for a nontrivial force
    fp = params(0.25);
    const EquilibriumTable tab2 = equilibrium(Grid{8, 128, 2.0 * M_PI, auto_vmax(fp)}, fp);
    for (int j = 0; j < 128; ++j) CHECK(tab2.f_inf[j] == tab2.f_inf[127 - j]);
    CHECK(tab2.f_inf[0] < 1e-12 * tab2.f_inf[63]);
}

TEST_CASE("equilibrium: insufficient Vmax is a truncation error") {
    const ForceParams fp = params(0.25);
    CHECK_THROWS_AS(equilibrium(Grid{8, 64, 2.0 * M_PI, 3.0}, fp), std::runtime_error);
}

TEST_CASE("ForceParams validation") {
    CHECK_THROWS_AS(params(1.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(params(-0.1).validate(), std::invalid_argument);
    CHECK_THROWS_AS(params(0.5, 2, 1.5).validate(), std::invalid_argument);  // q <= p
    CHECK_THROWS_AS(params(0.5, 0.0).validate(), std::invalid_argument);
    CHECK_NOTHROW(params(0.0).validate());
}
