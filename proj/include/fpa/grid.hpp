#ifndef FPA_GRID_HPP
#define FPA_GRID_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fpa {

// Periodic-in-x phase-space grid. Cell centers, x in [0,L), v in [-Vmax,Vmax].
// Nv must be even so the velocity nodes come in exact +/- pairs.
struct Grid {
    int Nx = 64;
    int Nv = 128;
    double L = 6.283185307179586;
    double Vmax = 6.0;

    double dx() const { return L / Nx; }
    double dv() const { return 2.0 * Vmax / Nv; }
    double x(int i) const { return (i + 0.5) * dx(); }
    double v(int j) const { return -Vmax + (j + 0.5) * dv(); }
    std::size_t size() const { return static_cast<std::size_t>(Nx) * Nv; }
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * Nv + j; }

    void validate() const {
        if (Nx < 4) throw std::invalid_argument("grid.Nx must be >= 4");
        if (Nv < 4 || Nv % 2 != 0) throw std::invalid_argument("grid.Nv must be even and >= 4");
        if (!(L > 0.0)) throw std::invalid_argument("grid.L must be > 0");
        if (!(Vmax > 0.0)) throw std::invalid_argument("grid.Vmax must be > 0");
    }

    bool operator==(const Grid&) const = default;
};

// Phase-space density on a Grid, row-major with x outer, v inner.
struct KineticState {
    Grid grid;
    std::vector<double> f;
    double t = 0.0;

    double& at(int i, int j) { return f[grid.idx(i, j)]; }
    double at(int i, int j) const { return f[grid.idx(i, j)]; }
    double mass() const {
        double s = 0.0;
        for (double v : f) s += v;
        return s * grid.dx() * grid.dv();
    }
};

}  // namespace fpa

#endif
