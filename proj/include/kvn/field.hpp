#pragma once

#include <vector>

#include "kvn/common.hpp"
#include "kvn/grid.hpp"

namespace kvn {

/// Complex amplitudes psi over a Grid; the classical state.
struct WaveField {
    GridPtr grid;
    std::vector<cplx> a;
    double time = 0.0;

    WaveField() = default;
    explicit WaveField(GridPtr g, double t = 0.0) : grid(std::move(g)), a(grid->total_points()), time(t) {}

    std::size_t size() const { return a.size(); }
    cplx* data() { return a.data(); }
    const cplx* data() const { return a.data(); }
};

/// Nonnegative density over a subset of grid axes.
struct DensityField {
    std::vector<Axis> axes;
    std::vector<double> values;
    double cell_volume = 1.0;

    double integral() const;
};

/// Normalized product Gaussian centered at `center` with per-axis widths
/// `sigma` (stddev of |psi|^2) and optional per-axis plane-wave factors
/// e^{i k x}. Requires a 5-sigma margin to every boundary.
WaveField gaussian_packet(GridPtr grid, const std::vector<double>& center,
                          const std::vector<double>& sigma,
                          const std::vector<double>& wavevector = {});

/// Conjugate-linear in the first argument; cell-volume-weighted Riemann sum.
cplx inner_product(const WaveField& a, const WaveField& b);
double norm(const WaveField& f);
double norm_squared(const WaveField& f);
void normalize(WaveField& f);

/// l-infinity distance between amplitude arrays (same grid shape required).
double linf_diff(const WaveField& a, const WaveField& b);
double max_abs(const WaveField& f);
double max_imag_abs(const WaveField& f);
bool all_finite(const WaveField& f);

void scale(WaveField& f, cplx c);
/// y += c * x
void axpy(WaveField& y, cplx c, const WaveField& x);

/// Self-normalized moment of one axis coordinate: <coord^p>.
double coord_moment(const WaveField& f, std::size_t axis, int power = 1);
/// Self-normalized expectation of a real function of the full coordinate
/// vector (coords indexed by axis).
double fn_moment(const WaveField& f, const std::function<double(const double*)>& fn);

/// |psi|^2 reduced onto the named (kept) axes; integrates the rest out.
DensityField marginal_density(const WaveField& f, const std::vector<std::string>& kept_axes);

}  // namespace kvn
