#include "kvn/field.hpp"

#include <algorithm>
#include <cmath>

namespace kvn {

double DensityField::integral() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * cell_volume;
}

WaveField gaussian_packet(GridPtr grid, const std::vector<double>& center,
                          const std::vector<double>& sigma, const std::vector<double>& wavevector) {
    const Grid& g = *grid;
    const std::size_t na = g.n_axes();
    if (center.size() != na || sigma.size() != na)
        throw ConfigError("gaussian_packet: center and sigma must list one entry per axis (" +
                          std::to_string(na) + ")");
    if (!wavevector.empty() && wavevector.size() != na)
        throw ConfigError("gaussian_packet: wavevector must list one entry per axis");

    for (std::size_t ax = 0; ax < na; ++ax) {
        if (!(sigma[ax] > 0.0))
            throw ConfigError("gaussian_packet: sigma must be positive on axis " + g.axis(ax).name);
        const double lo = center[ax] - g.axis(ax).min;
        const double hi = g.axis(ax).max - center[ax];
        if (lo < 5.0 * sigma[ax] || hi < 5.0 * sigma[ax])
            throw ConfigError("gaussian_packet: center is closer than 5 sigma to the boundary of axis " +
                              g.axis(ax).name);
    }

    // Per-axis 1D factors; psi is their outer product.
    std::vector<std::vector<cplx>> factors(na);
    for (std::size_t ax = 0; ax < na; ++ax) {
        const auto& xs = g.coords(ax);
        factors[ax].resize(xs.size());
        const double s2 = sigma[ax] * sigma[ax];
        const double kx = wavevector.empty() ? 0.0 : wavevector[ax];
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double u = xs[i] - center[ax];
            const double amp = std::exp(-u * u / (4.0 * s2));
            factors[ax][i] = amp * cplx(std::cos(kx * u), std::sin(kx * u));
        }
    }

    WaveField f(std::move(grid));
    const std::size_t total = f.size();
    parallel_for(total, [&](std::size_t b, std::size_t e) {
        std::vector<std::size_t> idx(na);
        for (std::size_t i = b; i < e; ++i) {
            g.unravel(i, idx.data());
            cplx v = factors[0][idx[0]];
            for (std::size_t ax = 1; ax < na; ++ax) v *= factors[ax][idx[ax]];
            f.a[i] = v;
        }
    });
    normalize(f);
    return f;
}

cplx inner_product(const WaveField& a, const WaveField& b) {
    if (!a.grid->same_shape(*b.grid)) throw ConfigError("inner_product: grid mismatch");
    const cplx s = parallel_sum_cplx(a.size(), [&](std::size_t lo, std::size_t hi) {
        cplx acc{};
        for (std::size_t i = lo; i < hi; ++i) acc += std::conj(a.a[i]) * b.a[i];
        return acc;
    });
    return s * a.grid->cell_volume();
}

double norm_squared(const WaveField& f) {
    const double s = parallel_sum(f.size(), [&](std::size_t lo, std::size_t hi) {
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += std::norm(f.a[i]);
        return acc;
    });
    return s * f.grid->cell_volume();
}

double norm(const WaveField& f) { return std::sqrt(norm_squared(f)); }

void normalize(WaveField& f) {
    const double n = norm(f);
    if (!(n > 0.0)) throw NumericsError("normalize: field has zero norm");
    scale(f, cplx(1.0 / n, 0.0));
}

double linf_diff(const WaveField& a, const WaveField& b) {
    if (a.size() != b.size()) throw ConfigError("linf_diff: size mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.a[i] - b.a[i]));
    return m;
}

double max_abs(const WaveField& f) {
    double m = 0.0;
    for (const cplx& v : f.a) m = std::max(m, std::abs(v));
    return m;
}

double max_imag_abs(const WaveField& f) {
    double m = 0.0;
    for (const cplx& v : f.a) m = std::max(m, std::abs(v.imag()));
    return m;
}

bool all_finite(const WaveField& f) {
    for (const cplx& v : f.a)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

void scale(WaveField& f, cplx c) {
    parallel_for(f.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) f.a[i] *= c;
    });
}

void axpy(WaveField& y, cplx c, const WaveField& x) {
    parallel_for(y.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) y.a[i] += c * x.a[i];
    });
}

double coord_moment(const WaveField& f, std::size_t axis, int power) {
    const Grid& g = *f.grid;
    const std::size_t n = g.axis(axis).n;
    const std::size_t s = g.stride(axis);
    double num = 0.0, den = 0.0;
    const auto& xs = g.coords(axis);
    // Accumulate per axis-index weights, then combine; deterministic order.
    std::vector<double> w(n, 0.0);
    const std::size_t outer = f.size() / (n * s);
    for (std::size_t o = 0; o < outer; ++o) {
        const cplx* base = f.data() + o * n * s;
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            const cplx* row = base + j * s;
            for (std::size_t c = 0; c < s; ++c) acc += std::norm(row[c]);
            w[j] += acc;
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        den += w[j];
        num += w[j] * std::pow(xs[j], power);
    }
    if (den == 0.0) throw NumericsError("coord_moment: zero-norm field");
    return num / den;
}

double fn_moment(const WaveField& f, const std::function<double(const double*)>& fn) {
    const Grid& g = *f.grid;
    const std::size_t na = g.n_axes();
    double num = parallel_sum(f.size(), [&](std::size_t lo, std::size_t hi) {
        std::vector<std::size_t> idx(na);
        std::vector<double> coords(na);
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            const double p = std::norm(f.a[i]);
            if (p == 0.0) continue;
            g.unravel(i, idx.data());
            for (std::size_t ax = 0; ax < na; ++ax) coords[ax] = g.coords(ax)[idx[ax]];
            acc += p * fn(coords.data());
        }
        return acc;
    });
    double den = parallel_sum(f.size(), [&](std::size_t lo, std::size_t hi) {
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += std::norm(f.a[i]);
        return acc;
    });
    if (den == 0.0) throw NumericsError("fn_moment: zero-norm field");
    return num / den;
}

DensityField marginal_density(const WaveField& f, const std::vector<std::string>& kept_axes) {
    const Grid& g = *f.grid;
    std::vector<std::size_t> kept;
    kept.reserve(kept_axes.size());
    for (const auto& name : kept_axes) kept.push_back(g.axis_index(name));

    DensityField out;
    std::size_t total_kept = 1;
    double kept_vol = 1.0;
    for (std::size_t ax : kept) {
        out.axes.push_back(g.axis(ax));
        total_kept *= g.axis(ax).n;
        kept_vol *= g.axis(ax).spacing();
    }
    out.cell_volume = kept_vol;
    out.values.assign(std::max<std::size_t>(total_kept, 1), 0.0);
    const double reduced_vol = g.cell_volume() / kept_vol;

    std::vector<std::size_t> idx(g.n_axes());
    for (std::size_t i = 0; i < f.size(); ++i) {
        g.unravel(i, idx.data());
        std::size_t r = 0;
        for (std::size_t k = 0; k < kept.size(); ++k) r = r * g.axis(kept[k]).n + idx[kept[k]];
        out.values[r] += std::norm(f.a[i]) * reduced_vol;
    }
    return out;
}

}  // namespace kvn
