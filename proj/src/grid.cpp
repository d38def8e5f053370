#include "kvn/grid.hpp"

#include <cmath>

namespace kvn {

namespace {

bool power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::vector<std::string> axis_names(int d, GridLayout layout, Representation rep) {
    const bool mom = (rep == Representation::momentum);
    if (layout == GridLayout::two_particle) {
        if (mom) return {"x1", "x2", "p1", "p2"};
        return {"x1", "x2", "v1", "v2"};
    }
    if (d == 1) return {"x", mom ? "px" : "vx"};
    return {"x", "y", mom ? "px" : "vx", mom ? "py" : "vy"};
}

}  // namespace

Grid::Grid(const GridSpec& spec) {
    const int d = spec.config_dim;
    if (d != 1 && d != 2)
        throw ConfigError("config_dim must be 1 or 2, got " + std::to_string(d));
    if (spec.layout == GridLayout::two_particle && d != 2)
        throw ConfigError("two_particle layout requires config_dim 2 (axes x1, x2, v1, v2)");
    const std::size_t n_axes = 2 * static_cast<std::size_t>(d);
    if (spec.points_per_axis.size() != n_axes)
        throw ConfigError("points_per_axis must list " + std::to_string(n_axes) + " entries");
    if (spec.position_extent.size() != static_cast<std::size_t>(d) ||
        spec.velocity_extent.size() != static_cast<std::size_t>(d))
        throw ConfigError("position_extent/velocity_extent must list config_dim intervals");

    config_dim_ = d;
    layout_ = spec.layout;
    const auto names = axis_names(d, spec.layout, Representation::velocity);

    axes_.resize(n_axes);
    std::size_t total = 1;
    for (std::size_t a = 0; a < n_axes; ++a) {
        Axis& ax = axes_[a];
        ax.name = names[a];
        ax.n = spec.points_per_axis[a];
        const Interval ext = a < static_cast<std::size_t>(d) ? spec.position_extent[a]
                                                             : spec.velocity_extent[a - d];
        ax.min = ext.min;
        ax.max = ext.max;
        if (!power_of_two(ax.n) || ax.n < 8)
            throw ConfigError("axis " + ax.name + ": point count must be a power of two >= 8, got " +
                              std::to_string(ax.n));
        if (!(ax.width() > 0.0))
            throw ConfigError("axis " + ax.name + ": extent must have positive width");
        total *= ax.n;
    }
    if (total > spec.max_points)
        throw ConfigError("grid has " + std::to_string(total) + " points, exceeding the memory cap of " +
                          std::to_string(spec.max_points));
    total_ = total;
    finish_build();
}

void Grid::finish_build() {
    const std::size_t n_axes = axes_.size();
    strides_.assign(n_axes, 1);
    for (std::size_t a = n_axes - 1; a-- > 0;) strides_[a] = strides_[a + 1] * axes_[a + 1].n;

    cell_volume_ = 1.0;
    coords_.resize(n_axes);
    wavenumbers_.resize(n_axes);
    for (std::size_t a = 0; a < n_axes; ++a) {
        const Axis& ax = axes_[a];
        cell_volume_ *= ax.spacing();
        coords_[a].resize(ax.n);
        wavenumbers_[a].resize(ax.n);
        const double dk = 2.0 * kPi / ax.width();
        for (std::size_t i = 0; i < ax.n; ++i) {
            coords_[a][i] = ax.coord(i);
            const auto half = ax.n / 2;
            const double ki = (i < half) ? static_cast<double>(i)
                                         : static_cast<double>(i) - static_cast<double>(ax.n);
            wavenumbers_[a][i] = dk * ki;
        }
    }
}

std::size_t Grid::axis_index(const std::string& name) const {
    for (std::size_t a = 0; a < axes_.size(); ++a)
        if (axes_[a].name == name) return a;
    throw ConfigError("unknown axis '" + name + "'");
}

bool Grid::has_axis(const std::string& name) const {
    for (const auto& ax : axes_)
        if (ax.name == name) return true;
    return false;
}

void Grid::unravel(std::size_t flat, std::size_t* idx) const {
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        idx[a] = flat / strides_[a];
        flat -= idx[a] * strides_[a];
    }
}

bool Grid::same_shape(const Grid& other) const {
    if (axes_.size() != other.axes_.size()) return false;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        if (axes_[a].n != other.axes_[a].n || axes_[a].min != other.axes_[a].min ||
            axes_[a].max != other.axes_[a].max)
            return false;
    }
    return true;
}

GridPtr Grid::momentum_relabel(double mass) const {
    if (representation_ == Representation::momentum)
        throw ConfigError("grid is already in the momentum representation");
    auto g = std::shared_ptr<Grid>(new Grid(*this));
    g->representation_ = Representation::momentum;
    const auto names = axis_names(config_dim_, layout_, Representation::momentum);
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        g->axes_[a].name = names[a];
        if (is_velocity_axis(a)) {
            g->axes_[a].min = mass * axes_[a].min;
            g->axes_[a].max = mass * axes_[a].max;
        }
    }
    g->finish_build();
    return g;
}

GridPtr Grid::velocity_relabel(double mass) const {
    if (representation_ == Representation::velocity)
        throw ConfigError("grid is already in the velocity representation");
    auto g = std::shared_ptr<Grid>(new Grid(*this));
    g->representation_ = Representation::velocity;
    const auto names = axis_names(config_dim_, layout_, Representation::velocity);
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        g->axes_[a].name = names[a];
        if (is_velocity_axis(a)) {
            g->axes_[a].min = axes_[a].min / mass;
            g->axes_[a].max = axes_[a].max / mass;
        }
    }
    g->finish_build();
    return g;
}

GridPtr build_grid(const GridSpec& spec) { return std::make_shared<Grid>(spec); }

GridPtr make_grid_1d(std::size_t nx, std::size_t nv, Interval x, Interval v) {
    GridSpec s;
    s.config_dim = 1;
    s.points_per_axis = {nx, nv};
    s.position_extent = {x};
    s.velocity_extent = {v};
    return build_grid(s);
}

GridPtr make_grid_2d(std::size_t n, Interval x, Interval v) {
    GridSpec s;
    s.config_dim = 2;
    s.points_per_axis = {n, n, n, n};
    s.position_extent = {x, x};
    s.velocity_extent = {v, v};
    return build_grid(s);
}

GridPtr make_two_particle_grid(std::size_t n, Interval x, Interval v) {
    GridSpec s;
    s.config_dim = 2;
    s.layout = GridLayout::two_particle;
    s.points_per_axis = {n, n, n, n};
    s.position_extent = {x, x};
    s.velocity_extent = {v, v};
    return build_grid(s);
}

}  // namespace kvn
