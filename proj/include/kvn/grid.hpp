#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "kvn/common.hpp"

namespace kvn {

/// One grid axis. Left-edge sampling: coord(i) = min + i * spacing().
struct Axis {
    std::string name;
    std::size_t n = 0;
    double min = 0.0;
    double max = 0.0;

    double width() const { return max - min; }
    double spacing() const { return width() / static_cast<double>(n); }
    double coord(std::size_t i) const { return min + static_cast<double>(i) * spacing(); }
};

enum class GridLayout { single_particle, two_particle };
enum class Representation : std::uint8_t { velocity = 0, momentum = 1 };

struct Interval {
    double min = 0.0;
    double max = 0.0;
};

/// Discretization request for the (position, velocity) box.
/// points_per_axis lists the position axes first, then the velocity axes.
struct GridSpec {
    int config_dim = 1;
    GridLayout layout = GridLayout::single_particle;
    std::vector<std::size_t> points_per_axis;
    std::vector<Interval> position_extent;
    std::vector<Interval> velocity_extent;
    std::size_t max_points = std::size_t{1} << 24;
};

/// Realized grid: per-axis coordinates and spectral wavenumbers.
/// Axis storage order is positions first, then velocities
/// (x[,y], vx[,vy] for single-particle; x1, x2, v1, v2 for two-particle).
class Grid {
public:
    explicit Grid(const GridSpec& spec);

    int config_dim() const { return config_dim_; }
    GridLayout layout() const { return layout_; }
    Representation representation() const { return representation_; }
    std::size_t n_axes() const { return axes_.size(); }
    const Axis& axis(std::size_t i) const { return axes_[i]; }
    const std::vector<Axis>& axes() const { return axes_; }
    std::size_t total_points() const { return total_; }
    double cell_volume() const { return cell_volume_; }
    std::size_t stride(std::size_t ax) const { return strides_[ax]; }

    /// Index of the axis with the given name; throws ConfigError if unknown.
    std::size_t axis_index(const std::string& name) const;
    bool has_axis(const std::string& name) const;

    std::size_t position_axis(int k) const { return static_cast<std::size_t>(k); }
    std::size_t velocity_axis(int k) const { return static_cast<std::size_t>(config_dim_ + k); }
    bool is_velocity_axis(std::size_t ax) const { return ax >= static_cast<std::size_t>(config_dim_); }

    /// Coordinate samples along one axis (left-edge convention).
    const std::vector<double>& coords(std::size_t ax) const { return coords_[ax]; }
    /// Wavenumbers along one axis in standard FFT order {0, 1, ..., N/2-1, -N/2, ..., -1} * 2pi/L.
    const std::vector<double>& wavenumbers(std::size_t ax) const { return wavenumbers_[ax]; }

    /// Decomposes a flat row-major index into per-axis indices.
    void unravel(std::size_t flat, std::size_t* idx) const;
    double coord_of(std::size_t ax, std::size_t flat) const {
        return coords_[ax][(flat / strides_[ax]) % axes_[ax].n];
    }

    bool same_shape(const Grid& other) const;

    /// Builds the momentum-representation relabel of this grid: velocity axes
    /// become p = m*v axes (extents scaled by m, names px/py or p1/p2).
    std::shared_ptr<const Grid> momentum_relabel(double mass) const;
    /// Inverse relabel back to velocity axes.
    std::shared_ptr<const Grid> velocity_relabel(double mass) const;

private:
    Grid() = default;

    int config_dim_ = 1;
    GridLayout layout_ = GridLayout::single_particle;
    Representation representation_ = Representation::velocity;
    std::vector<Axis> axes_;
    std::vector<std::size_t> strides_;
    std::vector<std::vector<double>> coords_;
    std::vector<std::vector<double>> wavenumbers_;
    std::size_t total_ = 0;
    double cell_volume_ = 0.0;

    void finish_build();
};

using GridPtr = std::shared_ptr<const Grid>;

/// Validates the spec and realizes the grid (spec: build_grid).
GridPtr build_grid(const GridSpec& spec);

/// Convenience builders used throughout tests and scenarios.
GridPtr make_grid_1d(std::size_t nx, std::size_t nv, Interval x, Interval v);
GridPtr make_grid_2d(std::size_t n_per_axis, Interval x, Interval v);
GridPtr make_two_particle_grid(std::size_t n_per_axis, Interval x, Interval v);

}  // namespace kvn
