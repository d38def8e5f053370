#include "kvn/galilei.hpp"

#include <cmath>

#include "kvn/fft.hpp"

namespace kvn {

GroupElement space_translation(std::vector<double> a) {
    GroupElement g;
    g.kind = GroupElement::Kind::space_translation;
    g.amount = std::move(a);
    return g;
}

GroupElement velocity_translation(std::vector<double> b) {
    GroupElement g;
    g.kind = GroupElement::Kind::velocity_translation;
    g.amount = std::move(b);
    return g;
}

GroupElement boost(std::vector<double> b, double t_ref) {
    GroupElement g;
    g.kind = GroupElement::Kind::boost;
    g.amount = std::move(b);
    g.t_ref = t_ref;
    return g;
}

GroupElement rotation(double theta) {
    GroupElement g;
    g.kind = GroupElement::Kind::rotation;
    g.theta = theta;
    return g;
}

namespace {

void check_margin(const Grid& g, std::size_t axis, double amount) {
    if (std::abs(amount) > 0.5 * g.axis(axis).width())
        throw ConfigError("group parameter " + std::to_string(amount) + " exceeds half the extent of axis " +
                          g.axis(axis).name);
}

}  // namespace

WaveField apply_group_element(const GroupElement& el, const WaveField& psi) {
    const Grid& g = *psi.grid;
    const int d = g.config_dim();
    WaveField out = psi;
    switch (el.kind) {
        case GroupElement::Kind::space_translation: {
            if (el.amount.size() != static_cast<std::size_t>(d))
                throw ConfigError("space_translation: one amount per config axis required");
            for (int k = 0; k < d; ++k) {
                check_margin(g, g.position_axis(k), el.amount[k]);
                spectral::shift_axis(out.data(), g, g.position_axis(k), el.amount[k]);
            }
            break;
        }
        case GroupElement::Kind::velocity_translation: {
            if (el.amount.size() != static_cast<std::size_t>(d))
                throw ConfigError("velocity_translation: one amount per config axis required");
            for (int k = 0; k < d; ++k) {
                check_margin(g, g.velocity_axis(k), el.amount[k]);
                spectral::shift_axis(out.data(), g, g.velocity_axis(k), el.amount[k]);
            }
            break;
        }
        case GroupElement::Kind::boost: {
            if (el.amount.size() != static_cast<std::size_t>(d))
                throw ConfigError("boost: one amount per config axis required");
            // M = 0: simultaneous x and v displacement, no phase factor.
            for (int k = 0; k < d; ++k) {
                check_margin(g, g.position_axis(k), el.amount[k] * el.t_ref);
                check_margin(g, g.velocity_axis(k), el.amount[k]);
                spectral::shift_axis(out.data(), g, g.position_axis(k), el.amount[k] * el.t_ref);
                spectral::shift_axis(out.data(), g, g.velocity_axis(k), el.amount[k]);
            }
            break;
        }
        case GroupElement::Kind::rotation: {
            if (d != 2 || g.layout() != GridLayout::single_particle)
                throw ConfigError("rotation requires a 2D-config single-particle grid");
            // psi'(r, v) = psi(R(-theta) r, R(-theta) v)
            spectral::rotate_pair(out.data(), g, g.position_axis(0), g.position_axis(1), -el.theta);
            spectral::rotate_pair(out.data(), g, g.velocity_axis(0), g.velocity_axis(1), -el.theta);
            break;
        }
    }
    return out;
}

LinearOperator rotation_generator(GridPtr grid) {
    if (grid->config_dim() != 2 || grid->layout() != GridLayout::single_particle)
        throw ConfigError("rotation_generator requires a 2D-config single-particle grid");
    auto X = coord_op(grid, grid->position_axis(0));
    auto Y = coord_op(grid, grid->position_axis(1));
    auto Vx = coord_op(grid, grid->velocity_axis(0));
    auto Vy = coord_op(grid, grid->velocity_axis(1));
    auto Lx = lambda_op(grid, grid->position_axis(0));
    auto Ly = lambda_op(grid, grid->position_axis(1));
    auto Lvx = lambda_op(grid, grid->velocity_axis(0));
    auto Lvy = lambda_op(grid, grid->velocity_axis(1));
    LinearOperator J = (X * Ly) - (Y * Lx) + (Vx * Lvy) - (Vy * Lvx);
    J.label = "J";
    J.hermitian_hint = true;
    return J;
}

LinearOperator boost_generator(GridPtr grid, int config_axis, double t_ref) {
    auto Lx = lambda_op(grid, grid->position_axis(config_axis));
    auto Lv = lambda_op(grid, grid->velocity_axis(config_axis));
    LinearOperator G = (cplx{-t_ref, 0.0} * Lx) + (cplx{-1.0, 0.0} * Lv);
    G.label = "G_" + std::to_string(config_axis + 1);
    G.hermitian_hint = true;
    return G;
}

}  // namespace kvn
