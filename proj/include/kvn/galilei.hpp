#pragma once

#include "kvn/operators.hpp"

namespace kvn {

/// Unitary Galilei actions on states. The boost carries its reference time
/// explicitly since the generator G = -lambda_r t - lambda_v is
/// time-dependent; the central charge is identically zero, so boosts carry
/// no phase factor.
struct GroupElement {
    enum class Kind { space_translation, velocity_translation, boost, rotation };
    Kind kind = Kind::space_translation;
    std::vector<double> amount;  // per config axis (translation a, velocity b, boost b)
    double t_ref = 0.0;          // boost only
    double theta = 0.0;          // rotation only (2D-config grids)
};

GroupElement space_translation(std::vector<double> a);
GroupElement velocity_translation(std::vector<double> b);
GroupElement boost(std::vector<double> b, double t_ref);
GroupElement rotation(double theta);

/// Applies the group action by exact spectral shifts/shears.
WaveField apply_group_element(const GroupElement& g, const WaveField& psi);

/// Rotation generator J = X lambda_y - Y lambda_x + Vx lambda_vy - Vy lambda_vx
/// (the single generator of a 2D configuration space).
LinearOperator rotation_generator(GridPtr grid);
/// Boost generator G_alpha = -lambda_x_alpha t - lambda_v_alpha.
LinearOperator boost_generator(GridPtr grid, int config_axis, double t_ref);

}  // namespace kvn
