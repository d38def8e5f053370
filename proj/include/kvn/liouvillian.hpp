#pragma once

#include <optional>

#include "kvn/operators.hpp"

namespace kvn {

/// Force on each (position, velocity) axis pair; components are functions of
/// the full phase coordinates (positions first, then velocities).
struct ForceField {
    std::vector<std::function<double(const double*)>> comp;
    bool depends_on_velocity = false;
    std::string label = "force";
};

/// Static scalar and vector potentials over configuration space.
/// Builtin-backed pairs carry analytic gradients; sampled pairs fall back to
/// spectral differentiation in force_from_potentials.
struct PotentialPair {
    std::function<double(const double*)> phi;                           // phi(r)
    std::vector<std::function<double(const double*)>> A;                // A_alpha(r)
    std::vector<std::function<double(const double*)>> grad_phi;         // d phi / d x_alpha
    std::vector<std::vector<std::function<double(const double*)>>> dA;  // dA[beta][alpha] = dA_b/dx_a
    bool has_analytic_derivatives = false;
    std::string label = "potentials";

    bool has_A() const { return !A.empty(); }
};

PotentialPair zero_potentials(int config_dim);
/// phi = k/2 |r|^2 (quadratic well).
PotentialPair quadratic_potential(int config_dim, double k);
/// Symmetric gauge for a uniform out-of-plane B: A = (-B y / 2, B x / 2).
PotentialPair uniform_b_potentials(double b);
/// Constant vector potential.
PotentialPair constant_a_potentials(std::vector<double> a);

/// Named force builtins (scenario-facing; no expression parsing).
ForceField free_force(int n_pairs);
ForceField quadratic_force(int config_dim, double k);
ForceField uniform_gravity_force(int config_dim, double g, int axis);
ForceField uniform_b_force(double b);
ForceField linear_drag_force(int config_dim, double gamma);
ForceField harmonic_coupling_force(double k);  // two-particle pair
ForceField sum_forces(const std::vector<ForceField>& parts);

struct LiouvillianSpec {
    enum class Kind { free, forced, two_particle };
    Kind kind = Kind::free;
    GridPtr grid;
    ForceField force;                  // forced / two_particle (one comp per pair)
    std::vector<double> mass_per_pair; // single mass broadcast for single-particle
};

LiouvillianSpec free_liouvillian(GridPtr grid);
LiouvillianSpec forced_liouvillian(GridPtr grid, ForceField f, double mass = 1.0);
LiouvillianSpec two_particle_liouvillian(GridPtr grid, ForceField pair_forces, double m1, double m2);

/// L = sum_k V_k lambda_{x_k} + sum_k (1/2 m_k)(F_k lambda_{v_k} + lambda_{v_k} F_k),
/// symmetrized as written; weak-form hermitian.
LinearOperator build_liouvillian(const LiouvillianSpec& spec);

/// F = E + v x B from static potentials; analytic derivatives when available,
/// spectral differentiation of the sampled potentials otherwise (with a
/// Nyquist-energy smoothness check). `grid` supplies the sampling lattice for
/// the spectral path.
ForceField force_from_potentials(const PotentialPair& p, const Grid& grid);

/// Per-component residual || Phi_alpha[Lag] psi - F^{NC}_alpha psi || / ||psi||
/// where Phi = -[L,[lambda_v,.]] - i[lambda_x,.], Lag = m/2 V^2 - U, and
/// F^{NC} = total_force - force_from_potentials(p). Evaluated by literal
/// nested operator application.
std::vector<double> lagrangian_superop_residual(const PotentialPair& p, const ForceField& total_force,
                                                double mass, const WaveField& psi);

struct ForceConstraintReport {
    bool pass = false;
    double max_deviation = 0.0;
    std::string detail;
};

/// Samples both force components under simultaneous translations and boosts;
/// passes iff invariant to 1e-8 (Galilean constraint on two-particle forces).
ForceConstraintReport two_particle_force_constraint(const ForceField& pair_forces, const Grid& grid);

}  // namespace kvn
