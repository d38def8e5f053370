#pragma once

#include "kvn/liouvillian.hpp"
#include "kvn/propagate.hpp"

namespace kvn {

/// Context for the velocity <-> momentum change of representation
/// C = exp((i/m) A . lambda_v), realized as a per-position-slice spectral
/// shift of the velocity axes by A(r)/m plus the p = m v axis relabel.
struct GaugeContext {
    PotentialPair potentials;  // supplies A (static, smooth)
    double mass = 1.0;
};

/// phi(r, p) = psi(r, (p - A(r))/m) on the momentum-relabeled grid.
WaveField gauge_to_momentum(const GaugeContext& ctx, const WaveField& psi);
/// Inverse map back to the velocity representation.
WaveField gauge_to_velocity(const GaugeContext& ctx, const WaveField& phi);

/// Momentum-representation Liouvillian: (1/m)(P-A) lambda'_r plus the
/// symmetrized force and dA/dX cross terms, acting on momentum-grid fields.
LinearOperator momentum_liouvillian(const PotentialPair& p, const ForceField& total_force, double mass,
                                    GridPtr momentum_grid);

/// Characteristic flow of the momentum-representation transport equation:
/// dr/dt = (p - A)/m, dp/dt = F(r, v_eff) + (v_eff . grad) A.
PhaseFlow momentum_flow(const PotentialPair& p, const ForceField& total_force, double mass,
                        const Grid& momentum_grid);

/// Evolve in the velocity representation and gauge-transform, versus
/// gauge-transform first and evolve under the momentum Liouvillian's
/// characteristics; returns the L-infinity discrepancy.
double representation_consistency(const GaugeContext& ctx, const ForceField& total_force,
                                  const WaveField& psi0, const PropagatorConfig& cfg);

/// Relative residual of L' psi against -i {psi, H}, H = (p-A)^2/2m + phi,
/// with the Poisson bracket evaluated by independent spectral derivatives.
double poisson_liouvillian_check(const PotentialPair& p, const ForceField& total_force, double mass,
                                 const WaveField& phi_momentum);

}  // namespace kvn
