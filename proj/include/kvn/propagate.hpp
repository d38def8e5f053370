#pragma once

#include <optional>

#include "kvn/liouvillian.hpp"

namespace kvn {

struct PropagatorConfig {
    enum class Backend { analytic, splitstep, semilagrangian };
    Backend backend = Backend::splitstep;
    double dt = 1e-3;
    std::size_t n_steps = 1000;
    int interpolation_order = 3;  // semi-Lagrangian: odd Lagrange order (3, 5, 7, 9)
    bool periodic_wrap = false;   // semi-Lagrangian: torus semantics instead of margin errors
};

/// Closed-form scenarios for the analytic backend and the label path.
struct AnalyticScenario {
    enum class Kind { free, projectile, harmonic };
    Kind kind = Kind::free;
    double g = 9.8;        // projectile
    int gravity_axis = -1; // config axis index; -1 = last position axis
    double omega = 1.0;    // harmonic
};

/// A point of phase space, ordered like grid axes (positions, then velocities).
using PhasePoint = std::vector<double>;

/// Exact flow-map label evolution (any dimension; no grid).
PhasePoint evolve_label(const AnalyticScenario& sc, const PhasePoint& z0, double t, int config_dim);

/// One-shot exact evolution of a grid state by spectral shears/shifts
/// (three-shear rotations for the harmonic case).
WaveField evolve_analytic(const AnalyticScenario& sc, const WaveField& psi0, double t);

/// Characteristic velocity field dz/dt over phase coordinates.
struct PhaseFlow {
    std::vector<std::function<double(const double*)>> rate;  // one per grid axis
    /// Optional fused evaluator (all components in one call); the per-axis
    /// functions remain authoritative when absent.
    std::function<void(const double*, double*)> rate_all;
};

PhaseFlow flow_from_liouvillian(const LiouvillianSpec& spec);

using StepCallback = std::function<void(const WaveField&, std::size_t)>;

/// Strang splitting of position drift and velocity kicks; each substep is an
/// exact spectral shear, so the step is unitary. Rejects velocity-dependent
/// forces.
class SplitStepPropagator {
public:
    SplitStepPropagator(const LiouvillianSpec& spec, double dt);
    void step(WaveField& f);
    double dt() const { return dt_; }

private:
    GridPtr grid_;
    double dt_;
    std::vector<std::size_t> pos_axes_, vel_axes_;
    std::vector<std::vector<cplx>> drift_half_, kick_full_;
};

/// Backward characteristic tracing (one RK4 step) with tensor-product
/// Lagrange interpolation at the foot.
class SemiLagrangianPropagator {
public:
    SemiLagrangianPropagator(GridPtr grid, PhaseFlow flow, const PropagatorConfig& cfg);
    void step(WaveField& f);

private:
    GridPtr grid_;
    PhaseFlow flow_;
    double dt_;
    int order_;
    bool wrap_;
    WaveField scratch_;
};

WaveField evolve_splitstep(const WaveField& psi0, const LiouvillianSpec& spec,
                           const PropagatorConfig& cfg, const StepCallback& on_step = {});
WaveField evolve_semilagrangian(const WaveField& psi0, const LiouvillianSpec& spec,
                                const PropagatorConfig& cfg, const StepCallback& on_step = {});
WaveField evolve_semilagrangian_flow(const WaveField& psi0, const PhaseFlow& flow,
                                     const PropagatorConfig& cfg, const StepCallback& on_step = {});

struct BoundingBox {
    std::vector<double> lo, hi;
};

struct TrajectorySample {
    double t = 0.0;
    PhasePoint z;
};

/// 4th-order (RK4) trajectory integration of the characteristic flow.
std::vector<TrajectorySample> flow_oracle(const PhaseFlow& flow, const PhasePoint& z0, double t_final,
                                          double dt, const std::optional<BoundingBox>& box = {});

/// Symplectic leapfrog (velocity Verlet) for position-dependent forces;
/// used for long-horizon checks.
std::vector<TrajectorySample> leapfrog_oracle(const ForceField& force, double mass, const PhasePoint& z0,
                                              double t_final, double dt, int config_dim);

/// Single backward RK4 step of the flow (exposed for tests).
void rk4_step(const PhaseFlow& flow, double* z, std::size_t n, double dt);

/// Dense little matrix over the phase axes (row-major, size n x n).
using LinearMap = std::vector<std::vector<double>>;

LinearMap identity_map(std::size_t n);
LinearMap multiply(const LinearMap& a, const LinearMap& b);

/// M(t) = exp(t J) for the linear flow dz/dt = J z, integrated to machine
/// accuracy (RK4 with scaling and squaring).
LinearMap linear_flow_exponential(const LinearMap& jacobian, double t);

/// Decomposes a unit-determinant map into elementary transvections
/// z_i += c z_j (returned in application order).
struct Transvection {
    std::size_t target = 0;
    std::size_t source = 0;
    double coeff = 0.0;
};
std::vector<Transvection> shear_decompose(const LinearMap& m);

/// psi_new(z) = psi_old(A z) by exact spectral shears (A with det 1).
/// Exact for linear dynamics: pass A = M(-t) to evolve forward by t.
/// Shear coefficients feed later shears, so keep A near the identity
/// (use evolve_linear_flow for finite times).
WaveField evolve_linear_pullback(const WaveField& psi, const LinearMap& a);

/// Evolves psi forward by t under the linear flow dz/dt = J z, splitting the
/// interval into near-identity pullbacks so intermediate shears stay small.
WaveField evolve_linear_flow(const WaveField& psi, const LinearMap& jacobian, double t);

/// Classic RK4 time stepping of d psi / dt = -i L psi for an arbitrary
/// operator. Not exactly unitary; accuracy and stability are set by
/// ||L|| dt (stable on the imaginary axis up to ~2.8).
WaveField evolve_operator_rk4(const WaveField& psi0, const LinearOperator& generator, double dt,
                              std::size_t n_steps);

}  // namespace kvn
