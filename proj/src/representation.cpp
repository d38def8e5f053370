#include "kvn/representation.hpp"

#include <cmath>

#include "kvn/fft.hpp"

namespace kvn {

namespace {

// Validates every occupied position slice's shift before the shear runs (the
// shear callbacks execute on worker threads and must not throw). Slices whose
// amplitude is negligible may shift arbitrarily; the shifted support of a
// populated slice must stay clear of the velocity wrap.
void check_shift_margins(const WaveField& f, const PotentialPair& pots, double mass, double sign) {
    const Grid& g = *f.grid;
    const int d = g.config_dim();
    const std::size_t n0 = g.axis(0).n;
    const std::size_t n1 = d == 2 ? g.axis(1).n : 1;

    // max |psi| per position slice
    std::vector<double> slice_amp(n0 * n1, 0.0);
    const std::size_t s0 = g.stride(0);
    const std::size_t s1 = d == 2 ? g.stride(1) : 0;
    double global = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const std::size_t i0 = i / s0 % n0;
        const std::size_t i1 = d == 2 ? (i / s1 % n1) : 0;
        const double a = std::abs(f.a[i]);
        slice_amp[i0 * n1 + i1] = std::max(slice_amp[i0 * n1 + i1], a);
        global = std::max(global, a);
    }

    double r[2];
    for (std::size_t i = 0; i < n0; ++i) {
        for (std::size_t j = 0; j < n1; ++j) {
            if (slice_amp[i * n1 + j] <= 1e-6 * global) continue;
            r[0] = g.coords(0)[i];
            if (d == 2) r[1] = g.coords(1)[j];
            for (int k = 0; k < d; ++k) {
                const double shift = sign * pots.A[k](r) / mass;
                const std::size_t vax = g.velocity_axis(k);
                if (std::abs(shift) > 0.25 * g.axis(vax).width()) {
                    std::string where = g.axis(0).name + "=" + std::to_string(r[0]);
                    if (d == 2) where += ", " + g.axis(1).name + "=" + std::to_string(r[1]);
                    throw ConfigError("gauge transform: velocity shift " + std::to_string(shift) +
                                      " exceeds the grid margin at position slice (" + where + ")");
                }
            }
        }
    }
}

void shear_velocity_axes(WaveField& f, const PotentialPair& pots, double mass, double sign) {
    const Grid& g = *f.grid;
    const int d = g.config_dim();
    for (int k = 0; k < d; ++k) {
        const std::size_t vax = g.velocity_axis(k);
        spectral::shear_axis(f.data(), g, vax, [&g, &pots, mass, sign, k, d](std::size_t flat) {
            double r[2];
            for (int a = 0; a < d; ++a) r[a] = g.coord_of(g.position_axis(a), flat);
            return sign * pots.A[k](r) / mass;
        });
    }
}

}  // namespace

WaveField gauge_to_momentum(const GaugeContext& ctx, const WaveField& psi) {
    const Grid& g = *psi.grid;
    if (g.representation() != Representation::velocity)
        throw ConfigError("gauge_to_momentum: input is already in the momentum representation");
    WaveField out = psi;
    if (ctx.potentials.has_A()) {
        check_shift_margins(psi, ctx.potentials, ctx.mass, 1.0);
        shear_velocity_axes(out, ctx.potentials, ctx.mass, 1.0);
    }
    out.grid = g.momentum_relabel(ctx.mass);
    return out;
}

WaveField gauge_to_velocity(const GaugeContext& ctx, const WaveField& phi) {
    const Grid& gm = *phi.grid;
    if (gm.representation() != Representation::momentum)
        throw ConfigError("gauge_to_velocity: input is not in the momentum representation");
    WaveField out = phi;
    out.grid = gm.velocity_relabel(ctx.mass);
    if (ctx.potentials.has_A()) {
        check_shift_margins(out, ctx.potentials, ctx.mass, -1.0);
        shear_velocity_axes(out, ctx.potentials, ctx.mass, -1.0);
    }
    return out;
}

LinearOperator momentum_liouvillian(const PotentialPair& pots, const ForceField& total_force,
                                    double mass, GridPtr momentum_grid) {
    const Grid& g = *momentum_grid;
    if (g.representation() != Representation::momentum)
        throw ConfigError("momentum_liouvillian: momentum-representation grid required");
    if (pots.has_A() && !pots.has_analytic_derivatives)
        throw ConfigError("momentum_liouvillian: vector potential requires analytic derivatives");
    const int d = g.config_dim();

    // Captured by value so the operator owns its coefficient fields.
    auto veff_fn = [pots, mass, d](int k) {
        return [pots, mass, d, k](const double* c) {
            const double a = pots.has_A() ? pots.A[k](c) : 0.0;
            return (c[d + k] - a) / mass;
        };
    };

    LinearOperator L = zero_op(momentum_grid);
    const cplx half{0.5, 0.0};
    for (int k = 0; k < d; ++k) {
        auto v_op = sampled_field_op(
            momentum_grid, [fn = veff_fn(k)](const double* c) { return cplx(fn(c), 0.0); },
            "veff_" + std::to_string(k + 1));
        L = L + v_op * lambda_op(momentum_grid, g.position_axis(k));

        auto f_op = sampled_field_op(
            momentum_grid,
            [pots, mass, d, fn = total_force.comp[k]](const double* c) {
                double z[4];
                for (int j = 0; j < d; ++j) {
                    const double a = pots.has_A() ? pots.A[j](c) : 0.0;
                    z[j] = c[j];
                    z[d + j] = (c[d + j] - a) / mass;
                }
                return cplx(fn(z), 0.0);
            },
            "F_" + std::to_string(k + 1));
        auto lp = lambda_op(momentum_grid, g.velocity_axis(k));
        L = L + half * ((f_op * lp) + (lp * f_op));
    }
    if (pots.has_A()) {
        // (1/2m) dA_b/dx_a { (P_a - A_a) lambda_p_b + lambda_p_b (P_a - A_a) };
        // dA_b/dx_a commutes with lambda_p, so it folds into the coefficient.
        for (int b = 0; b < d; ++b) {
            auto lpb = lambda_op(momentum_grid, g.velocity_axis(b));
            for (int a = 0; a < d; ++a) {
                auto w_op = sampled_field_op(
                    momentum_grid,
                    [pots, mass, d, a, b](const double* c) {
                        const double pa = c[d + a] - pots.A[a](c);
                        return cplx(pots.dA[b][a](c) * pa / mass, 0.0);
                    },
                    "dA_" + std::to_string(b + 1) + std::to_string(a + 1));
                L = L + half * ((w_op * lpb) + (lpb * w_op));
            }
        }
    }
    L.label = "L'";
    L.hermitian_hint = true;
    return L;
}

PhaseFlow momentum_flow(const PotentialPair& pots, const ForceField& total_force, double mass,
                        const Grid& momentum_grid) {
    const int d = momentum_grid.config_dim();
    PhaseFlow flow;
    flow.rate.resize(2 * d);
    for (int k = 0; k < d; ++k) {
        flow.rate[k] = [pots, mass, d, k](const double* c) {
            const double a = pots.has_A() ? pots.A[k](c) : 0.0;
            return (c[d + k] - a) / mass;
        };
    }
    for (int k = 0; k < d; ++k) {
        flow.rate[d + k] = [pots, mass, d, k, fn = total_force.comp[k]](const double* c) {
            double z[4];
            for (int j = 0; j < d; ++j) {
                const double a = pots.has_A() ? pots.A[j](c) : 0.0;
                z[j] = c[j];
                z[d + j] = (c[d + j] - a) / mass;
            }
            double rate = fn(z);
            if (pots.has_A())
                for (int a = 0; a < d; ++a) rate += z[d + a] * pots.dA[k][a](c);
            return rate;
        };
    }
    flow.rate_all = [pots, mass, d, force = total_force](const double* c, double* out) {
        double z[4];
        for (int j = 0; j < d; ++j) {
            const double a = pots.has_A() ? pots.A[j](c) : 0.0;
            z[j] = c[j];
            z[d + j] = (c[d + j] - a) / mass;
            out[j] = z[d + j];
        }
        for (int k = 0; k < d; ++k) {
            double rate = force.comp[k](z);
            if (pots.has_A())
                for (int a = 0; a < d; ++a) rate += z[d + a] * pots.dA[k][a](c);
            out[d + k] = rate;
        }
    };
    return flow;
}

double representation_consistency(const GaugeContext& ctx, const ForceField& total_force,
                                  const WaveField& psi0, const PropagatorConfig& cfg) {
    // Route 1: evolve in the velocity representation, then gauge-transform.
    auto spec = forced_liouvillian(psi0.grid, total_force, ctx.mass);
    WaveField psi_t = evolve_semilagrangian(psi0, spec, cfg);
    WaveField via_velocity = gauge_to_momentum(ctx, psi_t);

    // Route 2: gauge-transform first, evolve along the momentum characteristics.
    WaveField phi0 = gauge_to_momentum(ctx, psi0);
    PhaseFlow flow = momentum_flow(ctx.potentials, total_force, ctx.mass, *phi0.grid);
    WaveField via_momentum = evolve_semilagrangian_flow(phi0, flow, cfg);

    return linf_diff(via_velocity, via_momentum);
}

double poisson_liouvillian_check(const PotentialPair& pots, const ForceField& total_force, double mass,
                                 const WaveField& phi) {
    const Grid& g = *phi.grid;
    if (g.representation() != Representation::momentum)
        throw ConfigError("poisson_liouvillian_check: momentum-representation field required");
    const int d = g.config_dim();

    auto Lp = momentum_liouvillian(pots, total_force, mass, phi.grid);
    WaveField lhs = Lp.apply(phi);

    // -i {phi, H} = sum_a [ dH/dp_a (lambda_x_a phi) - dH/dx_a (lambda_p_a phi) ]
    // since lambda phi = -i d(phi).
    WaveField rhs(phi.grid, phi.time);
    const std::size_t na = g.n_axes();
    for (int a = 0; a < d; ++a) {
        WaveField dx = phi;
        spectral::lambda_axis(dx.data(), g, g.position_axis(a));
        WaveField dp = phi;
        spectral::lambda_axis(dp.data(), g, g.velocity_axis(a));
        parallel_for(phi.size(), [&](std::size_t lo, std::size_t hi) {
            std::vector<double> c(na);
            for (std::size_t i = lo; i < hi; ++i) {
                for (std::size_t ax = 0; ax < na; ++ax) c[ax] = g.coord_of(ax, i);
                const double Aa = pots.has_A() ? pots.A[a](c.data()) : 0.0;
                const double dHdp = (c[d + a] - Aa) / mass;
                double dHdx = pots.grad_phi[a](c.data());
                if (pots.has_A())
                    for (int b = 0; b < d; ++b)
                        dHdx -= (c[d + b] - pots.A[b](c.data())) / mass * pots.dA[b][a](c.data());
                rhs.a[i] += dHdp * dx.a[i] - dHdx * dp.a[i];
            }
        });
    }

    WaveField diff = lhs;
    axpy(diff, cplx{-1.0, 0.0}, rhs);
    return norm(diff) / norm(phi);
}

}  // namespace kvn
