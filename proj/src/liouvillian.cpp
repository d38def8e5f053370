#include "kvn/liouvillian.hpp"

#include <cmath>

#include "kvn/fft.hpp"

namespace kvn {

namespace {

int n_pairs_of(const Grid& g) { return g.config_dim(); }

// Spot-check that depends_on_velocity matches the functional form.
void validate_velocity_flag(const ForceField& f, const Grid& g) {
    const int d = g.config_dim();
    std::vector<double> c1(2 * d), c2(2 * d);
    for (int k = 0; k < d; ++k) {
        const Axis& px = g.axis(g.position_axis(k));
        const Axis& vx = g.axis(g.velocity_axis(k));
        c1[k] = c2[k] = px.min + 0.37 * px.width();
        c1[d + k] = vx.min + 0.21 * vx.width();
        c2[d + k] = vx.min + 0.68 * vx.width();
    }
    for (const auto& comp : f.comp) {
        const double d12 = std::abs(comp(c1.data()) - comp(c2.data()));
        if (d12 > 1e-12 && !f.depends_on_velocity)
            throw ConfigError("force '" + f.label +
                              "' varies with velocity but depends_on_velocity is false");
    }
}

void check_finite_on_grid(const ForceField& f, const Grid& g) {
    // Corners and center are enough to catch blowups of the named builtins.
    const std::size_t na = g.n_axes();
    std::vector<double> c(na);
    for (int corner = 0; corner < (1 << na); ++corner) {
        for (std::size_t ax = 0; ax < na; ++ax)
            c[ax] = (corner >> ax) & 1 ? g.axis(ax).max - g.axis(ax).spacing() : g.axis(ax).min;
        for (const auto& comp : f.comp)
            if (!std::isfinite(comp(c.data())))
                throw NumericsError("force '" + f.label + "' is not finite on the grid");
    }
}

}  // namespace

PotentialPair zero_potentials(int config_dim) {
    PotentialPair p;
    p.label = "zero";
    p.phi = [](const double*) { return 0.0; };
    p.grad_phi.resize(config_dim);
    for (int k = 0; k < config_dim; ++k) p.grad_phi[k] = [](const double*) { return 0.0; };
    p.has_analytic_derivatives = true;
    return p;
}

PotentialPair quadratic_potential(int config_dim, double k) {
    PotentialPair p;
    p.label = "quadratic";
    p.phi = [k, config_dim](const double* r) {
        double s = 0.0;
        for (int i = 0; i < config_dim; ++i) s += r[i] * r[i];
        return 0.5 * k * s;
    };
    p.grad_phi.resize(config_dim);
    for (int i = 0; i < config_dim; ++i)
        p.grad_phi[i] = [k, i](const double* r) { return k * r[i]; };
    p.has_analytic_derivatives = true;
    return p;
}

PotentialPair uniform_b_potentials(double b) {
    PotentialPair p;
    p.label = "uniform_B_symmetric_gauge";
    p.phi = [](const double*) { return 0.0; };
    p.grad_phi = {[](const double*) { return 0.0; }, [](const double*) { return 0.0; }};
    p.A = {[b](const double* r) { return -0.5 * b * r[1]; },
           [b](const double* r) { return 0.5 * b * r[0]; }};
    p.dA.resize(2, std::vector<std::function<double(const double*)>>(2));
    p.dA[0][0] = [](const double*) { return 0.0; };
    p.dA[0][1] = [b](const double*) { return -0.5 * b; };  // dA_x/dy
    p.dA[1][0] = [b](const double*) { return 0.5 * b; };   // dA_y/dx
    p.dA[1][1] = [](const double*) { return 0.0; };
    p.has_analytic_derivatives = true;
    return p;
}

PotentialPair constant_a_potentials(std::vector<double> a) {
    const int d = static_cast<int>(a.size());
    PotentialPair p = zero_potentials(d);
    p.label = "constant_A";
    p.A.resize(d);
    for (int i = 0; i < d; ++i) p.A[i] = [v = a[i]](const double*) { return v; };
    p.dA.resize(d, std::vector<std::function<double(const double*)>>(d));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) p.dA[i][j] = [](const double*) { return 0.0; };
    return p;
}

ForceField free_force(int n_pairs) {
    ForceField f;
    f.label = "free";
    f.comp.resize(n_pairs);
    for (int k = 0; k < n_pairs; ++k) f.comp[k] = [](const double*) { return 0.0; };
    return f;
}

ForceField quadratic_force(int config_dim, double k) {
    ForceField f;
    f.label = "quadratic";
    f.comp.resize(config_dim);
    for (int i = 0; i < config_dim; ++i)
        f.comp[i] = [k, i](const double* c) { return -k * c[i]; };
    return f;
}

ForceField uniform_gravity_force(int config_dim, double g, int axis) {
    if (axis < 0 || axis >= config_dim)
        throw ConfigError("uniform_gravity: axis out of range");
    ForceField f;
    f.label = "uniform_gravity";
    f.comp.resize(config_dim);
    for (int i = 0; i < config_dim; ++i) {
        if (i == axis)
            f.comp[i] = [g](const double*) { return -g; };  // F = -m g, scaled by mass at build
        else
            f.comp[i] = [](const double*) { return 0.0; };
    }
    return f;
}

ForceField uniform_b_force(double b) {
    ForceField f;
    f.label = "uniform_B";
    f.depends_on_velocity = true;
    f.comp = {[b](const double* c) { return c[3] * b; },    // +vy B
              [b](const double* c) { return -c[2] * b; }};  // -vx B
    return f;
}

ForceField linear_drag_force(int config_dim, double gamma) {
    ForceField f;
    f.label = "linear_drag";
    f.depends_on_velocity = true;
    f.comp.resize(config_dim);
    for (int i = 0; i < config_dim; ++i)
        f.comp[i] = [gamma, i, config_dim](const double* c) { return -gamma * c[config_dim + i]; };
    return f;
}

ForceField harmonic_coupling_force(double k) {
    ForceField f;
    f.label = "harmonic_coupling";
    f.comp = {[k](const double* c) { return -k * (c[0] - c[1]); },
              [k](const double* c) { return k * (c[0] - c[1]); }};
    return f;
}

ForceField sum_forces(const std::vector<ForceField>& parts) {
    if (parts.empty()) throw ConfigError("sum_forces: empty list");
    ForceField f;
    f.label = "sum";
    const std::size_t n = parts.front().comp.size();
    for (const auto& p : parts) {
        if (p.comp.size() != n) throw ConfigError("sum_forces: component count mismatch");
        f.depends_on_velocity = f.depends_on_velocity || p.depends_on_velocity;
        f.label += "+" + p.label;
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::function<double(const double*)>> comps;
        for (const auto& p : parts) comps.push_back(p.comp[i]);
        f.comp.push_back([comps](const double* c) {
            double s = 0.0;
            for (const auto& fn : comps) s += fn(c);
            return s;
        });
    }
    return f;
}

LiouvillianSpec free_liouvillian(GridPtr grid) {
    LiouvillianSpec s;
    s.kind = LiouvillianSpec::Kind::free;
    s.grid = std::move(grid);
    s.mass_per_pair.assign(n_pairs_of(*s.grid), 1.0);
    return s;
}

LiouvillianSpec forced_liouvillian(GridPtr grid, ForceField f, double mass) {
    LiouvillianSpec s;
    s.kind = LiouvillianSpec::Kind::forced;
    s.grid = std::move(grid);
    s.force = std::move(f);
    s.mass_per_pair.assign(n_pairs_of(*s.grid), mass);
    return s;
}

LiouvillianSpec two_particle_liouvillian(GridPtr grid, ForceField pair_forces, double m1, double m2) {
    if (grid->layout() != GridLayout::two_particle)
        throw ConfigError("two_particle Liouvillian requires the 4-axis (x1, x2, v1, v2) grid layout");
    LiouvillianSpec s;
    s.kind = LiouvillianSpec::Kind::two_particle;
    s.grid = std::move(grid);
    s.force = std::move(pair_forces);
    s.mass_per_pair = {m1, m2};
    return s;
}

LinearOperator build_liouvillian(const LiouvillianSpec& spec) {
    const Grid& g = *spec.grid;
    const int pairs = n_pairs_of(g);
    LinearOperator L = zero_op(spec.grid);
    L.label = "L";
    L.hermitian_hint = true;
    for (int k = 0; k < pairs; ++k)
        L = L + coord_op(spec.grid, g.velocity_axis(k)) * lambda_op(spec.grid, g.position_axis(k));

    if (spec.kind != LiouvillianSpec::Kind::free) {
        if (spec.force.comp.size() != static_cast<std::size_t>(pairs))
            throw ConfigError("force component count (" + std::to_string(spec.force.comp.size()) +
                              ") does not match the grid's pair count (" + std::to_string(pairs) + ")");
        validate_velocity_flag(spec.force, g);
        check_finite_on_grid(spec.force, g);
        for (int k = 0; k < pairs; ++k) {
            auto Fk = sampled_field_op(
                spec.grid,
                [fn = spec.force.comp[k]](const double* c) { return cplx(fn(c), 0.0); },
                "F_" + std::to_string(k + 1));
            auto Lv = lambda_op(spec.grid, g.velocity_axis(k));
            const cplx half_over_m{0.5 / spec.mass_per_pair[k], 0.0};
            L = L + half_over_m * ((Fk * Lv) + (Lv * Fk));
        }
    }
    L.label = "L[" + spec.force.label + "]";
    L.hermitian_hint = true;
    return L;
}

namespace {

// Spectral gradient of a sampled config-space field (1D or 2D), with a
// Nyquist-energy blowup check for nonsmooth input.
std::vector<std::vector<double>> spectral_gradient(const std::vector<double>& samples, const Grid& g) {
    const int d = g.config_dim();
    const std::size_t n0 = g.axis(0).n;
    const std::size_t n1 = d == 2 ? g.axis(1).n : 1;
    std::vector<cplx> work(samples.size());
    std::vector<std::vector<double>> grad(d, std::vector<double>(samples.size()));

    for (int ax = 0; ax < d; ++ax) {
        for (std::size_t i = 0; i < samples.size(); ++i) work[i] = samples[i];
        const std::size_t n = ax == 0 ? n0 : n1;
        const std::size_t lines = samples.size() / n;
        const auto& plan = spectral::plan_for(n);
        const auto& k = g.wavenumbers(ax);
        double total_energy = 0.0, nyq_energy = 0.0;
        std::vector<cplx> line(n);
        for (std::size_t ln = 0; ln < lines; ++ln) {
            for (std::size_t j = 0; j < n; ++j)
                line[j] = ax == 0 ? work[j * n1 + ln] : work[ln * n1 + j];
            spectral::fft_line_forward(line.data(), n);
            for (std::size_t j = 0; j < n; ++j) {
                const std::size_t knat = plan.bitrev[j];
                const double e = std::norm(line[j]);
                total_energy += e;
                // top eighth of the spectrum counts as the Nyquist band
                const double kk = std::abs(k[knat]);
                if (kk > 0.875 * std::abs(k[n / 2])) nyq_energy += e;
                line[j] *= cplx(0.0, knat == n / 2 ? 0.0 : k[knat]);
            }
            spectral::fft_line_inverse(line.data(), n);
            for (std::size_t j = 0; j < n; ++j) {
                const double v = line[j].real();
                (ax == 0 ? grad[0][j * n1 + ln] : grad[1][ln * n1 + j]) = v;
            }
        }
        if (total_energy > 0.0 && nyq_energy > 1e-10 * total_energy)
            throw NumericsError("potential '" + std::string("sampled") +
                                "' appears nonsmooth: spectral derivative has significant Nyquist-band energy");
    }
    return grad;
}

}  // namespace

ForceField force_from_potentials(const PotentialPair& p, const Grid& grid) {
    const int d = grid.config_dim();
    if (grid.layout() != GridLayout::single_particle)
        throw ConfigError("force_from_potentials: single-particle grids only");

    ForceField f;
    f.label = "potential[" + p.label + "]";
    f.depends_on_velocity = p.has_A();

    if (p.has_analytic_derivatives) {
        if (d == 1) {
            f.comp = {[gp = p.grad_phi[0]](const double* c) { return -gp(c); }};
        } else {
            const bool has_a = p.has_A();
            auto bz = [p, has_a](const double* r) {
                return has_a ? p.dA[1][0](r) - p.dA[0][1](r) : 0.0;
            };
            f.comp = {[p, bz](const double* c) { return -p.grad_phi[0](c) + c[3] * bz(c); },
                      [p, bz](const double* c) { return -p.grad_phi[1](c) - c[2] * bz(c); }};
        }
        return f;
    }

    // Sampled path: spectrally differentiate phi and A on the position lattice.
    const std::size_t n0 = grid.axis(0).n;
    const std::size_t n1 = d == 2 ? grid.axis(1).n : 1;
    const std::size_t m = n0 * n1;
    auto sample = [&](const std::function<double(const double*)>& fn) {
        std::vector<double> out(m);
        double r[2];
        for (std::size_t i = 0; i < n0; ++i)
            for (std::size_t j = 0; j < n1; ++j) {
                r[0] = grid.coords(0)[i];
                if (d == 2) r[1] = grid.coords(1)[j];
                out[i * n1 + j] = fn(r);
            }
        return out;
    };
    auto lookup = [&grid, n1, d](std::vector<double> table) {
        return [table = std::move(table), &grid, n1, d](const double* c) {
            std::size_t i = static_cast<std::size_t>(
                std::llround((c[0] - grid.axis(0).min) / grid.axis(0).spacing()));
            i %= grid.axis(0).n;
            std::size_t j = 0;
            if (d == 2) {
                j = static_cast<std::size_t>(
                    std::llround((c[1] - grid.axis(1).min) / grid.axis(1).spacing()));
                j %= grid.axis(1).n;
            }
            return table[i * n1 + j];
        };
    };

    auto gphi = spectral_gradient(sample(p.phi), grid);
    if (d == 1) {
        auto ex = lookup(std::move(gphi[0]));
        f.comp = {[ex](const double* c) { return -ex(c); }};
        return f;
    }
    std::vector<double> bz_table(m, 0.0);
    if (p.has_A()) {
        auto gax = spectral_gradient(sample(p.A[0]), grid);
        auto gay = spectral_gradient(sample(p.A[1]), grid);
        for (std::size_t i = 0; i < m; ++i) bz_table[i] = gay[0][i] - gax[1][i];
    }
    auto ex = lookup(std::move(gphi[0]));
    auto ey = lookup(std::move(gphi[1]));
    auto bz = lookup(std::move(bz_table));
    f.comp = {[ex, bz](const double* c) { return -ex(c) + c[3] * bz(c); },
              [ey, bz](const double* c) { return -ey(c) - c[2] * bz(c); }};
    return f;
}

std::vector<double> lagrangian_superop_residual(const PotentialPair& p, const ForceField& total_force,
                                                double mass, const WaveField& psi) {
    GridPtr grid = psi.grid;
    const Grid& g = *grid;
    const int d = g.config_dim();
    if (g.layout() != GridLayout::single_particle)
        throw ConfigError("lagrangian_superop_residual: single-particle grids only");

    // Lagrangian operator m/2 V^2 - U with U = phi - V.A (multiplicative).
    auto lag_fn = [p, mass, d](const double* c) {
        double v2 = 0.0, va = 0.0;
        for (int k = 0; k < d; ++k) v2 += c[d + k] * c[d + k];
        if (p.has_A())
            for (int k = 0; k < d; ++k) va += c[d + k] * p.A[k](c);
        return cplx(0.5 * mass * v2 - p.phi(c) + va, 0.0);
    };
    auto Lag = sampled_field_op(grid, lag_fn, "Lagrangian");
    auto L = build_liouvillian(forced_liouvillian(grid, total_force, mass));
    auto Fpot = force_from_potentials(p, g);

    const cplx minus_one{-1.0, 0.0};
    const cplx minus_i{0.0, -1.0};
    std::vector<double> residuals(d);
    const double psi_norm = norm(psi);
    for (int alpha = 0; alpha < d; ++alpha) {
        auto inner = commutator(lambda_op(grid, g.velocity_axis(alpha)), Lag);
        auto phi_op = (minus_one * commutator(L, inner)) +
                      (minus_i * commutator(lambda_op(grid, g.position_axis(alpha)), Lag));
        WaveField r = phi_op.apply(psi);
        // subtract F^{NC} psi = (total - potential-derived) psi
        auto fnc = sampled_field_op(
            grid,
            [ft = total_force.comp[alpha], fp = Fpot.comp[alpha]](const double* c) {
                return cplx(ft(c) - fp(c), 0.0);
            },
            "F_nc");
        fnc.apply_accumulate(psi, r, minus_one);
        residuals[alpha] = norm(r) / psi_norm;
    }
    return residuals;
}

ForceConstraintReport two_particle_force_constraint(const ForceField& pair_forces, const Grid& grid) {
    if (grid.layout() != GridLayout::two_particle)
        throw ConfigError("two_particle_force_constraint: two-particle grid required");
    ForceConstraintReport rep;
    const double wx = grid.axis(0).width();
    const double wv = grid.axis(2).width();

    // Interior sample lattice plus translation/boost offsets.
    const double fracs[3] = {0.3, 0.5, 0.66};
    const double shifts_a[2] = {-0.23 * wx, 0.31 * wx};
    const double shifts_b[2] = {0.27 * wv, -0.19 * wv};
    double worst = 0.0;
    std::string worst_kind;
    for (double f1 : fracs)
        for (double f2 : fracs)
            for (double f3 : fracs)
                for (double f4 : fracs) {
                    double c[4] = {grid.axis(0).min + f1 * wx, grid.axis(1).min + f2 * wx,
                                   grid.axis(2).min + f3 * wv, grid.axis(3).min + f4 * wv};
                    for (std::size_t ci = 0; ci < pair_forces.comp.size(); ++ci) {
                        const double base = pair_forces.comp[ci](c);
                        for (double a : shifts_a) {
                            double s[4] = {c[0] + a, c[1] + a, c[2], c[3]};
                            const double dev = std::abs(pair_forces.comp[ci](s) - base);
                            if (dev > worst) {
                                worst = dev;
                                worst_kind = "translation";
                            }
                        }
                        for (double b : shifts_b) {
                            double s[4] = {c[0], c[1], c[2] + b, c[3] + b};
                            const double dev = std::abs(pair_forces.comp[ci](s) - base);
                            if (dev > worst) {
                                worst = dev;
                                worst_kind = "boost";
                            }
                        }
                    }
                }
    rep.max_deviation = worst;
    rep.pass = worst < 1e-8;
    rep.detail = rep.pass ? "invariant under simultaneous translations and boosts"
                          : "varies under simultaneous " + worst_kind + " by " + std::to_string(worst);
    return rep;
}

}  // namespace kvn
