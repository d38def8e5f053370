#include <doctest.h>

#include <cmath>
#include <random>

#include "kvn/propagate.hpp"

using namespace kvn;

TEST_CASE("label evolution reproduces the closed-form flows") {
    SUBCASE("free") {
        AnalyticScenario sc;
        sc.kind = AnalyticScenario::Kind::free;
        auto z = evolve_label(sc, {0.0, 2.0}, 1.0, 1);
        CHECK(z[0] == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(z[1] == doctest::Approx(2.0).epsilon(1e-14));
    }
    SUBCASE("projectile in 3D") {
        AnalyticScenario sc;
        sc.kind = AnalyticScenario::Kind::projectile;
        sc.g = 9.8;
        sc.gravity_axis = 1;
        auto z = evolve_label(sc, {0.0, 0.0, 0.0, 10.0, 10.0, 0.0}, 1.0, 3);
        CHECK(z[0] == doctest::Approx(10.0).epsilon(1e-14));
        CHECK(z[1] == doctest::Approx(5.1).epsilon(1e-12));
        CHECK(z[2] == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(z[3] == doctest::Approx(10.0).epsilon(1e-14));
        CHECK(z[4] == doctest::Approx(0.2).epsilon(1e-10));
        CHECK(z[5] == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("harmonic quarter period") {
        AnalyticScenario sc;
        sc.kind = AnalyticScenario::Kind::harmonic;
        sc.omega = 2.0 * kPi;
        auto z = evolve_label(sc, {1.0, 0.0}, 0.25, 1);
        CHECK(std::abs(z[0]) < 1e-12);
        CHECK(z[1] == doctest::Approx(-2.0 * kPi).epsilon(1e-12));
    }
}

TEST_CASE("analytic free evolution transports the packet centroid") {
    auto g = make_grid_1d(64, 64, {-10.0, 10.0}, {-5.0, 5.0});
    auto psi = gaussian_packet(g, {0.0, 2.0}, {0.5, 0.4});
    AnalyticScenario sc;
    sc.kind = AnalyticScenario::Kind::free;
    auto evolved = evolve_analytic(sc, psi, 1.0);
    CHECK(std::abs(coord_moment(evolved, 0) - 2.0) < 1e-8);
    CHECK(std::abs(coord_moment(evolved, 1) - 2.0) < 1e-10);
    CHECK(std::abs(norm(evolved) - 1.0) < 1e-12);
}

TEST_CASE("analytic harmonic evolution is a rotation with recurrence") {
    auto g = make_grid_1d(64, 64, {-6.0, 6.0}, {-6.0, 6.0});
    auto psi = gaussian_packet(g, {1.0, 0.5}, {0.5, 0.5});
    AnalyticScenario sc;
    sc.kind = AnalyticScenario::Kind::harmonic;
    sc.omega = 1.0;

    auto quarter = evolve_analytic(sc, psi, 0.5 * kPi);
    CHECK(std::abs(coord_moment(quarter, 0) - 0.5) < 1e-8);
    CHECK(std::abs(coord_moment(quarter, 1) - (-1.0)) < 1e-8);

    auto full = evolve_analytic(sc, psi, 2.0 * kPi);
    CHECK(linf_diff(full, psi) < 1e-10);
    CHECK(std::abs(norm(full) - 1.0) < 1e-12);
}

TEST_CASE("split-step matches the analytic projectile evolution") {
    // Constant force: the Strang commutator is central, so splitting is exact
    // up to boundary-tail effects, which the wide margins here suppress.
    auto g = make_grid_1d(128, 128, {-8.0, 4.0}, {-16.0, 8.0});
    auto psi = gaussian_packet(g, {0.0, 2.0}, {0.5, 0.55});
    const double grav = 9.8;
    ForceField f = uniform_gravity_force(1, grav, 0);
    auto spec = forced_liouvillian(g, f, 1.0);

    PropagatorConfig cfg;
    cfg.dt = 1e-3;
    cfg.n_steps = 1000;
    auto stepped = evolve_splitstep(psi, spec, cfg);

    AnalyticScenario sc;
    sc.kind = AnalyticScenario::Kind::projectile;
    sc.g = grav;
    sc.gravity_axis = 0;
    auto exact = evolve_analytic(sc, psi, 1.0);
    CHECK(linf_diff(stepped, exact) < 1e-7);
    CHECK(std::abs(coord_moment(stepped, 0) - (2.0 - 4.9)) < 1e-8);
    CHECK(std::abs(norm(stepped) - 1.0) < 1e-12);
}

TEST_CASE("split-step converges at second order on the harmonic oscillator") {
    auto g = make_grid_1d(64, 64, {-6.0, 6.0}, {-6.0, 6.0});
    auto psi = gaussian_packet(g, {1.0, 0.0}, {0.5, 0.5});
    auto spec = forced_liouvillian(g, quadratic_force(1, 1.0), 1.0);
    AnalyticScenario sc;
    sc.kind = AnalyticScenario::Kind::harmonic;
    auto exact = evolve_analytic(sc, psi, 0.5);

    double err_coarse, err_fine;
    {
        PropagatorConfig cfg;
        cfg.dt = 5e-3;
        cfg.n_steps = 100;
        err_coarse = linf_diff(evolve_splitstep(psi, spec, cfg), exact);
    }
    {
        PropagatorConfig cfg;
        cfg.dt = 2.5e-3;
        cfg.n_steps = 200;
        err_fine = linf_diff(evolve_splitstep(psi, spec, cfg), exact);
    }
    CHECK(err_coarse / err_fine > 3.0);  // ~4 expected at second order
    CHECK(err_fine < 1e-4);
}

TEST_CASE("split-step rejects velocity-dependent forces") {
    auto g = make_grid_1d(64, 64, {-5.0, 5.0}, {-5.0, 5.0});
    auto spec = forced_liouvillian(g, linear_drag_force(1, 0.3), 1.0);
    PropagatorConfig cfg;
    try {
        SplitStepPropagator prop(spec, 1e-3);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("semilagrangian") != std::string::npos);
    }
}

TEST_CASE("semi-Lagrangian free transport matches the analytic backend") {
    auto g = make_grid_1d(128, 64, {-10.0, 10.0}, {-4.0, 4.0});
    auto psi = gaussian_packet(g, {-1.0, 1.2}, {0.7, 0.45});
    auto spec = free_liouvillian(g);
    PropagatorConfig cfg;
    cfg.dt = 1e-3;
    cfg.n_steps = 1000;
    cfg.interpolation_order = 9;
    auto sl = evolve_semilagrangian(psi, spec, cfg);

    AnalyticScenario sc;
    sc.kind = AnalyticScenario::Kind::free;
    auto exact = evolve_analytic(sc, psi, 1.0);
    CHECK(linf_diff(sl, exact) < 1e-4);
    CHECK(std::abs(norm(sl) - 1.0) < 1e-6);
}

TEST_CASE("semi-Lagrangian handles the velocity-dependent drag force") {
    // d<V>/dt = -gamma <V> for linear drag: centroid decays exponentially.
    auto g = make_grid_1d(128, 128, {-6.0, 6.0}, {-6.0, 6.0});
    auto psi = gaussian_packet(g, {0.0, 2.0}, {0.6, 0.5});
    const double gamma = 0.8;
    auto spec = forced_liouvillian(g, linear_drag_force(1, gamma), 1.0);
    PropagatorConfig cfg;
    cfg.dt = 2e-3;
    cfg.n_steps = 250;
    cfg.interpolation_order = 5;
    auto out = evolve_semilagrangian(psi, spec, cfg);
    CHECK(std::abs(coord_moment(out, 1) - 2.0 * std::exp(-gamma * 0.5)) < 1e-3);
}

TEST_CASE("semi-Lagrangian reports margin breaches with advice") {
    // Fast packet near the boundary: characteristics leave the box quickly.
    auto g = make_grid_1d(64, 64, {-5.0, 5.0}, {-5.0, 5.0});
    auto psi = gaussian_packet(g, {2.4, 2.4}, {0.5, 0.5});
    auto spec = free_liouvillian(g);
    PropagatorConfig cfg;
    cfg.dt = 0.05;
    cfg.n_steps = 60;
    try {
        evolve_semilagrangian(psi, spec, cfg);
        FAIL("expected NumericsError");
    } catch (const NumericsError& e) {
        CHECK(std::string(e.what()).find("domain") != std::string::npos);
    }
}

TEST_CASE("composition: U(t1) U(t2) = U(t1 + t2)") {
    auto g = make_grid_1d(64, 64, {-6.0, 6.0}, {-6.0, 6.0});
    auto psi = gaussian_packet(g, {0.5, -0.4}, {0.5, 0.5});
    auto spec = forced_liouvillian(g, quadratic_force(1, 1.0), 1.0);

    PropagatorConfig c1;
    c1.dt = 1e-3;
    c1.n_steps = 300;
    auto a = evolve_splitstep(evolve_splitstep(psi, spec, c1), spec, c1);
    PropagatorConfig c2 = c1;
    c2.n_steps = 600;
    auto b = evolve_splitstep(psi, spec, c2);
    CHECK(linf_diff(a, b) < 1e-12);
}

TEST_CASE("real initial data stays real under transport") {
    auto g = make_grid_1d(64, 64, {-6.0, 6.0}, {-6.0, 6.0});
    auto psi = gaussian_packet(g, {0.8, 0.0}, {0.5, 0.5});  // real amplitudes
    auto spec = forced_liouvillian(g, quadratic_force(1, 1.0), 1.0);
    PropagatorConfig cfg;
    cfg.dt = 1e-3;
    cfg.n_steps = 200;
    auto ss = evolve_splitstep(psi, spec, cfg);
    CHECK(max_imag_abs(ss) < 1e-10);
    cfg.interpolation_order = 5;
    auto sl = evolve_semilagrangian(psi, spec, cfg);
    CHECK(max_imag_abs(sl) < 1e-10);
}

TEST_CASE("flow oracle: closed orbits, exact free flow, conserved cyclotron speed") {
    SUBCASE("harmonic period") {
        PhaseFlow flow;
        flow.rate = {[](const double* z) { return z[1]; }, [](const double* z) { return -z[0]; }};
        auto traj = flow_oracle(flow, {1.0, 0.0}, 2.0 * kPi, 1e-3);
        CHECK(std::abs(traj.back().z[0] - 1.0) < 1e-6);
        CHECK(std::abs(traj.back().z[1]) < 1e-6);
    }
    SUBCASE("free flow is exact") {
        PhaseFlow flow;
        flow.rate = {[](const double* z) { return z[1]; }, [](const double*) { return 0.0; }};
        auto traj = flow_oracle(flow, {0.0, 2.0}, 1.0, 0.25);
        CHECK(traj.back().z[0] == doctest::Approx(2.0).epsilon(1e-14));
    }
    SUBCASE("uniform B conserves speed to 1e-8 over a period") {
        auto spec_force = uniform_b_force(1.0);
        PhaseFlow flow;
        flow.rate = {[](const double* z) { return z[2]; }, [](const double* z) { return z[3]; },
                     [f = spec_force.comp[0]](const double* z) { return f(z); },
                     [f = spec_force.comp[1]](const double* z) { return f(z); }};
        auto traj = flow_oracle(flow, {1.0, 0.0, 0.0, 1.0}, 2.0 * kPi, 1e-3);
        for (const auto& s : traj) {
            const double speed = std::hypot(s.z[2], s.z[3]);
            CHECK(std::abs(speed - 1.0) < 1e-8);
        }
        // closed orbit of radius |v|/B
        CHECK(std::abs(traj.back().z[0] - 1.0) < 1e-6);
        CHECK(std::abs(traj.back().z[1]) < 1e-6);
    }
    SUBCASE("bounding box escape raises") {
        PhaseFlow flow;
        flow.rate = {[](const double* z) { return z[1]; }, [](const double*) { return 1.0; }};
        BoundingBox box{{-1.0, -1.0}, {1.0, 1.0}};
        CHECK_THROWS_AS(flow_oracle(flow, {0.0, 0.5}, 10.0, 0.01, box), NumericsError);
    }
}

TEST_CASE("leapfrog oracle closes the harmonic orbit") {
    auto traj = leapfrog_oracle(quadratic_force(1, 1.0), 1.0, {1.0, 0.0}, 2.0 * kPi, 1e-3, 1);
    CHECK(std::abs(traj.back().z[0] - 1.0) < 1e-5);
    CHECK(std::abs(traj.back().z[1]) < 1e-5);
}

TEST_CASE("evolved density matches the characteristic-transported density") {
    // rho_t(z) = rho_0(Phi_{-t}(z)): compare in L1 at desk resolution.
    auto g = make_grid_1d(64, 64, {-6.0, 6.0}, {-6.0, 6.0});
    const std::vector<double> c0{0.8, 0.0}, s0{0.5, 0.5};
    auto psi = gaussian_packet(g, c0, s0);
    auto spec = forced_liouvillian(g, quadratic_force(1, 1.0), 1.0);
    PropagatorConfig cfg;
    cfg.dt = 1e-3;
    cfg.n_steps = 500;
    auto evolved = evolve_splitstep(psi, spec, cfg);

    PhaseFlow back;
    back.rate = {[](const double* z) { return -z[1]; }, [](const double* z) { return z[0]; }};
    double l1 = 0.0;
    const double t = 0.5;
    for (std::size_t i = 0; i < evolved.size(); ++i) {
        double z[2] = {g->coord_of(0, i), g->coord_of(1, i)};
        for (int s = 0; s < 100; ++s) rk4_step(back, z, 2, t / 100.0);
        // analytic initial gaussian density
        const double q0 = (z[0] - c0[0]) / s0[0];
        const double q1 = (z[1] - c0[1]) / s0[1];
        const double rho0 = std::exp(-0.5 * (q0 * q0 + q1 * q1)) / (2.0 * kPi * s0[0] * s0[1]);
        l1 += std::abs(std::norm(evolved.a[i]) - rho0);
    }
    l1 *= g->cell_volume();
    CHECK(l1 < 1e-3);
}

TEST_CASE("shear decomposition reconstructs unit-determinant maps") {
    std::mt19937_64 rng(77);
    auto uni = [&](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = trial % 2 == 0 ? 2 : 4;
        // random product of transvections and pair rotations is in SL(n)
        LinearMap a = identity_map(n);
        for (int k = 0; k < 6; ++k) {
            LinearMap e = identity_map(n);
            std::size_t i = rng() % n, j = rng() % n;
            if (i == j) j = (j + 1) % n;
            e[i][j] = uni(-1.5, 1.5);
            a = multiply(a, e);
        }
        auto factors = shear_decompose(a);
        LinearMap prod = identity_map(n);
        for (const auto& f : factors) {
            LinearMap e = identity_map(n);
            e[f.target][f.source] = f.coeff;
            prod = multiply(prod, e);
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(prod[i][j] - a[i][j]) < 1e-10);
    }
}

TEST_CASE("exact linear pullback matches the analytic harmonic evolution") {
    auto g = make_grid_1d(64, 64, {-6.0, 6.0}, {-6.0, 6.0});
    auto psi = gaussian_packet(g, {1.0, 0.5}, {0.5, 0.5});
    const double t = 0.9;
    // harmonic jacobian: dx/dt = v, dv/dt = -x; pullback uses M(-t)
    LinearMap jac{{0.0, 1.0}, {-1.0, 0.0}};
    auto lin = evolve_linear_flow(psi, jac, t);

    AnalyticScenario sc;
    sc.kind = AnalyticScenario::Kind::harmonic;
    auto exact = evolve_analytic(sc, psi, t);
    CHECK(linf_diff(lin, exact) < 1e-7);
    CHECK(std::abs(norm(lin) - 1.0) < 1e-12);
}
