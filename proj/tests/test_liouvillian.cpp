#include <doctest.h>

#include <cmath>

#include "kvn/fft.hpp"
#include "kvn/liouvillian.hpp"

using namespace kvn;

namespace {
GridPtr grid_1d() { return make_grid_1d(128, 128, {-5.0, 5.0}, {-5.0, 5.0}); }
WaveField packet_1d(GridPtr g) { return gaussian_packet(g, {0.3, -0.2}, {0.5, 0.5}, {0.8, -0.4}); }
}  // namespace

TEST_CASE("free Liouvillian acts as v times the position shift generator") {
    auto g = grid_1d();
    auto psi = packet_1d(g);
    auto L = build_liouvillian(free_liouvillian(g));
    auto applied = L.apply(psi);

    WaveField direct = psi;
    spectral::lambda_axis(direct.data(), *g, 0);
    const std::size_t n = g->axis(1).n;
    for (std::size_t i = 0; i < direct.size(); ++i) direct.a[i] *= g->coord_of(1, i);
    (void)n;
    CHECK(linf_diff(applied, direct) < 1e-12);
}

TEST_CASE("projectile Liouvillian equals independently composed terms") {
    // 2D config, F = -m g on the y axis: L = Vx Lx + Vy Ly - g lambda_vy.
    auto g = make_grid_2d(32, {-5.0, 5.0}, {-5.0, 5.0});
    const double grav = 9.8;
    ForceField f = uniform_gravity_force(2, grav, 1);
    for (auto& comp : f.comp) comp = [inner = comp](const double* c) { return inner(c); };
    auto L = build_liouvillian(forced_liouvillian(g, f, 1.0));

    auto manual = (coord_op(g, "vx") * lambda_op(g, "x")) + (coord_op(g, "vy") * lambda_op(g, "y")) +
                  (cplx{-grav, 0.0} * lambda_op(g, "vy"));
    auto psi = gaussian_packet(g, {0.2, -0.1, 0.0, 0.4}, {0.55, 0.55, 0.55, 0.55});
    CHECK(linf_diff(L.apply(psi), manual.apply(psi)) < 1e-11);
}

TEST_CASE("harmonic Liouvillian equals V lambda_x - omega^2 X lambda_v") {
    auto g = grid_1d();
    const double k = 4.0, m = 1.0;
    auto L = build_liouvillian(forced_liouvillian(g, quadratic_force(1, k), m));
    auto manual =
        (coord_op(g, "vx") * lambda_op(g, "x")) + (cplx{-k / m, 0.0} * (coord_op(g, "x") * lambda_op(g, "vx")));
    auto psi = packet_1d(g);
    CHECK(linf_diff(L.apply(psi), manual.apply(psi)) < 1e-11);
}

TEST_CASE("built Liouvillians satisfy the dynamical commutators") {
    auto g = grid_1d();
    auto psi = gaussian_packet(g, {0.3, -0.2}, {0.5, 0.5});
    auto X = coord_op(g, "x");
    auto V = coord_op(g, "vx");
    const cplx I{0.0, 1.0};

    SUBCASE("free: i[L, X] = V and i[L, V] = 0") {
        auto L = build_liouvillian(free_liouvillian(g));
        OperatorIdentity lx{"LX", I * commutator(L, X), V, 1e-8};
        CHECK(identity_residual(lx, {psi}) < 1e-8);
        OperatorIdentity lv{"LV", I * commutator(L, V), zero_op(g), 1e-10};
        CHECK(identity_residual(lv, {psi}) < 1e-10);
    }
    SUBCASE("harmonic: i[L, V] = F/m") {
        const double k = 2.0, m = 0.5;
        auto L = build_liouvillian(forced_liouvillian(g, quadratic_force(1, k), m));
        auto rhs = cplx{-k / m, 0.0} * X;
        OperatorIdentity lv{"LVF", I * commutator(L, V), rhs, 1e-6};
        CHECK(identity_residual(lv, {psi}) < 1e-6);
        OperatorIdentity lx{"LX", I * commutator(L, X), V, 1e-8};
        CHECK(identity_residual(lx, {psi}) < 1e-8);
    }
    SUBCASE("drag (velocity-dependent): i[L, V] = -gamma V / m") {
        const double gamma = 0.7, m = 2.0;
        auto L = build_liouvillian(forced_liouvillian(g, linear_drag_force(1, gamma), m));
        auto rhs = cplx{-gamma / m, 0.0} * V;
        OperatorIdentity lv{"LVdrag", I * commutator(L, V), rhs, 1e-6};
        CHECK(identity_residual(lv, {psi}) < 1e-6);
    }
}

TEST_CASE("built Liouvillians are weak-form hermitian") {
    auto g = grid_1d();
    auto p1 = gaussian_packet(g, {0.3, -0.2}, {0.5, 0.5});
    auto p2 = gaussian_packet(g, {-0.4, 0.3}, {0.6, 0.45}, {0.5, 0.0});
    auto Lfree = build_liouvillian(free_liouvillian(g));
    CHECK(hermiticity_defect(Lfree, p1, p2) < 1e-8);
    auto Ldrag = build_liouvillian(forced_liouvillian(g, linear_drag_force(1, 0.5), 1.0));
    CHECK(hermiticity_defect(Ldrag, p1, p2) < 1e-8);
}

TEST_CASE("force flag consistency is validated") {
    auto g = grid_1d();
    ForceField f = linear_drag_force(1, 0.5);
    f.depends_on_velocity = false;  // lie about it
    CHECK_THROWS_AS(build_liouvillian(forced_liouvillian(g, f, 1.0)), ConfigError);
}

TEST_CASE("force_from_potentials with analytic builtins") {
    auto g2 = make_grid_2d(32, {-5.0, 5.0}, {-5.0, 5.0});

    SUBCASE("quadratic phi gives F = -k r") {
        auto f = force_from_potentials(quadratic_potential(2, 3.0), *g2);
        CHECK(!f.depends_on_velocity);
        double c[4] = {1.2, -0.7, 0.3, 0.4};
        CHECK(f.comp[0](c) == doctest::Approx(-3.6).epsilon(1e-12));
        CHECK(f.comp[1](c) == doctest::Approx(2.1).epsilon(1e-12));
    }
    SUBCASE("symmetric gauge gives the Lorentz force") {
        auto f = force_from_potentials(uniform_b_potentials(2.0), *g2);
        CHECK(f.depends_on_velocity);
        double c[4] = {0.5, -0.5, 0.3, 0.7};
        CHECK(f.comp[0](c) == doctest::Approx(0.7 * 2.0).epsilon(1e-12));
        CHECK(f.comp[1](c) == doctest::Approx(-0.3 * 2.0).epsilon(1e-12));
    }
    SUBCASE("constant A gives zero force") {
        auto f = force_from_potentials(constant_a_potentials({0.4, -0.2}), *g2);
        double c[4] = {0.5, -0.5, 0.3, 0.7};
        CHECK(std::abs(f.comp[0](c)) < 1e-14);
        CHECK(std::abs(f.comp[1](c)) < 1e-14);
    }
}

TEST_CASE("sampled-potential spectral path matches analytic for a smooth well") {
    // Periodic-smooth potential: phi = cos(2 pi x / L); spectral gradient is exact.
    auto g = grid_1d();
    PotentialPair p;
    p.label = "cosine";
    const double L = g->axis(0).width();
    p.phi = [L](const double* r) { return std::cos(2.0 * kPi * r[0] / L); };
    auto f = force_from_potentials(p, *g);
    for (std::size_t i = 0; i < g->axis(0).n; i += 7) {
        const double x = g->coords(0)[i];
        double c[2] = {x, 0.0};
        const double expect = (2.0 * kPi / L) * std::sin(2.0 * kPi * x / L);
        CHECK(std::abs(f.comp[0](c) - expect) < 1e-10);
    }
}

TEST_CASE("nonsmooth sampled potential is rejected") {
    auto g = grid_1d();
    PotentialPair p;
    p.label = "sawtooth";
    p.phi = [](const double* r) { return std::abs(r[0]); };  // kink at 0 and wrap
    CHECK_THROWS_AS(force_from_potentials(p, *g), NumericsError);
}

TEST_CASE("lagrangian superoperator recovers the nonconservative force") {
    auto g = grid_1d();
    auto psi = gaussian_packet(g, {0.2, 0.1}, {0.5, 0.5});
    const double k = 1.3;
    auto pots = quadratic_potential(1, k);

    SUBCASE("conservative quadratic force leaves no remainder") {
        auto res = lagrangian_superop_residual(pots, quadratic_force(1, k), 1.0, psi);
        CHECK(res[0] < 1e-6);
    }
    SUBCASE("added drag appears as the nonconservative remainder") {
        auto total = sum_forces({quadratic_force(1, k), linear_drag_force(1, 0.6)});
        auto res = lagrangian_superop_residual(pots, total, 1.0, psi);
        CHECK(res[0] < 1e-6);
    }
}

TEST_CASE("two-particle force constraint classifies the three listed cases") {
    auto g = make_two_particle_grid(16, {-5.0, 5.0}, {-5.0, 5.0});

    SUBCASE("relative-position force passes") {
        auto rep = two_particle_force_constraint(harmonic_coupling_force(1.7), *g);
        CHECK(rep.pass);
    }
    SUBCASE("center-of-mass-dependent force fails") {
        ForceField f;
        f.label = "bad";
        f.comp = {[](const double* c) { return -1.7 * (c[0] + c[1]); },
                  [](const double* c) { return 1.7 * (c[0] + c[1]); }};
        auto rep = two_particle_force_constraint(f, *g);
        CHECK(!rep.pass);
    }
    SUBCASE("relative-velocity force passes") {
        ForceField f;
        f.label = "relvel";
        f.depends_on_velocity = true;
        f.comp = {[](const double* c) { return -0.4 * (c[2] - c[3]); },
                  [](const double* c) { return 0.4 * (c[2] - c[3]); }};
        auto rep = two_particle_force_constraint(f, *g);
        CHECK(rep.pass);
    }
}

TEST_CASE("two-particle Liouvillian: per-particle force laws and CM/relative brackets") {
    auto g = make_two_particle_grid(32, {-5.0, 5.0}, {-5.0, 5.0});
    const double m1 = 1.0, m2 = 2.0, k = 1.5;
    auto spec = two_particle_liouvillian(g, harmonic_coupling_force(k), m1, m2);
    auto L = build_liouvillian(spec);
    auto psi = gaussian_packet(g, {0.3, -0.2, 0.1, 0.0}, {0.55, 0.55, 0.55, 0.55});
    const cplx I{0.0, 1.0};

    auto X1 = coord_op(g, "x1");
    auto X2 = coord_op(g, "x2");
    auto V1 = coord_op(g, "v1");
    auto V2 = coord_op(g, "v2");

    // i[L, V_i] = F_i / m_i with F relative-position only.
    auto F1 = scalar_field_op(g, [k](const double* c) { return cplx(-k * (c[0] - c[1]), 0.0); }, "F1");
    OperatorIdentity f1{"two.F1", I * commutator(L, V1), cplx{1.0 / m1, 0.0} * F1, 1e-5};
    CHECK(identity_residual(f1, {psi}) < 1e-5);
    auto F2 = scalar_field_op(g, [k](const double* c) { return cplx(k * (c[0] - c[1]), 0.0); }, "F2");
    OperatorIdentity f2{"two.F2", I * commutator(L, V2), cplx{1.0 / m2, 0.0} * F2, 1e-5};
    CHECK(identity_residual(f2, {psi}) < 1e-5);

    // CM / relative operators: the four nonvanishing brackets equal i.
    const double M = m1 + m2;
    auto Xcm = cplx{m1 / M, 0.0} * X1 + cplx{m2 / M, 0.0} * X2;
    auto Vcm = cplx{m1 / M, 0.0} * V1 + cplx{m2 / M, 0.0} * V2;
    auto Xrel = X1 - X2;
    auto Vrel = V1 - V2;
    auto lam_total_r = lambda_op(g, "x1") + lambda_op(g, "x2");
    auto lam_total_v = lambda_op(g, "v1") + lambda_op(g, "v2");
    auto lam_star_r = cplx{m2 / M, 0.0} * lambda_op(g, "x1") - cplx{m1 / M, 0.0} * lambda_op(g, "x2");
    auto lam_star_v = cplx{m2 / M, 0.0} * lambda_op(g, "v1") - cplx{m1 / M, 0.0} * lambda_op(g, "v2");
    auto Id = identity_op(g);

    const double tol = 1e-5;
    CHECK(identity_residual({"rel.xcm", commutator(Xcm, lam_total_r), I * Id, tol}, {psi}) < tol);
    CHECK(identity_residual({"rel.vcm", commutator(Vcm, lam_total_v), I * Id, tol}, {psi}) < tol);
    CHECK(identity_residual({"rel.xrel", commutator(Xrel, lam_star_r), I * Id, tol}, {psi}) < tol);
    CHECK(identity_residual({"rel.vrel", commutator(Vrel, lam_star_v), I * Id, tol}, {psi}) < tol);
    // and a vanishing cross bracket
    CHECK(identity_residual({"rel.cross", commutator(Xcm, lam_star_r), zero_op(g), 1e-5}, {psi}) < 1e-5);
}

TEST_CASE("dimension mismatch between force and grid is rejected") {
    auto g = grid_1d();
    CHECK_THROWS_AS(build_liouvillian(forced_liouvillian(g, uniform_b_force(1.0), 1.0)), ConfigError);
}
