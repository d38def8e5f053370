#include <doctest.h>

#include <cmath>

#include "kvn/fft.hpp"
#include "kvn/galilei.hpp"
#include "kvn/verify.hpp"

using namespace kvn;

namespace {
GridPtr small_grid() { return make_grid_2d(32, {-5.0, 5.0}, {-5.0, 5.0}); }
}  // namespace

TEST_CASE("space translation moves the position centroid") {
    auto g = small_grid();
    auto psi = gaussian_packet(g, {0.0, 0.3, 0.0, 0.0}, {0.5, 0.5, 0.5, 0.5});
    auto moved = apply_group_element(space_translation({1.0, -0.5}), psi);
    CHECK(std::abs(coord_moment(moved, 0) - 1.0) < 1e-8);
    CHECK(std::abs(coord_moment(moved, 1) - (-0.2)) < 1e-8);
    CHECK(std::abs(norm(moved) - 1.0) < 1e-10);
}

TEST_CASE("boost shifts position by b t_ref and velocity by b") {
    auto g = small_grid();
    auto psi = gaussian_packet(g, {0.0, 0.0, 0.0, 0.0}, {0.5, 0.5, 0.5, 0.5});
    auto moved = apply_group_element(boost({0.5, 0.0}, 2.0), psi);
    CHECK(std::abs(coord_moment(moved, 0) - 1.0) < 1e-8);
    CHECK(std::abs(coord_moment(moved, 2) - 0.5) < 1e-8);
    CHECK(std::abs(norm(moved) - 1.0) < 1e-10);
}

TEST_CASE("quarter-turn rotation maps centroids as a rotation of r and v") {
    auto g = small_grid();
    auto psi = gaussian_packet(g, {1.0, 0.0, 0.0, 0.5}, {0.5, 0.5, 0.5, 0.5});
    auto rot = apply_group_element(rotation(0.5 * kPi), psi);
    CHECK(std::abs(coord_moment(rot, 0) - 0.0) < 1e-7);
    CHECK(std::abs(coord_moment(rot, 1) - 1.0) < 1e-7);
    CHECK(std::abs(coord_moment(rot, 2) - (-0.5)) < 1e-7);
    CHECK(std::abs(coord_moment(rot, 3) - 0.0) < 1e-7);
    CHECK(std::abs(norm(rot) - 1.0) < 1e-10);
}

TEST_CASE("boost and translation commute (central charge zero, no phase)") {
    auto g = small_grid();
    auto psi = gaussian_packet(g, {-0.4, 0.2, 0.1, 0.0}, {0.5, 0.5, 0.5, 0.5}, {1.0, 0.0, -0.5, 0.0});
    auto a = apply_group_element(space_translation({0.7, 0.0}),
                                 apply_group_element(boost({0.4, 0.2}, 1.5), psi));
    auto b = apply_group_element(boost({0.4, 0.2}, 1.5),
                                 apply_group_element(space_translation({0.7, 0.0}), psi));
    CHECK(linf_diff(a, b) < 1e-10);
}

TEST_CASE("group translation equals the exponential of the shift generator") {
    auto g = small_grid();
    auto psi = gaussian_packet(g, {0.0, 0.0, 0.0, 0.0}, {0.5, 0.5, 0.5, 0.5});
    auto via_group = apply_group_element(space_translation({0.9375, 0.0}), psi);  // 3 cells
    WaveField via_roll = psi;
    spectral::roll_axis(via_roll.data(), *g, 0, 3);
    CHECK(linf_diff(via_group, via_roll) < 1e-12);
}

TEST_CASE("small-angle rotations difference to the generator J") {
    auto g = small_grid();
    auto psi = gaussian_packet(g, {0.4, -0.3, 0.2, 0.1}, {0.55, 0.5, 0.5, 0.6});
    auto J = rotation_generator(g);
    const double th = 1e-4;
    auto plus = apply_group_element(rotation(th), psi);
    auto minus = apply_group_element(rotation(-th), psi);
    // (R(th) - R(-th)) / (2 th) psi + i J psi = O(th^2)
    WaveField diff = plus;
    axpy(diff, cplx{-1.0, 0.0}, minus);
    scale(diff, cplx{1.0 / (2.0 * th), 0.0});
    WaveField jpsi = J.apply(psi);
    axpy(diff, cplx{0.0, 1.0}, jpsi);
    CHECK(norm(diff) < 1e-6);
}

TEST_CASE("rotation generator is weak-form hermitian") {
    auto g = small_grid();
    auto p1 = gaussian_packet(g, {0.4, -0.3, 0.2, 0.1}, {0.5, 0.5, 0.5, 0.5});
    auto p2 = gaussian_packet(g, {-0.2, 0.0, -0.1, 0.3}, {0.6, 0.5, 0.55, 0.5});
    CHECK(hermiticity_defect(rotation_generator(g), p1, p2) < 1e-6);
}

TEST_CASE("group actions reject out-of-margin parameters") {
    auto g = small_grid();
    auto psi = gaussian_packet(g, {0.0, 0.0, 0.0, 0.0}, {0.5, 0.5, 0.5, 0.5});
    CHECK_THROWS_AS(apply_group_element(space_translation({6.0, 0.0}), psi), ConfigError);
    CHECK_THROWS_AS(apply_group_element(boost({0.5, 0.0}, 20.0), psi), ConfigError);
}

TEST_CASE("fast verify engine matches the generic operator path on a small grid") {
    VerifyOptions opts;
    opts.grid_points = 16;
    opts.n_states = 2;
    auto rep = run_verify_suite(opts);

    auto g = verify_grid(16);
    auto states = default_test_states(g, 2);
    auto suite = build_identity_suite(g, opts.t_ref);
    REQUIRE(suite.size() == rep.n_identities);
    for (const auto& ident : suite) {
        auto rows = identity_residuals(ident, states);
        for (const auto& row : rows) {
            // find the fast-engine row
            bool found = false;
            for (const auto& fr : rep.rows) {
                if (fr.id == row.id && fr.state_index == row.state_index) {
                    // identical arithmetic up to reassociation
                    CHECK(std::abs(fr.residual - row.residual) <
                          1e-10 + 1e-6 * std::max(fr.residual, row.residual));
                    found = true;
                    break;
                }
            }
            CHECK(found);
        }
    }
}

TEST_CASE("verify suite flags a broken shift-generator sign") {
    VerifyOptions opts;
    opts.grid_points = 16;
    opts.n_states = 1;
    opts.lambda_sign = -1.0;
    auto rep = run_verify_suite(opts);
    CHECK(!rep.all_pass);
    bool xlx_failed = false;
    for (const auto& r : rep.rows)
        if (r.id == "op.X_lambdax_diag" && !r.pass) xlx_failed = true;
    CHECK(xlx_failed);
}
