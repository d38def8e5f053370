#include <doctest.h>

#include <cmath>

#include "kvn/field.hpp"
#include "kvn/grid.hpp"

using namespace kvn;

namespace {
GridPtr default_grid_64() {
    return make_grid_1d(64, 64, {-10.0, 10.0}, {-5.0, 5.0});
}
}  // namespace

TEST_CASE("grid spacing follows the extents") {
    auto g = default_grid_64();
    CHECK(g->axis(0).spacing() == doctest::Approx(0.3125).epsilon(1e-14));
    CHECK(g->axis(1).spacing() == doctest::Approx(0.15625).epsilon(1e-14));
    CHECK(g->total_points() == 64 * 64);
    CHECK(g->cell_volume() == doctest::Approx(0.3125 * 0.15625));
}

TEST_CASE("wavenumbers come out in standard FFT order") {
    auto g = make_grid_1d(8, 8, {0.0, 8.0}, {-1.0, 1.0});
    const auto& k = g->wavenumbers(0);
    const double dk = 2.0 * kPi / 8.0;
    const double expected[] = {0, 1, 2, 3, -4, -3, -2, -1};
    for (int i = 0; i < 8; ++i) CHECK(k[i] == doctest::Approx(dk * expected[i]).epsilon(1e-14));
}

TEST_CASE("grid validation rejects bad specs") {
    GridSpec s;
    s.config_dim = 1;
    s.points_per_axis = {48, 64};  // not a power of two
    s.position_extent = {{-1.0, 1.0}};
    s.velocity_extent = {{-1.0, 1.0}};
    CHECK_THROWS_AS(build_grid(s), ConfigError);

    s.points_per_axis = {64, 64};
    s.position_extent = {{1.0, 1.0}};  // zero width
    CHECK_THROWS_AS(build_grid(s), ConfigError);

    // 32^4 exceeds a one-million-point cap.
    GridSpec s4;
    s4.config_dim = 2;
    s4.points_per_axis = {32, 32, 32, 32};
    s4.position_extent = {{-1.0, 1.0}, {-1.0, 1.0}};
    s4.velocity_extent = {{-1.0, 1.0}, {-1.0, 1.0}};
    s4.max_points = 1000000;
    CHECK_THROWS_AS(build_grid(s4), ConfigError);
    s4.max_points = 1 << 24;
    CHECK_NOTHROW(build_grid(s4));
}

TEST_CASE("gaussian packet is normalized with the requested moments") {
    auto g = default_grid_64();
    auto psi = gaussian_packet(g, {0.0, 2.0}, {0.5, 0.5});
    CHECK(std::abs(norm(psi) - 1.0) < 1e-10);
    CHECK(std::abs(coord_moment(psi, 0)) < 1e-8);
    CHECK(std::abs(coord_moment(psi, 1) - 2.0) < 1e-8);
    // variance reproduces sigma^2
    const double var = coord_moment(psi, 0, 2) - std::pow(coord_moment(psi, 0), 2);
    CHECK(std::abs(var - 0.25) < 1e-6);
}

TEST_CASE("gaussian packet rejects centers near a boundary, naming the axis") {
    auto g = default_grid_64();
    try {
        gaussian_packet(g, {0.0, 4.0}, {0.5, 0.5});  // 2 sigma from the v edge
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("vx") != std::string::npos);
    }
}

TEST_CASE("displaced-gaussian overlap matches the closed form") {
    // Independent oracle: |<psi1|psi2>| = exp(-dx^2 / (8 sigma^2)) for equal
    // widths; frozen value below for dx = 1, sigma = 0.5.
    auto g = default_grid_64();
    auto p1 = gaussian_packet(g, {0.0, 0.0}, {0.5, 0.5});
    auto p2 = gaussian_packet(g, {1.0, 0.0}, {0.5, 0.5});
    const double expected = 0.6065306597126334;  // exp(-0.5)
    CHECK(std::abs(std::abs(inner_product(p1, p2)) - expected) < 1e-6);
}

TEST_CASE("inner product is conjugate symmetric and normalized") {
    auto g = default_grid_64();
    auto p1 = gaussian_packet(g, {0.0, 0.0}, {0.5, 0.5}, {1.0, 0.0});
    auto p2 = gaussian_packet(g, {0.7, 0.4}, {0.6, 0.5}, {0.0, 2.0});
    CHECK(std::abs(inner_product(p1, p1) - cplx{1.0, 0.0}) < 1e-10);
    const cplx ab = inner_product(p1, p2);
    const cplx ba = inner_product(p2, p1);
    CHECK(std::abs(ab - std::conj(ba)) < 1e-12);

    auto g2 = make_grid_1d(64, 32, {-10.0, 10.0}, {-5.0, 5.0});
    auto q = gaussian_packet(g2, {0.0, 0.0}, {0.5, 0.5});
    CHECK_THROWS_AS(inner_product(p1, q), ConfigError);
}

TEST_CASE("marginal densities") {
    auto g = default_grid_64();
    auto psi = gaussian_packet(g, {0.0, 1.0}, {0.5, 0.4});

    SUBCASE("full marginal is |psi|^2 and integrates to one") {
        auto rho = marginal_density(psi, {"x", "vx"});
        CHECK(std::abs(rho.integral() - 1.0) < 1e-8);
        std::size_t i_mid = (32 * 64) + 32;
        CHECK(rho.values[i_mid] == doctest::Approx(std::norm(psi.a[i_mid])).epsilon(1e-12));
    }

    SUBCASE("position marginal is the 1D gaussian of width sigma_r") {
        auto rho = marginal_density(psi, {"x"});
        CHECK(std::abs(rho.integral() - 1.0) < 1e-8);
        const double s = 0.5;
        for (std::size_t i = 20; i < 44; ++i) {
            const double x = g->coords(0)[i];
            const double expect = std::exp(-x * x / (2 * s * s)) / std::sqrt(2 * kPi * s * s);
            CHECK(std::abs(rho.values[i] - expect) < 1e-8);
        }
    }

    SUBCASE("uniform phase leaves marginals unchanged; |c|^2 scaling") {
        auto rho0 = marginal_density(psi, {"vx"});
        WaveField rotated = psi;
        scale(rotated, cplx(std::cos(0.8), std::sin(0.8)));
        auto rho1 = marginal_density(rotated, {"vx"});
        for (std::size_t i = 0; i < rho0.values.size(); ++i)
            CHECK(std::abs(rho0.values[i] - rho1.values[i]) < 1e-14);

        WaveField scaled = psi;
        scale(scaled, cplx(2.0, 0.0));
        auto rho2 = marginal_density(scaled, {"vx"});
        for (std::size_t i = 0; i < rho0.values.size(); ++i)
            CHECK(std::abs(rho2.values[i] - 4.0 * rho0.values[i]) < 1e-12);
    }

    SUBCASE("unknown axis is rejected") {
        CHECK_THROWS_AS(marginal_density(psi, {"qq"}), ConfigError);
    }
}

TEST_CASE("norm is invariant under a unimodular phase field") {
    auto g = default_grid_64();
    auto psi = gaussian_packet(g, {0.0, 0.0}, {0.5, 0.5});
    WaveField twisted = psi;
    for (std::size_t i = 0; i < twisted.size(); ++i) {
        const double th = 0.1 * static_cast<double>(i % 97);
        twisted.a[i] *= cplx(std::cos(th), std::sin(th));
    }
    CHECK(std::abs(norm(twisted) - norm(psi)) < 1e-12);
}
