#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kzising/lattice.hpp"

#include <cmath>
#include <numbers>

using namespace kzising;

constexpr double pi = std::numbers::pi;

TEST_CASE("build_grid produces (2j+1)pi/N") {
    auto g4 = build_grid(4);
    REQUIRE(g4.momenta.size() == 2);
    CHECK(g4.momenta[0] == doctest::Approx(pi / 4).epsilon(1e-15));
    CHECK(g4.momenta[1] == doctest::Approx(3 * pi / 4).epsilon(1e-15));

    auto g8 = build_grid(8);
    REQUIRE(g8.momenta.size() == 4);
    CHECK(g8.momenta[0] == doctest::Approx(pi / 8).epsilon(1e-15));
    CHECK(g8.momenta[1] == doctest::Approx(3 * pi / 8).epsilon(1e-15));
    CHECK(g8.momenta[2] == doctest::Approx(5 * pi / 8).epsilon(1e-15));
    CHECK(g8.momenta[3] == doctest::Approx(7 * pi / 8).epsilon(1e-15));

    auto g2000 = build_grid(2000);
    REQUIRE(g2000.momenta.size() == 1000);
    CHECK(g2000.momenta.back() == doctest::Approx(pi - pi / 2000).epsilon(1e-15));
}

TEST_CASE("build_grid momenta strictly increasing in (0, pi)") {
    for (int n : {4, 6, 10, 100, 2000}) {
        auto grid = build_grid(n);
        REQUIRE(static_cast<int>(grid.momenta.size()) == n / 2);
        double prev = 0.0;
        for (double k : grid.momenta) {
            CHECK(k > prev);
            CHECK(k < pi);
            prev = k;
        }
    }
}

TEST_CASE("build_grid rejects odd or too-small N") {
    CHECK_THROWS_AS(build_grid(3), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(5), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(2), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(0), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(-4), std::invalid_argument);
}

TEST_CASE("equilibrium modes normalized for g in {0.5, 1, 2, 10}") {
    auto grid = build_grid(100);
    for (double g : {0.5, 1.0, 2.0, 10.0}) {
        auto eq = equilibrium_modes(grid, g);
        for (std::size_t i = 0; i < grid.momenta.size(); ++i) {
            double norm = eq.u[i] * eq.u[i] + eq.v[i] * eq.v[i];
            CHECK(std::abs(norm - 1.0) < 1e-12);
            CHECK(eq.u[i] >= 0.0);
            CHECK(eq.v[i] >= 0.0);
        }
    }
}

TEST_CASE("sin and cos of theta_k stay on the unit circle") {
    auto grid = build_grid(64);
    for (double g : {0.5, 1.0, 2.0, 10.0}) {
        for (double k : grid.momenta) {
            double theta = std::atan2(std::sin(k), g - std::cos(k));
            double s = std::sin(theta), c = std::cos(theta);
            CHECK(std::abs(s * s + c * c - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("deep paramagnet limit: u -> 1, v -> 0") {
    auto grid = build_grid(32);
    auto eq = equilibrium_modes(grid, 1e6);
    for (std::size_t i = 0; i < grid.momenta.size(); ++i) {
        CHECK(eq.u[i] == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(std::abs(eq.v[i]) < 2e-6);
    }
}

TEST_CASE("critical point: closed forms match the atan2 branch") {
    auto grid = build_grid(2000);
    auto eq = equilibrium_modes(grid, 1.0);
    for (std::size_t i = 0; i < grid.momenta.size(); ++i) {
        double k = grid.momenta[i];
        CHECK(std::abs(eq.v[i] - critical_v(k)) < 1e-12);
        CHECK(std::abs(eq.u[i] - critical_u(k)) < 1e-12);
    }
    // small-k: both components approach 1/sqrt(2)
    CHECK(eq.u[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-3));
    CHECK(eq.v[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-3));
    // k = pi/2 sits on the N=2000 grid only approximately; use N=4 where it is j=0
    auto eq4 = equilibrium_modes(build_grid(4), 1.0);
    CHECK(eq4.v[0] == doctest::Approx(std::cos(pi / 16 + pi / 4)).epsilon(1e-14));
    CHECK(eq4.u[0] == doctest::Approx(std::sin(pi / 16 + pi / 4)).epsilon(1e-14));
}

TEST_CASE("mode energy: known values") {
    // eps_k(g=1) = 4 sin(k/2); eps_k(g=0) = 2
    for (double k : {0.1, 0.5, 1.0, 2.0, 3.0}) {
        CHECK(mode_energy(k, 1.0) == doctest::Approx(4.0 * std::sin(k / 2)).epsilon(1e-14));
        CHECK(mode_energy(k, 0.0) == doctest::Approx(2.0).epsilon(1e-14));
    }
}

TEST_CASE("kz_scales arithmetic and finite-size flag") {
    auto s1 = kz_scales(2000, 100.0);
    CHECK(s1.t_hat == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(s1.xi_hat == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(s1.tau_c == doctest::Approx(2000.0).epsilon(1e-15));
    CHECK(s1.ratio == doctest::Approx(200.0).epsilon(1e-15));
    CHECK(s1.finite_size_ok);

    auto s2 = kz_scales(1000, 400.0);
    CHECK(s2.t_hat == doctest::Approx(20.0).epsilon(1e-15));
    CHECK(s2.ratio == doctest::Approx(50.0).epsilon(1e-15));
    CHECK(s2.finite_size_ok);

    auto s3 = kz_scales(100, 10000.0);
    CHECK(s3.ratio == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_FALSE(s3.finite_size_ok);

    CHECK(s1.z == 1.0);
    CHECK(s1.nu == 1.0);
    CHECK_THROWS_AS(kz_scales(100, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(kz_scales(100, -5.0), std::invalid_argument);
}
