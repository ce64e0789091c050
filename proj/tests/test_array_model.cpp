#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "beamforge/array_model.hpp"

using namespace beamforge;

namespace {
const std::complex<double> kJ(0.0, 1.0);
}

TEST_CASE("steering vector at broadside is all ones") {
    const auto a = steering_vector({4, 0.5}, 0.0);
    REQUIRE(a.size() == 4);
    for (int n = 0; n < 4; ++n)
        CHECK(std::abs(a[n] - 1.0) < 1e-12);
}

TEST_CASE("steering vector at endfire alternates sign") {
    const auto a = steering_vector({2, 0.5}, 90.0);
    CHECK(std::abs(a[0] - 1.0) < 1e-12);
    CHECK(std::abs(a[1] - (-1.0)) < 1e-12);
}

TEST_CASE("steering vector at 30 degrees steps a quarter turn per element") {
    const auto a = steering_vector({4, 0.5}, 30.0);
    CHECK(std::abs(a[0] - 1.0) < 1e-12);
    CHECK(std::abs(a[1] - kJ) < 1e-12);
    CHECK(std::abs(a[2] - (-1.0)) < 1e-12);
    CHECK(std::abs(a[3] - (-kJ)) < 1e-12);
}

TEST_CASE("steering vector elements are unit modulus") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> angle(-90.0, 90.0);
    std::uniform_real_distribution<double> spacing(0.1, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = steering_vector({9, spacing(rng)}, angle(rng));
        for (int n = 0; n < a.size(); ++n)
            CHECK(std::abs(std::abs(a[n]) - 1.0) < 1e-12);
        CHECK(std::abs(a[0] - 1.0) < 1e-12); // phase reference
    }
}

TEST_CASE("negated angle conjugates the steering vector") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> angle(0.0, 90.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double theta = angle(rng);
        const auto pos = steering_vector({6, 0.5}, theta);
        const auto neg = steering_vector({6, 0.5}, -theta);
        CHECK((neg - pos.conjugate()).norm() < 1e-12);
    }
}

TEST_CASE("steering vector rejects out-of-range angles and bad geometry") {
    CHECK_THROWS_AS(steering_vector({4, 0.5}, 90.5), std::domain_error);
    CHECK_THROWS_AS(steering_vector({4, 0.5}, -120.0), std::domain_error);
    CHECK_THROWS_AS(steering_vector({0, 0.5}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(steering_vector({4, 0.0}, 0.0), std::invalid_argument);
}

TEST_CASE("steering matrix columns match steering vectors exactly") {
    const ArrayGeometry geom{5, 0.5};
    const AngleGrid grid({-41.0, 0.0, 12.5, 63.0});
    const auto a = steering_matrix(geom, grid);
    REQUIRE(a.rows() == 5);
    REQUIRE(a.cols() == 4);
    for (int k = 0; k < grid.size(); ++k)
        CHECK((a.col(k).array() == steering_vector(geom, grid[k]).array()).all());
}

TEST_CASE("steering matrix small examples") {
    const ArrayGeometry geom{2, 0.5};
    const auto single = steering_matrix(geom, AngleGrid({0.0}));
    CHECK(std::abs(single(0, 0) - 1.0) < 1e-12);
    CHECK(std::abs(single(1, 0) - 1.0) < 1e-12);

    const auto both = steering_matrix(geom, AngleGrid({0.0, 90.0}));
    CHECK(std::abs(both(1, 0) - 1.0) < 1e-12);
    CHECK(std::abs(both(1, 1) - (-1.0)) < 1e-12);
}

TEST_CASE("angle grid validation") {
    CHECK_THROWS_AS(AngleGrid({}), std::invalid_argument);
    CHECK_THROWS_AS(AngleGrid({0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(AngleGrid({10.0, 5.0}), std::invalid_argument);
    CHECK_THROWS_AS(AngleGrid({-95.0, 0.0}), std::invalid_argument);

    const auto grid = AngleGrid::uniform(-90.0, 90.0, 181);
    CHECK(grid.size() == 181);
    CHECK(grid[0] == -90.0);
    CHECK(grid[180] == 90.0);
    CHECK(grid[90] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pattern from intervals marks exactly the in-range grid points") {
    const auto grid = AngleGrid::uniform(-90.0, 90.0, 181);

    SUBCASE("two five-degree lobes away from broadside") {
        const auto target = pattern_from_intervals(grid, {{-27.0, -23.0}, {28.0, 32.0}}, 1.0);
        CHECK((target.desired_power.array() == 1.0).count() == 10);
        CHECK((target.desired_power.array() == 0.0).count() == 171);
        CHECK((target.weights.array() == 1.0).all());
    }

    SUBCASE("lobes at broadside and 21 degrees") {
        const auto target = pattern_from_intervals(grid, {{-2.0, 2.0}, {19.0, 23.0}}, 1.0);
        CHECK((target.desired_power.array() == 1.0).count() == 10);
    }

    SUBCASE("no intervals means an all-zero pattern") {
        const auto target = pattern_from_intervals(grid, {}, 1.0);
        CHECK((target.desired_power.array() == 0.0).all());
    }

    SUBCASE("interval endpoints are inclusive") {
        const auto target = pattern_from_intervals(AngleGrid({-27.0, -23.0, 0.0}),
                                                   {{-27.0, -23.0}}, 2.5);
        CHECK(target.desired_power[0] == 2.5);
        CHECK(target.desired_power[1] == 2.5);
        CHECK(target.desired_power[2] == 0.0);
    }
}

TEST_CASE("pattern construction rejects bad input") {
    const auto grid = AngleGrid::uniform(-90.0, 90.0, 19);
    CHECK_THROWS_AS(pattern_from_intervals(grid, {{10.0, 5.0}}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(pattern_from_intervals(grid, {}, -1.0), std::invalid_argument);
}
