#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ecmlab/jump_menu.hpp"
#include "ecmlab/quadrature.hpp"

using namespace ecmlab;

TEST_CASE("Gauss-Hermite weights sum to sqrt(pi) and nodes are symmetric") {
    for (int n : {1, 2, 3, 7, 15, 21, 42}) {
        const auto gh = gauss_hermite(n);
        double total = 0.0;
        for (double w : gh.weights) total += w;
        REQUIRE(total == Catch::Approx(std::sqrt(M_PI)).epsilon(1e-13));
        for (int i = 0; i < n; ++i) {
            REQUIRE(gh.nodes[i] == -gh.nodes[n - 1 - i]);
            REQUIRE(gh.weights[i] == gh.weights[n - 1 - i]);
        }
        if (n % 2 == 1) REQUIRE(gh.nodes[n / 2] == 0.0);
    }
    REQUIRE_THROWS_AS(gauss_hermite(0), std::invalid_argument);
}

TEST_CASE("normal quadrature integrates polynomial moments exactly") {
    const auto q = normal_quadrature(11);  // exact through degree 21
    double m0 = 0, m1 = 0, m2 = 0, m4 = 0, m6 = 0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        const double z = q.nodes[i], w = q.weights[i];
        m0 += w;
        m1 += w * z;
        m2 += w * z * z;
        m4 += w * z * z * z * z;
        m6 += w * z * z * z * z * z * z;
    }
    REQUIRE(m0 == Catch::Approx(1.0).epsilon(1e-13));
    REQUIRE(m1 == Catch::Approx(0.0).margin(1e-14));
    REQUIRE(m2 == Catch::Approx(1.0).epsilon(1e-12));
    REQUIRE(m4 == Catch::Approx(3.0).epsilon(1e-12));
    REQUIRE(m6 == Catch::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("jump menu: one-point rule sits at the mean") {
    const auto menu = discretize_jump_distribution(0.3, 0.2, 1);
    REQUIRE(menu.entries.size() == 1);
    REQUIRE(menu.entries[0].size == Catch::Approx(0.3));
    REQUIRE(menu.entries[0].prob == Catch::Approx(1.0));
    menu.validate();
}

TEST_CASE("jump menu: seven-point rule reproduces mean and variance") {
    const auto menu = discretize_jump_distribution(0.3, 0.2, 7);
    menu.validate();
    // oracle: direct moment summation
    double mean = 0.0, var = 0.0, total = 0.0;
    for (const auto& e : menu.entries) {
        mean += e.prob * e.size;
        total += e.prob;
    }
    for (const auto& e : menu.entries) var += e.prob * (e.size - mean) * (e.size - mean);
    REQUIRE(total == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(mean == Catch::Approx(0.3).margin(1e-12));
    REQUIRE(var == Catch::Approx(0.04).margin(1e-12));
    REQUIRE(menu.mean() == Catch::Approx(mean));
    REQUIRE(menu.variance() == Catch::Approx(var));
}

TEST_CASE("jump menu: zero spread puts all mass at the mean") {
    const auto menu = discretize_jump_distribution(0.42, 0.0, 5);
    for (const auto& e : menu.entries) REQUIRE(e.size == Catch::Approx(0.42));
    REQUIRE(menu.variance() == Catch::Approx(0.0).margin(1e-16));
}

TEST_CASE("jump menu rejects bad arguments") {
    REQUIRE_THROWS_AS(discretize_jump_distribution(0.3, 0.2, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(discretize_jump_distribution(0.3, -0.1, 3), std::invalid_argument);
}
