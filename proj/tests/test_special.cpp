#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>

#include "kinuq/special.hpp"

TEST_CASE("erf at reference points") {
    REQUIRE(std::abs(kinuq::erf(0.0)) == 0.0);
    REQUIRE(std::abs(kinuq::erf(1.0) - 0.8427007929497149) < 1e-7);
    REQUIRE(kinuq::erf(-1.0) == -kinuq::erf(1.0));
}

TEST_CASE("erfi at reference points") {
    REQUIRE(kinuq::erfi(0.0) == 0.0);
    REQUIRE(std::abs(kinuq::erfi(1.0) - 1.6504257587975429) < 1e-7);
}

TEST_CASE("erfi is odd") {
    for (double x : {0.25, 1.0, 3.5, 7.0, 12.0})
        REQUIRE(kinuq::erfi(-x) == -kinuq::erfi(x));
}

TEST_CASE("erfi dominates its tangent at the origin") {
    const double two_over_sqrt_pi = 1.1283791670955126;
    for (double x : {0.1, 0.5, 1.0, 2.0, 4.0, 6.0, 8.0})
        REQUIRE(kinuq::erfi(x) >= two_over_sqrt_pi * x);
}

TEST_CASE("erfi derivative matches 2/sqrt(pi) exp(x^2)") {
    const double two_over_sqrt_pi = 1.1283791670955126;
    const double h = 1e-6;
    for (double x : {0.5, 1.5, 3.0, 5.0}) {
        const double fd = (kinuq::erfi(x + h) - kinuq::erfi(x - h)) / (2.0 * h);
        const double exact = two_over_sqrt_pi * std::exp(x * x);
        REQUIRE(std::abs(fd / exact - 1.0) < 1e-6);
    }
}

TEST_CASE("erfi series and asymptotic branches agree at the crossover") {
    // 6 - eps runs the series, 6 + eps the expansion; the jump must stay at
    // the size set by the derivative, not by a branch mismatch
    const double eps = 1e-9;
    const double lo = kinuq::erfi(6.0 - eps);
    const double hi = kinuq::erfi(6.0 + eps);
    const double slope = 1.1283791670955126 * std::exp(36.0);
    REQUIRE(std::abs(hi - lo - 2.0 * eps * slope) < 1e-8 * lo);
}

TEST_CASE("erfi grows monotonically") {
    double prev = 0.0;
    for (double x = 0.25; x <= 10.0; x += 0.25) {
        const double y = kinuq::erfi(x);
        REQUIRE(y > prev);
        prev = y;
    }
}

TEST_CASE("erfi rejects arguments beyond the overflow guard") {
    REQUIRE_THROWS_AS(kinuq::erfi(30.5), std::domain_error);
    REQUIRE_THROWS_AS(kinuq::erfi(-31.0), std::domain_error);
    REQUIRE(std::isfinite(kinuq::erfi(26.0)));
}
