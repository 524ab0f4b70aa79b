#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "kinuq/rng.hpp"

using kinuq::RngStream;

TEST_CASE("identical (seed, stream) pairs reproduce the same sequence") {
    RngStream a(42, 7), b(42, 7);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.raw() == b.raw());
}

TEST_CASE("distinct streams of one seed do not collide") {
    RngStream a(42, 0), b(42, 1);
    std::size_t agree = 0;
    for (int i = 0; i < 1000; ++i)
        if (a.raw() == b.raw()) ++agree;
    REQUIRE(agree == 0);
}

TEST_CASE("mix64 separates small consecutive inputs") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t x = 0; x < 1000; ++x) seen.insert(kinuq::mix64(x));
    REQUIRE(seen.size() == 1000);
}

TEST_CASE("uniform01 stays in [0,1)") {
    RngStream rng(1, 2);
    for (int i = 0; i < 20000; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("uniform(a,b) respects the interval and its mean") {
    RngStream rng(3, 4);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform(-2.0, 3.0);
        REQUIRE(u >= -2.0);
        REQUIRE(u < 3.0);
        sum += u;
    }
    // mean 1/2, sd of the estimate 5/sqrt(12 n) ~ 0.0046
    REQUIRE(std::abs(sum / n - 0.5) < 0.02);
}

TEST_CASE("normal variates have the right first two moments") {
    RngStream rng(5, 6);
    const int n = 100000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        s1 += z;
        s2 += z * z;
    }
    const double mean = s1 / n;
    const double var = s2 / n - mean * mean;
    REQUIRE(std::abs(mean) < 0.015);      // 3 sigma ~ 0.0095
    REQUIRE(std::abs(var - 1.0) < 0.025); // 3 sigma ~ 0.0135
}

TEST_CASE("two_point returns only +a and -a, roughly balanced") {
    RngStream rng(7, 8);
    int plus = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.two_point(0.25);
        REQUIRE((x == 0.25 || x == -0.25));
        if (x > 0.0) ++plus;
    }
    REQUIRE(std::abs(plus - n / 2) < 800); // 5 sigma ~ 790
}

TEST_CASE("bounded(n) is uniform on [0,n)") {
    RngStream rng(9, 10);
    std::vector<int> counts(8, 0);
    const int n = 80000;
    for (int i = 0; i < n; ++i) {
        const std::uint64_t k = rng.bounded(8);
        REQUIRE(k < 8);
        ++counts[k];
    }
    for (int c : counts) REQUIRE(std::abs(c - 10000) < 500); // 5 sigma ~ 470
}
