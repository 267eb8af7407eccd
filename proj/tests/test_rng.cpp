#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "srct/rng.hpp"

using srct::rng::Rng;

TEST_CASE("derive is stable and label-sensitive") {
    const auto a = srct::rng::derive(42, "population");
    const auto b = srct::rng::derive(42, "population");
    const auto c = srct::rng::derive(42, "dispatch");
    CHECK(a == b);
    CHECK(a != c);
    CHECK(srct::rng::derive(42, "x", std::uint64_t{1}) != srct::rng::derive(42, "x", std::uint64_t{2}));
}

TEST_CASE("below covers the range without bias artifacts") {
    Rng r(7);
    std::vector<std::size_t> counts(5, 0);
    for (int i = 0; i < 50000; ++i) counts[r.below(5)]++;
    for (auto c : counts) {
        CHECK(c > 9000);
        CHECK(c < 11000);
    }
}

TEST_CASE("uniform stays in [0,1) and uniform_pos in (0,1]") {
    Rng r(3);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double v = r.uniform_pos();
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("normal has the right first two moments") {
    Rng r(11);
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        sum += z;
        sumsq += z * z;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("shuffle is a permutation and seed-stable") {
    std::vector<int> v = {1, 2, 3, 4, 5, 6, 7};
    Rng r1(99);
    r1.shuffle(v);
    std::vector<int> v2 = {1, 2, 3, 4, 5, 6, 7};
    Rng r2(99);
    r2.shuffle(v2);
    CHECK(v == v2);
    std::set<int> s(v.begin(), v.end());
    CHECK(s.size() == 7);
}

TEST_CASE("sample_indices draws k distinct indices") {
    Rng r(5);
    const auto sample = r.sample_indices(10, 4);
    REQUIRE(sample.size() == 4);
    std::set<std::size_t> s(sample.begin(), sample.end());
    CHECK(s.size() == 4);
    for (auto i : sample) CHECK(i < 10);
    CHECK_THROWS_AS(r.sample_indices(3, 4), std::invalid_argument);
}
