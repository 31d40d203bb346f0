#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "ludobench/core.hpp"
#include "ludobench/error.hpp"

using namespace ludobench;

namespace {

// Plain reference SplitMix64, written independently of the library.
std::uint64_t reference_splitmix(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

TEST_CASE("splitmix64 first output for seed 0") {
    auto [next, v] = rng_next(RngState{0});
    CHECK(v == 0xE220A8397B1DCDAFULL);
    CHECK(next.state == 0x9E3779B97F4A7C15ULL);
}

TEST_CASE("splitmix64 matches a reference implementation") {
    for (std::uint64_t seed : {0ULL, 1ULL, 2ULL, 42ULL, 0xDEADBEEFULL, ~0ULL}) {
        std::uint64_t x = seed;
        Rng rng(seed);
        for (int i = 0; i < 1000; ++i) REQUIRE(rng.next_u64() == reference_splitmix(x));
    }
}

TEST_CASE("distinct seeds give distinct first outputs and calls are pure") {
    CHECK(rng_next(RngState{1}).second != rng_next(RngState{2}).second);
    CHECK(rng_next(RngState{7}) == rng_next(RngState{7}));
}

TEST_CASE("unit draws lie in [0,1) with mean near one half") {
    Rng rng(123);
    double sum = 0.0;
    constexpr int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.unit();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / n - 0.5) < 0.01);
    CHECK(rng_unit(RngState{5}).second == rng_unit(RngState{5}).second);
}

TEST_CASE("derived streams are deterministic and separate") {
    CHECK(derive_stream(3, 1) == derive_stream(3, 1));
    CHECK(!(derive_stream(3, 1) == derive_stream(3, 2)));
    CHECK(!(derive_stream(3, 1) == derive_stream(4, 1)));
}

TEST_CASE("below stays in range and covers it") {
    Rng rng(9);
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 7000; ++i) {
        const auto v = rng.below(7);
        REQUIRE(v < 7);
        ++hits[v];
    }
    for (int h : hits) CHECK(h > 800);
}

TEST_CASE("normal draws have unit moments") {
    Rng rng(11);
    double s = 0.0;
    double s2 = 0.0;
    constexpr int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        s += z;
        s2 += z * z;
    }
    CHECK(std::abs(s / n) < 0.02);
    CHECK(std::abs(s2 / n - 1.0) < 0.03);
}

TEST_CASE("discrete distribution validation") {
    CHECK_THROWS_AS(DiscreteDistribution({{1.0, 0.5}, {2.0, 0.3}}), ValidationError);
    CHECK_THROWS_AS(DiscreteDistribution({}), ValidationError);
    CHECK_THROWS_AS(DiscreteDistribution({{1.0, -0.1}, {2.0, 1.1}}), ValidationError);
    CHECK_THROWS_AS(DiscreteDistribution({{NAN, 1.0}}), ValidationError);
    const DiscreteDistribution d({{-2.0, 0.25}, {4.0, 0.75}});
    CHECK(d.mean() == doctest::Approx(2.5));
    CHECK(d.min_value() == -2.0);
    CHECK(d.max_value() == 4.0);
    CHECK(d.has_negative_outcome());
    CHECK(!DiscreteDistribution::point_mass(3.0).has_negative_outcome());
}

TEST_CASE("sampling a point mass always returns index 0") {
    const auto d = DiscreteDistribution::point_mass(1.0);
    RngState s{77};
    for (int i = 0; i < 100; ++i) {
        auto [next, idx] = sample_discrete(d, s);
        REQUIRE(idx == 0);
        s = next;
    }
}

TEST_CASE("sampling frequencies match probabilities") {
    const DiscreteDistribution d({{0.0, 0.5}, {1.0, 0.5}});
    RngState s{2024};
    int ones = 0;
    constexpr int n = 100000;
    for (int i = 0; i < n; ++i) {
        auto [next, idx] = sample_discrete(d, s);
        ones += idx == 1 ? 1 : 0;
        s = next;
    }
    CHECK(std::abs(static_cast<double>(ones) / n - 0.5) < 0.01);
}

TEST_CASE("sampling never returns a zero-probability index") {
    const DiscreteDistribution d({{0.0, 0.0}, {1.0, 1.0}, {2.0, 0.0}});
    RngState s{5};
    for (int i = 0; i < 1000; ++i) {
        auto [next, idx] = sample_discrete(d, s);
        REQUIRE(idx == 1);
        s = next;
    }
}
