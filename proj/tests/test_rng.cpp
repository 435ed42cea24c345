#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include <rwrs/rng.hpp>

using namespace rwrs;

TEST_CASE("zero-key stream reproduces the published splitmix64 sequence") {
    // word(i) = mix64(key + (i+1)*golden) is splitmix64; with key = 0 the
    // outputs must match the reference sequence for seed 0.
    StreamKey s;
    CHECK(s.word(0) == 0xE220A8397B1DCDAFull);
    CHECK(s.word(1) == 0x6E789E6AA1B965F4ull);
    CHECK(s.word(2) == 0x06C45D188009454Full);
}

TEST_CASE("mix64 is a bijection-grade mixer on a sample") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(mix64(i));
    CHECK(seen.size() == 10000);
    // single-bit flips move roughly half the output bits
    int total = 0;
    for (int b = 0; b < 64; ++b)
        total += __builtin_popcountll(mix64(12345) ^ mix64(12345 ^ (1ull << b)));
    const double avg = total / 64.0;
    CHECK(avg > 24.0);
    CHECK(avg < 40.0);
}

TEST_CASE("zigzag folds signed sites without collisions") {
    CHECK(zigzag(0) == 0);
    CHECK(zigzag(-1) == 1);
    CHECK(zigzag(1) == 2);
    CHECK(zigzag(-2) == 3);
    CHECK(zigzag(2) == 4);
    std::set<std::uint64_t> seen;
    for (std::int64_t s = -2000; s <= 2000; ++s) seen.insert(zigzag(s));
    CHECK(seen.size() == 4001);
}

TEST_CASE("interleave_bits is the Morton pairing") {
    CHECK(interleave_bits(0, 0) == 0);
    CHECK(interleave_bits(1, 0) == 1);
    CHECK(interleave_bits(0, 1) == 2);
    CHECK(interleave_bits(0xFFFFFFFFu, 0) == 0x5555555555555555ull);
    CHECK(interleave_bits(0, 0xFFFFFFFFu) == 0xAAAAAAAAAAAAAAAAull);
    std::set<std::uint64_t> seen;
    for (std::uint32_t a = 0; a < 64; ++a)
        for (std::uint32_t b = 0; b < 64; ++b) seen.insert(interleave_bits(a, b));
    CHECK(seen.size() == 64 * 64);
}

TEST_CASE("derive_stream separates master, label, and replica") {
    const StreamKey base = derive_stream(1, "xi:1", 0);
    CHECK(base.key == derive_stream(1, "xi:1", 0).key); // pure
    CHECK(base.key != derive_stream(2, "xi:1", 0).key);
    CHECK(base.key != derive_stream(1, "xi:2", 0).key);
    CHECK(base.key != derive_stream(1, "xi:1", 1).key);
    // label boundary matters, not just the byte multiset
    CHECK(derive_stream(1, "ab", 0).key != derive_stream(1, "ba", 0).key);

    std::set<std::uint64_t> keys;
    for (int lab = 0; lab < 16; ++lab)
        for (std::uint64_t r = 0; r < 64; ++r)
            keys.insert(derive_stream(7, "s:" + std::to_string(lab), r).key);
    CHECK(keys.size() == 16 * 64);
}

TEST_CASE("unit_open stays inside the open interval") {
    CHECK(unit_open(0) > 0.0);
    CHECK(unit_open(~0ull) < 1.0);
    CHECK(unit_open(0) == 0x1.0p-53);
    CHECK(unit_open(~0ull) == 1.0 - 0x1.0p-53);
    // midpoint word maps near 1/2
    CHECK(std::abs(unit_open(1ull << 63) - 0.5) < 1e-15);
}

TEST_CASE("standard_normal has unit variance and exact pair structure") {
    const StreamKey s = derive_stream(42, "norm", 0);
    const std::size_t n = 200000;
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = standard_normal(s, i);
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(var > 0.98);
    CHECK(var < 1.02);

    // indices 2m, 2m+1 are one Box-Muller transform of words 2m, 2m+1:
    // a^2 + b^2 = -2 ln u1 recovers the radius exactly
    for (std::uint64_t m = 0; m < 64; ++m) {
        const double a = standard_normal(s, 2 * m);
        const double b = standard_normal(s, 2 * m + 1);
        const double u1 = unit_open(s.word(2 * m));
        CHECK(std::abs(a * a + b * b + 2.0 * std::log(u1)) < 1e-10);
    }
}

TEST_CASE("normal_from_pair is the cosine branch of standard_normal") {
    const StreamKey s = derive_stream(9, "pair", 3);
    for (std::uint64_t m = 0; m < 256; ++m)
        CHECK(normal_from_pair(s, m) == standard_normal(s, 2 * m));
}

TEST_CASE("stable at beta = 2 is the scaled Gaussian endpoint, bit for bit") {
    const StreamKey s = derive_stream(11, "stable", 0);
    StableParams p{2.0, 0.5, 0.0};
    for (std::uint64_t i = 0; i < 256; ++i)
        CHECK(sample_stable(p, s, i) == 0.5 * 1.4142135623730950488 * normal_from_pair(s, i));
}

TEST_CASE("stable variates are symmetric and heavy-tailed at beta = 1.5") {
    const StreamKey s = derive_stream(13, "stable15", 0);
    StableParams p{1.5, 1.0, 0.0};
    const std::size_t n = 2000000;
    std::size_t pos = 0, over10 = 0, over100 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = sample_stable(p, s, i);
        if (x > 0) ++pos;
        const double a = std::abs(x);
        if (a > 10.0) ++over10;
        if (a > 100.0) ++over100;
    }
    // nu = 0: symmetric
    CHECK(std::abs(static_cast<double>(pos) / n - 0.5) < 4.0 / (2.0 * std::sqrt(static_cast<double>(n))));
    // tail index: P(|X|>u) ~ C u^-1.5, so the decade ratio is 10^1.5 = 31.6
    REQUIRE(over100 > 50);
    const double ratio = static_cast<double>(over10) / static_cast<double>(over100);
    CHECK(ratio > 20.0);
    CHECK(ratio < 45.0);
}

TEST_CASE("stable scale parameter is linear") {
    const StreamKey s = derive_stream(17, "scale", 0);
    StableParams p1{1.5, 1.0, 0.0}, p3{1.5, 3.0, 0.0};
    for (std::uint64_t i = 0; i < 64; ++i)
        CHECK(sample_stable(p3, s, i) == Catch::Approx(3.0 * sample_stable(p1, s, i)).epsilon(1e-14));
}

TEST_CASE("stable parameter validation") {
    const StreamKey s = derive_stream(1, "v", 0);
    CHECK_THROWS_AS(sample_stable(StableParams{1.0, 1.0, 0.0}, s, 0), std::invalid_argument);
    CHECK_THROWS_AS(sample_stable(StableParams{2.1, 1.0, 0.0}, s, 0), std::invalid_argument);
    CHECK_THROWS_AS(sample_stable(StableParams{1.5, 0.0, 0.0}, s, 0), std::invalid_argument);
    CHECK_THROWS_AS(sample_stable(StableParams{1.5, 1.0, 2.0}, s, 0), std::invalid_argument);
}

TEST_CASE("derived streams look independent pairwise") {
    const StreamKey a = derive_stream(5, "A", 0);
    const StreamKey b = derive_stream(5, "B", 0);
    const std::size_t n = 100000;
    double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = standard_normal(a, i);
        const double y = standard_normal(b, i);
        sa += x; sb += y; sab += x * y; saa += x * x; sbb += y * y;
    }
    const double cov = sab / n - (sa / n) * (sb / n);
    const double corr = cov / std::sqrt((saa / n - (sa / n) * (sa / n)) * (sbb / n - (sb / n) * (sb / n)));
    CHECK(std::abs(corr) < 4.0 / std::sqrt(static_cast<double>(n)));
}
