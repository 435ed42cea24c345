#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include <rwrs/scenery.hpp>

using namespace rwrs;

TEST_CASE("distribution validation") {
    CHECK_NOTHROW(SceneryDist::rademacher().validate());
    CHECK_NOTHROW(SceneryDist::finite_int({{-1, Rational(1, 3)}, {0, Rational(1, 3)}, {1, Rational(1, 3)}}).validate());
    // probabilities must sum to one
    CHECK_THROWS_AS(SceneryDist::finite_int({{0, Rational(1, 2)}, {1, Rational(1, 3)}}).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS(SceneryDist::finite_int({}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(SceneryDist::gaussian_dist(-1.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(SceneryDist::heavy_tail_dist(2.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(SceneryDist::heavy_tail_dist(1.0).validate(), std::invalid_argument);
    CHECK_NOTHROW(SceneryDist::heavy_tail_dist(1.5).validate());
}

TEST_CASE("centering and second moments are exact") {
    CHECK(SceneryDist::rademacher().centered());
    CHECK(SceneryDist::rademacher().second_moment() == 1.0);

    const auto three = SceneryDist::finite_int({{-1, Rational(1, 3)}, {0, Rational(1, 3)}, {1, Rational(1, 3)}});
    CHECK(three.centered());
    CHECK(three.second_moment() == Catch::Approx(2.0 / 3.0).epsilon(1e-15));

    const auto two = SceneryDist::finite_int({{-2, Rational(1, 2)}, {2, Rational(1, 2)}});
    CHECK(two.centered());
    CHECK(two.second_moment() == 4.0);

    CHECK_FALSE(SceneryDist::point_mass(1).centered());
    CHECK(SceneryDist::point_mass(0).centered());
    // skewed but centered: -1 w.p. 2/3, 2 w.p. 1/3
    const auto skew = SceneryDist::finite_int({{-1, Rational(2, 3)}, {2, Rational(1, 3)}});
    CHECK(skew.centered());
    CHECK(skew.second_moment() == Catch::Approx(2.0).epsilon(1e-15));

    CHECK(SceneryDist::gaussian_dist(2.5).second_moment() == 2.5);
    CHECK(SceneryDist::stable_dist(StableParams{2.0, 0.5, 0.0}).second_moment() == 0.5);
    CHECK_THROWS_AS(SceneryDist::stable_dist(StableParams{1.5, 1.0, 0.0}).second_moment(), std::domain_error);
    CHECK_THROWS_AS(SceneryDist::heavy_tail_dist(1.5).second_moment(), std::domain_error);
}

TEST_CASE("integer-valued classification") {
    CHECK(SceneryDist::rademacher().integer_valued());
    CHECK(SceneryDist::finite_int({{-1, Rational(1, 2)}, {1, Rational(1, 2)}}).integer_valued());
    CHECK_FALSE(SceneryDist::gaussian_dist(1.0).integer_valued());
    CHECK_FALSE(SceneryDist::heavy_tail_dist(1.5).integer_valued());
}

TEST_CASE("heavy-tail quantile: median, continuity, tail law") {
    CHECK(heavy_tail_quantile(1.5, 0.5) == 0.0);
    // the core/tail pieces meet at x = 1
    const double c = 1.5 / (2.0 * 2.5);
    CHECK(heavy_tail_quantile(1.5, 0.5 + c) == Catch::Approx(1.0).margin(1e-12));
    CHECK(heavy_tail_quantile(1.5, 0.5 + c + 1e-12) == Catch::Approx(1.0).margin(1e-9));
    CHECK(heavy_tail_quantile(1.5, 0.5 - c) == Catch::Approx(-1.0).margin(1e-12));
    // symmetric
    for (double u : {0.6, 0.75, 0.9, 0.99})
        CHECK(heavy_tail_quantile(1.5, u) == Catch::Approx(-heavy_tail_quantile(1.5, 1.0 - u)).epsilon(1e-12));
    // closed-form tail: P(X > x) = (c/beta) x^-beta for x >= 1,
    // so the quantile at u = 1 - (c/beta) x^-beta is x
    for (double x : {2.0, 5.0, 20.0}) {
        const double u = 1.0 - (c / 1.5) * std::pow(x, -1.5);
        CHECK(heavy_tail_quantile(1.5, u) == Catch::Approx(x).epsilon(1e-10));
    }
}

TEST_CASE("realized scenery is a pure function of the site") {
    const Scenery s(SceneryDist::rademacher(), derive_stream(3, "xi:1", 0));
    std::map<std::int64_t, std::int64_t> first;
    for (std::int64_t x = -50; x <= 50; ++x) first[x] = s.at_int(x);
    // query order and repetition do not matter
    for (std::int64_t x = 50; x >= -50; --x) CHECK(s.at_int(x) == first[x]);
    // a fresh object over the same stream gives the same field
    const Scenery t(SceneryDist::rademacher(), derive_stream(3, "xi:1", 0));
    for (std::int64_t x = -50; x <= 50; ++x) CHECK(t.at_int(x) == first[x]);
    // a different replica gives a different field
    const Scenery u(SceneryDist::rademacher(), derive_stream(3, "xi:1", 1));
    int agree = 0;
    for (std::int64_t x = -200; x <= 200; ++x)
        if (u.at_int(x) == s.at_int(x)) ++agree;
    CHECK(agree > 120);
    CHECK(agree < 280);
}

TEST_CASE("rademacher sites are balanced signs") {
    const Scenery s(SceneryDist::rademacher(), derive_stream(21, "xi:1", 0));
    const std::int64_t n = 100000;
    std::int64_t sum = 0;
    for (std::int64_t x = -n / 2; x < n / 2; ++x) {
        const std::int64_t v = s.at_int(x);
        REQUIRE((v == 1 || v == -1));
        sum += v;
    }
    CHECK(std::abs(static_cast<double>(sum)) < 4.0 * std::sqrt(static_cast<double>(n)));
}

TEST_CASE("finite_int sampling matches its distribution") {
    const auto dist = SceneryDist::finite_int({{-2, Rational(1, 4)}, {0, Rational(1, 2)}, {2, Rational(1, 4)}});
    const Scenery s(dist, derive_stream(8, "xi:1", 0));
    std::map<std::int64_t, std::int64_t> counts;
    const std::int64_t n = 100000;
    for (std::int64_t x = 0; x < n; ++x) ++counts[s.at_int(x)];
    CHECK(counts.size() == 3);
    CHECK(std::abs(counts[-2] / static_cast<double>(n) - 0.25) < 0.01);
    CHECK(std::abs(counts[0] / static_cast<double>(n) - 0.50) < 0.01);
    CHECK(std::abs(counts[2] / static_cast<double>(n) - 0.25) < 0.01);
}

TEST_CASE("gaussian scenery has the requested variance") {
    const Scenery s(SceneryDist::gaussian_dist(2.0), derive_stream(5, "xi:2", 0));
    const std::int64_t n = 100000;
    double sum = 0, sq = 0;
    for (std::int64_t x = 0; x < n; ++x) {
        const double v = s.at_real(x);
        sum += v;
        sq += v * v;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 * std::sqrt(2.0 / n));
    CHECK(var == Catch::Approx(2.0).epsilon(0.03));
}

TEST_CASE("stable scenery at beta = 2 has variance 2 sigma^2") {
    const Scenery s(SceneryDist::stable_dist(StableParams{2.0, 0.7, 0.0}), derive_stream(5, "xi:3", 0));
    const std::int64_t n = 100000;
    double sq = 0;
    for (std::int64_t x = 0; x < n; ++x) {
        const double v = s.at_real(x);
        sq += v * v;
    }
    CHECK(sq / n == Catch::Approx(2.0 * 0.7 * 0.7).epsilon(0.03));
}

TEST_CASE("heavy-tail scenery matches the closed-form tail frequency") {
    const Scenery s(SceneryDist::heavy_tail_dist(1.5), derive_stream(6, "xi:1", 0));
    const std::int64_t n = 1000000;
    std::int64_t over2 = 0, over8 = 0;
    for (std::int64_t x = 0; x < n; ++x) {
        const double a = std::abs(s.at_real(x));
        if (a > 2.0) ++over2;
        if (a > 8.0) ++over8;
    }
    // P(|X| > u) = 2 (c/beta) u^-1.5 = 0.4 u^-1.5 at beta = 1.5
    const double p2 = 0.4 * std::pow(2.0, -1.5), p8 = 0.4 * std::pow(8.0, -1.5);
    CHECK(over2 / static_cast<double>(n) == Catch::Approx(p2).epsilon(0.05));
    CHECK(over8 / static_cast<double>(n) == Catch::Approx(p8).epsilon(0.10));
}

TEST_CASE("scenery values at integer sites agree between at_int and at_real") {
    const Scenery s(SceneryDist::finite_int({{-1, Rational(1, 2)}, {1, Rational(1, 2)}}),
                    derive_stream(10, "xi:1", 2));
    for (std::int64_t x = -100; x <= 100; ++x)
        CHECK(static_cast<double>(s.at_int(x)) == s.at_real(x));
}

TEST_CASE("at_int rejects real-valued sceneries") {
    const Scenery s(SceneryDist::gaussian_dist(1.0), derive_stream(1, "xi:1", 0));
    CHECK_THROWS_AS(s.at_int(0), std::logic_error);
}

TEST_CASE("plane-indexed scenery: purity, balance, domain guard") {
    const Scenery s(SceneryDist::rademacher(), derive_stream(14, "xi:2", 0));
    CHECK(s.at_int_2d(3, -4) == s.at_int_2d(3, -4));
    // distinct plane sites get independent values: axes don't alias
    int agree = 0;
    for (std::int64_t k = -100; k <= 100; ++k)
        if (s.at_int_2d(k, 0) == s.at_int_2d(0, k)) ++agree;
    CHECK(agree > 60);
    CHECK(agree < 140);
    std::int64_t sum = 0;
    for (std::int64_t a = -100; a < 100; ++a)
        for (std::int64_t b = -100; b < 100; ++b) sum += s.at_int_2d(a, b);
    CHECK(std::abs(static_cast<double>(sum)) < 4.0 * 200.0);
    CHECK_THROWS_AS(s.at_int_2d(3000000000LL, 0), std::out_of_range);
    CHECK_NOTHROW(s.at_int_2d(2000000000LL, -2000000000LL));
}
