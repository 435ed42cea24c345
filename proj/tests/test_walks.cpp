#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include <rwrs/exact.hpp>
#include <rwrs/walks.hpp>

using namespace rwrs;

namespace {
TowerConfig sign_tower(int depth, std::uint64_t master, std::uint64_t replica = 0) {
    TowerConfig cfg;
    cfg.master = master;
    cfg.replica = replica;
    cfg.sceneries.assign(static_cast<std::size_t>(depth > 0 ? depth - 1 : 0), SceneryDist::rademacher());
    return cfg;
}
} // namespace

TEST_CASE("tower recursion replays against independently realized sceneries") {
    TowerConfig cfg;
    cfg.master = 77;
    cfg.sceneries = {SceneryDist::finite_int({{-1, Rational(1, 3)}, {0, Rational(1, 3)}, {1, Rational(1, 3)}}),
                     SceneryDist::rademacher()};
    const std::uint64_t n = 2048;
    const TowerPath tw = simulate_tower(3, n, cfg);
    REQUIRE(tw.int_levels.size() == 3);
    REQUIRE(tw.int_levels[0].size() == n + 1);

    const Scenery xi1(cfg.sceneries[0], derive_stream(cfg.master, "xi:1", cfg.replica));
    const Scenery xi2(cfg.sceneries[1], derive_stream(cfg.master, "xi:2", cfg.replica));
    for (std::uint64_t k = 0; k < n; ++k) {
        // level q+1 increments read the level-q field at the pre-step position
        CHECK(tw.int_levels[1][k + 1] - tw.int_levels[1][k] == xi1.at_int(tw.int_levels[0][k]));
        CHECK(tw.int_levels[2][k + 1] - tw.int_levels[2][k] == xi2.at_int(tw.int_levels[1][k]));
        CHECK(std::abs(tw.int_levels[0][k + 1] - tw.int_levels[0][k]) == 1);
    }
}

TEST_CASE("real-valued top scenery yields a real top path with the same recursion") {
    TowerConfig cfg;
    cfg.master = 5;
    cfg.sceneries = {SceneryDist::rademacher(), SceneryDist::gaussian_dist(1.0)};
    const std::uint64_t n = 1024;
    const TowerPath tw = simulate_tower(3, n, cfg);
    REQUIRE(tw.has_real_top());
    REQUIRE(tw.int_levels.size() == 2);
    REQUIRE(tw.real_top.size() == n + 1);

    const Scenery xi2(cfg.sceneries[1], derive_stream(cfg.master, "xi:2", cfg.replica));
    double acc = 0.0;
    for (std::uint64_t k = 0; k < n; ++k) {
        acc += xi2.at_real(tw.int_levels[1][k]);
        CHECK(tw.real_top[k + 1] == acc); // identical accumulation order
    }
}

TEST_CASE("level-1 walk alone equals tower level 1") {
    const TowerConfig cfg = sign_tower(2, 123, 4);
    const LatticePath z = simulate_srw(512, cfg);
    const TowerPath tw = simulate_tower(2, 512, cfg);
    CHECK(z == tw.int_levels[0]);
}

TEST_CASE("constant +1 field makes the level-2 path the identity") {
    TowerConfig cfg;
    cfg.master = 9;
    cfg.sceneries = {SceneryDist::point_mass(1)};
    // the override is required: a constant field is not centered
    CHECK_THROWS_AS(simulate_tower(2, 16, cfg), std::invalid_argument);
    cfg.allow_uncentered = true;
    const TowerPath tw = simulate_tower(2, 256, cfg);
    for (std::uint64_t k = 0; k <= 256; ++k)
        CHECK(tw.int_levels[1][k] == static_cast<std::int64_t>(k));
}

TEST_CASE("sign towers carry the parity invariant at every level") {
    const TowerPath tw = simulate_tower(3, 999, sign_tower(3, 31));
    for (std::uint64_t k = 0; k <= 999; ++k)
        for (int q = 0; q < 3; ++q)
            CHECK(((tw.int_levels[q][k] - static_cast<std::int64_t>(k)) & 1) == 0);
}

TEST_CASE("local time: totals, counts, self-intersections") {
    const TowerConfig cfg = sign_tower(1, 55);
    const std::uint64_t n = 5000;
    const LatticePath z = simulate_srw(n, cfg);
    const LocalTimeTable t = local_time(z, n);
    CHECK(t.total() == n);

    // brute recount over the first n states
    std::map<std::int64_t, std::uint64_t> brute;
    for (std::uint64_t k = 0; k < n; ++k) ++brute[z[k]];
    std::uint64_t sum = 0, v = 0;
    t.for_each([&](std::int64_t site, std::uint64_t c) {
        CHECK(brute[site] == c);
        sum += c;
        v += c * c;
    });
    CHECK(sum == n);
    CHECK(self_intersection(t) == v);
    for (std::int64_t site = -20; site <= 20; ++site)
        CHECK(t.count(site) == (brute.count(site) ? brute[site] : 0));
    // V_n bounds: n <= V <= n^2, and V >= n^2 / #sites
    CHECK(v >= n);
    CHECK(v <= n * n);
    CHECK(static_cast<double>(v) >= static_cast<double>(n) * static_cast<double>(n) /
                                        static_cast<double>(brute.size()));
}

TEST_CASE("rescaled occupation matches a direct count") {
    const TowerConfig cfg = sign_tower(1, 3);
    const std::uint64_t n = 4096;
    const LatticePath z = simulate_srw(n, cfg);
    std::uint64_t hits = 0;
    for (std::uint64_t k = 1; k <= n; ++k)
        if (z[k] == 0) ++hits;
    CHECK(rescaled_local_time(z, n, 1.0, 0.0, 0.5) ==
          Catch::Approx(static_cast<double>(hits) / std::sqrt(static_cast<double>(n))).epsilon(1e-12));
    // x picks the site floor(n^alpha x)
    const std::int64_t site = static_cast<std::int64_t>(std::floor(std::pow(4096.0, 0.5) * 0.25)); // 16
    std::uint64_t hits16 = 0;
    for (std::uint64_t k = 1; k <= n / 2; ++k)
        if (z[k] == site) ++hits16;
    CHECK(rescaled_local_time(z, n, 0.5, 0.25, 0.5) ==
          Catch::Approx(static_cast<double>(hits16) / std::sqrt(4096.0)).epsilon(1e-12));

    CHECK_THROWS_AS(rescaled_local_time(z, n, 1.1, 0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(rescaled_local_time(z, n, -0.1, 0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(rescaled_local_time(z, n, 0.5, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(rescaled_local_time(z, n, 0.5, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("full-step 3D walk coincides with tower levels (1,2,3)") {
    Oriented3DConfig cfg;
    cfg.master = 42;
    cfg.replica = 7;
    const std::uint64_t n = 4096;
    const Path3D p = simulate_oriented3d(n, cfg);
    TowerConfig tcfg = sign_tower(3, 42, 7);
    const TowerPath tw = simulate_tower(3, n, tcfg);
    CHECK(p.z == tw.int_levels[0]);
    CHECK(p.x == tw.int_levels[1]);
    CHECK(p.y == tw.int_levels[2]);
}

TEST_CASE("nearest-neighbour 3D walk moves one coordinate per step") {
    Oriented3DConfig cfg;
    cfg.master = 17;
    const std::uint64_t n = 8192;
    const Path3D p = simulate_nn3d(n, cfg);
    for (std::uint64_t k = 0; k < n; ++k) {
        const std::int64_t dx = std::abs(p.x[k + 1] - p.x[k]);
        const std::int64_t dy = std::abs(p.y[k + 1] - p.y[k]);
        const std::int64_t dz = std::abs(p.z[k + 1] - p.z[k]);
        CHECK(dx + dy + dz == 1);
    }

    // vertical coordinate: +-1 each with rate 1/4, so Var(z_n) = n/2
    const std::uint64_t m = 256, reps = 2000;
    double sq = 0.0;
    for (std::uint64_t r = 0; r < reps; ++r) {
        cfg.replica = r;
        const Path3D q = simulate_nn3d(m, cfg);
        sq += static_cast<double>(q.z[m]) * static_cast<double>(q.z[m]);
    }
    CHECK(sq / static_cast<double>(reps) / static_cast<double>(m) == Catch::Approx(0.5).margin(0.08));
}

TEST_CASE("twin sums: x equals the depth-2 tower path, cross-covariance vanishes") {
    VariantConfig cfg;
    cfg.master = 88;
    cfg.replica = 2;
    const std::uint64_t n = 1024;
    const Path3D p = simulate_variant(VariantKind::twin_level2, n, cfg);
    const TowerPath tw = simulate_tower(2, n, sign_tower(2, 88, 2));
    CHECK(p.z == tw.int_levels[0]);
    CHECK(p.x == tw.int_levels[1]);

    const std::uint64_t m = 64, reps = 4000;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::uint64_t r = 0; r < reps; ++r) {
        VariantConfig c = cfg;
        c.replica = 100 + r;
        const Path3D q = simulate_variant(VariantKind::twin_level2, m, c);
        const double x = static_cast<double>(q.x[m]), y = static_cast<double>(q.y[m]);
        sxy += x * y; sxx += x * x; syy += y * y;
    }
    const double corr = sxy / std::sqrt(sxx * syy);
    CHECK(std::abs(corr) < 4.0 / std::sqrt(static_cast<double>(reps)));
    // both marginals carry the level-2 second moment E[V_m]
    const double ref = expected_self_intersection(SceneryDist::rademacher(), m);
    CHECK(sxx / static_cast<double>(reps) == Catch::Approx(ref).epsilon(0.10));
    CHECK(syy / static_cast<double>(reps) == Catch::Approx(ref).epsilon(0.10));
}

TEST_CASE("plane-driven variant keeps the level-2 second moment") {
    // x reads a sign field along the z coordinate of an independent plane
    // walk; (x, z) alone is the depth-2 tower in law
    const std::uint64_t m = 64, reps = 4000;
    double sxx = 0.0;
    for (std::uint64_t r = 0; r < reps; ++r) {
        VariantConfig c;
        c.master = 19;
        c.replica = r;
        const Path3D q = simulate_variant(VariantKind::level2_driven_by_z, m, c);
        sxx += static_cast<double>(q.x[m]) * static_cast<double>(q.x[m]);
    }
    const double ref = expected_self_intersection(SceneryDist::rademacher(), m);
    CHECK(sxx / static_cast<double>(reps) == Catch::Approx(ref).epsilon(0.10));
}

TEST_CASE("plane-indexed variant: parity and purity") {
    VariantConfig cfg;
    cfg.master = 23;
    const std::uint64_t n = 512;
    const Path3D p = simulate_variant(VariantKind::level2_driven_by_2d, n, cfg);
    const Path3D q = simulate_variant(VariantKind::level2_driven_by_2d, n, cfg);
    CHECK(p.x == q.x);
    CHECK(p.y == q.y);
    CHECK(p.z == q.z);
    for (std::uint64_t k = 0; k <= n; ++k)
        CHECK(((p.x[k] - static_cast<std::int64_t>(k)) & 1) == 0);
    // y- and z-driven variants read different coordinates of the same field
    const Path3D a = simulate_variant(VariantKind::level2_driven_by_z, n, cfg);
    const Path3D b = simulate_variant(VariantKind::level2_driven_by_y, n, cfg);
    CHECK(a.z == b.z); // same plane walk either way
    CHECK(a.y == b.y);
    CHECK(a.x != b.x);
}

TEST_CASE("variant names round-trip") {
    for (VariantKind k : {VariantKind::twin_level2, VariantKind::level2_driven_by_z,
                          VariantKind::level2_driven_by_y, VariantKind::level2_driven_by_2d})
        CHECK(variant_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(variant_from_string("nope"), std::invalid_argument);
}

TEST_CASE("configuration guards") {
    CHECK_THROWS_AS(simulate_tower(0, 8, sign_tower(0, 1)), std::invalid_argument);
    CHECK_THROWS_AS(simulate_tower(6, 8, sign_tower(6, 1)), std::invalid_argument);
    // too few sceneries for the depth
    CHECK_THROWS_AS(simulate_tower(3, 8, sign_tower(2, 1)), std::invalid_argument);
    // uncentered scenery without the override
    TowerConfig bad = sign_tower(2, 1);
    bad.sceneries[0] = SceneryDist::finite_int({{0, Rational(1, 2)}, {2, Rational(1, 2)}});
    CHECK_THROWS_AS(simulate_tower(2, 8, bad), std::invalid_argument);
    // uncentered or non-integer step
    TowerConfig badstep = sign_tower(1, 1);
    badstep.step = SceneryDist::finite_int({{1, Rational(1, 1)}});
    CHECK_THROWS_AS(simulate_srw(8, badstep), std::invalid_argument);
    // real-valued scenery below the top level
    TowerConfig real_mid = sign_tower(3, 1);
    real_mid.sceneries[0] = SceneryDist::gaussian_dist(1.0);
    CHECK_THROWS_AS(simulate_tower(3, 8, real_mid), std::invalid_argument);
    // materialization and horizon caps (cheap: they throw before any work)
    CHECK_THROWS_AS(simulate_tower(2, (1ull << 22) + 2, sign_tower(2, 1)), std::invalid_argument);
    CHECK_THROWS_AS(run_tower(1, (1ull << 31) + 2, sign_tower(1, 1), [](std::uint64_t, const std::int64_t*, double) {}),
                    std::invalid_argument);
    Oriented3DConfig oc;
    oc.xi1 = SceneryDist::gaussian_dist(1.0);
    CHECK_THROWS_AS(simulate_oriented3d(8, oc), std::invalid_argument);
}

TEST_CASE("lattice span of step laws") {
    const LatticeSpan sgn = lattice_span(SceneryDist::rademacher());
    CHECK(sgn.d0 == 1);
    CHECK(sgn.d == 2);
    CHECK(sgn.a == 1);

    const LatticeSpan lazy =
        lattice_span(SceneryDist::finite_int({{-1, Rational(1, 3)}, {0, Rational(1, 3)}, {1, Rational(1, 3)}}));
    CHECK(lazy.d0 == 1);
    CHECK(lazy.d == 1);
    CHECK(lazy.a == 0);

    const LatticeSpan two = lattice_span(SceneryDist::finite_int({{-2, Rational(1, 2)}, {2, Rational(1, 2)}}));
    CHECK(two.d0 == 2);
    CHECK(two.d == 2);
    CHECK(two.a == 1);

    const LatticeSpan skew = lattice_span(SceneryDist::finite_int({{-3, Rational(3, 4)}, {1, Rational(1, 4)}}));
    CHECK(skew.d0 == 1);
    CHECK(skew.d == 4);
    CHECK(skew.a == 1);

    CHECK_THROWS_AS(lattice_span(SceneryDist::point_mass(5)), std::invalid_argument);
    CHECK_THROWS_AS(lattice_span(SceneryDist::gaussian_dist(1.0)), std::invalid_argument);
}
