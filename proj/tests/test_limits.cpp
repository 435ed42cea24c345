#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <rwrs/limits.hpp>

using namespace rwrs;

TEST_CASE("grid specification accepts only commensurate horizons") {
    CHECK(GridSpec{0.25, 1.0}.steps() == 4);
    CHECK(GridSpec{1.0 / 16384.0, 1.0}.steps() == 16384);
    CHECK(GridSpec{0.5, 3.0}.steps() == 6);
    CHECK_THROWS_AS((GridSpec{0.3, 1.0}.steps()), std::invalid_argument);
    CHECK_THROWS_AS((GridSpec{-0.1, 1.0}.steps()), std::invalid_argument);
    CHECK_THROWS_AS((GridSpec{0.25, -1.0}.steps()), std::invalid_argument);
    CHECK_THROWS_AS((GridSpec{1e-10, 1.0}.steps()), std::invalid_argument); // > 2^26 steps
}

TEST_CASE("grid processes index times exactly") {
    GridProcess p;
    p.dt = 0.25;
    p.values = {0.0, 1.0, 2.0, 3.0, 4.0};
    CHECK(p.T() == 1.0);
    CHECK(p.index_of(0.0) == 0);
    CHECK(p.index_of(0.75) == 3);
    CHECK(p.at_time(1.0) == 4.0);
    CHECK_THROWS_AS(p.index_of(0.3), std::invalid_argument);  // off-grid
    CHECK_THROWS_AS(p.index_of(1.25), std::invalid_argument); // beyond T
}

TEST_CASE("path of the level-1 process accumulates standard normals") {
    const GridSpec spec{1.0 / 256.0, 1.0};
    const StreamKey key = derive_stream(12, "W:0", 5);
    const GridProcess b = brownian_path(spec, 1.0, key);
    REQUIRE(b.values.size() == 257);
    CHECK(b.values[0] == 0.0);
    // same accumulation, reconstructed through the per-index normal
    const double s = std::sqrt(spec.dt);
    double acc = 0.0;
    for (std::uint64_t k = 0; k < 256; ++k) {
        acc += s * standard_normal(key, k);
        CHECK(b.values[k + 1] == acc);
    }
    CHECK_THROWS_AS(brownian_path(spec, 0.0, key), std::invalid_argument);
}

TEST_CASE("level-1 increments have the requested rate") {
    const GridSpec spec{1.0 / 1024.0, 1.0};
    double sq = 0.0;
    const std::size_t reps = 64;
    for (std::size_t r = 0; r < reps; ++r) {
        const GridProcess b = brownian_path(spec, 2.0, derive_stream(900, "W:0", r));
        for (std::size_t k = 0; k + 1 < b.values.size(); ++k) {
            const double d = b.values[k + 1] - b.values[k];
            sq += d * d;
        }
    }
    // pooled quadratic variation: E = rate * T per path
    CHECK(sq / static_cast<double>(reps) == Catch::Approx(2.0).epsilon(0.01));
}

TEST_CASE("binning maps values to half-open cells") {
    CHECK(bin_of(0.0, 0.5) == 0);
    CHECK(bin_of(0.49, 0.5) == 0);
    CHECK(bin_of(0.5, 0.5) == 1);
    CHECK(bin_of(-0.01, 0.5) == -1);
    CHECK(bin_of(-0.5, 0.5) == -1);
    CHECK(bin_of(-0.51, 0.5) == -2);
    CHECK(bin_of(0.3, 0.5, 0.25) == 0);
    CHECK(bin_of(0.2, 0.5, 0.25) == -1);
}

TEST_CASE("occupation field: identity, prefix counting, out-of-range bins") {
    const GridSpec spec{1.0 / 512.0, 1.0};
    const GridProcess b = brownian_path(spec, 1.0, derive_stream(7, "W:0", 0));
    const double h = 0.125;
    const std::vector<double> times = {0.25, 0.5, 1.0};
    const LocalTimeField f = grid_local_time(b, h, times);
    REQUIRE(f.rows.size() == 3);

    // sum_j L(t, j) h = t, exactly, at every requested time
    for (std::size_t i = 0; i < 3; ++i) {
        double mass = 0.0;
        for (double v : f.rows[i]) mass += v * h;
        CHECK(mass == Catch::Approx(times[i]).epsilon(1e-12));
    }

    // direct recount of the first prefix
    const std::uint64_t kstop = 128;
    std::vector<std::int64_t> bins;
    for (std::uint64_t k = 0; k < kstop; ++k) bins.push_back(bin_of(b.values[k], h));
    for (std::int64_t j = f.bin_lo - 2; j < f.bin_lo + static_cast<std::int64_t>(f.rows[0].size()) + 2; ++j) {
        std::uint64_t c = 0;
        for (std::int64_t bj : bins)
            if (bj == j) ++c;
        CHECK(f.value(0, j) == Catch::Approx(static_cast<double>(c) * spec.dt / h).margin(1e-15));
    }
    CHECK(f.value(1, 100000) == 0.0);
    CHECK(f.value(1, -100000) == 0.0);

    CHECK_THROWS_AS(grid_local_time(b, 0.0, {0.5}), std::invalid_argument);
    CHECK_THROWS_AS(grid_local_time(b, h, {}), std::invalid_argument);
    CHECK_THROWS_AS(grid_local_time(b, h, {0.5, 0.25}), std::invalid_argument);
    CHECK_THROWS_AS(grid_local_time(b, h, {0.3}), std::invalid_argument);
}

TEST_CASE("integrator increments are pure and bilateral") {
    const BilateralKeys keys = bilateral_streams(9, "W:1", 4);
    const IntegratorSpec gauss = IntegratorSpec::brownian(1.0);
    CHECK(integrator_increment(gauss, keys, 5, 0.25) == integrator_increment(gauss, keys, 5, 0.25));
    // negative bins draw from the negative stream: bin -1-j mirrors j
    CHECK(integrator_increment(gauss, keys, -1, 0.25) ==
          std::sqrt(0.25) * normal_from_pair(keys.neg, 0));
    CHECK(integrator_increment(gauss, keys, 3, 0.25) ==
          std::sqrt(0.25) * normal_from_pair(keys.pos, 3));
    // distinct labels give distinct fields
    const BilateralKeys other = bilateral_streams(9, "W:2", 4);
    CHECK(integrator_increment(gauss, keys, 0, 0.25) != integrator_increment(gauss, other, 0, 0.25));
}

TEST_CASE("beta = 2 stable integrator equals the Gaussian one bit for bit") {
    const BilateralKeys keys = bilateral_streams(21, "W:1", 0);
    const IntegratorSpec gauss = IntegratorSpec::brownian(0.5);
    const IntegratorSpec stab = IntegratorSpec::stable_law(StableParams{2.0, 0.5, 0.0});
    for (std::int64_t j = -64; j <= 64; ++j)
        CHECK(integrator_increment(stab, keys, j, 0.125) == integrator_increment(gauss, keys, j, 0.125));
}

TEST_CASE("levy integral of a frozen field has conditional variance sum L^2 h") {
    const GridSpec spec{1.0 / 512.0, 1.0};
    const GridProcess b = brownian_path(spec, 1.0, derive_stream(33, "W:0", 0));
    const double h = 0.25;
    const LocalTimeField f = grid_local_time(b, h, {1.0});
    double l2h = 0.0;
    for (double v : f.rows[0]) l2h += v * v * h;

    const IntegratorSpec gauss = IntegratorSpec::brownian(1.0);
    const std::size_t reps = 4000;
    double sq = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
        const double x = levy_integral(f, 0, gauss, bilateral_streams(33, "W:1", r));
        sq += x * x;
    }
    const double mc = sq / static_cast<double>(reps);
    // chi-square mean with 4000 draws: 4 sigma is about 9% relative
    CHECK(mc == Catch::Approx(l2h).epsilon(0.09));
}

TEST_CASE("tower levels: sizes, purity, level-1 equality") {
    const GridSpec spec{1.0 / 1024.0, 1.0};
    const std::vector<double> hs = {default_bin_width(1, spec.dt), default_bin_width(2, spec.dt)};
    const auto levels = xi_tower(3, spec, hs, 51, 2);
    REQUIRE(levels.size() == 3);
    for (const auto& lv : levels) {
        CHECK(lv.values.size() == 1025);
        CHECK(lv.values[0] == 0.0);
        CHECK(lv.dt == spec.dt);
    }
    const auto again = xi_tower(3, spec, hs, 51, 2);
    for (int q = 0; q < 3; ++q) CHECK(levels[q].values == again[q].values);

    const GridProcess b = brownian_path(spec, 1.0, derive_stream(51, "W:0", 2));
    CHECK(levels[0].values == b.values);

    CHECK_THROWS_AS(xi_tower(0, spec, hs, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(xi_tower(6, spec, hs, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(xi_tower(3, spec, {0.1}, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(xi_tower(3, spec, {0.1, -0.1}, 1, 0), std::invalid_argument);
}

TEST_CASE("level integration telescopes the occupation sum") {
    const GridSpec spec{1.0 / 2048.0, 1.0};
    const GridProcess b = brownian_path(spec, 1.0, derive_stream(77, "W:0", 1));
    const double h = default_bin_width(1, spec.dt);
    const auto levels = xi_tower(2, spec, {h}, 77, 1);
    // the level-2 endpoint is sum_j L(1, j) (dt/h) dU_j; recompute through
    // the one-shot field + integral route (different summation order)
    const LocalTimeField f = grid_local_time(b, h, {0.5, 1.0});
    const BilateralKeys keys = bilateral_streams(77, "W:1", 1);
    const double direct = levy_integral(f, 1, IntegratorSpec::brownian(1.0), keys);
    CHECK(levels[1].values.back() == Catch::Approx(direct).epsilon(1e-9).margin(1e-10));
    const double mid = levy_integral(f, 0, IntegratorSpec::brownian(1.0), keys);
    CHECK(levels[1].at_time(0.5) == Catch::Approx(mid).epsilon(1e-9).margin(1e-10));
}

TEST_CASE("level-2 shortcut and level-3 with a beta = 2 top agree with the tower") {
    const GridSpec spec{1.0 / 1024.0, 1.0};
    const double h1 = default_bin_width(1, spec.dt), h2 = default_bin_width(2, spec.dt);
    const auto levels = xi_tower(3, spec, {h1, h2}, 13, 0);

    const GridProcess d = delta_process(spec, h1, 13, 0);
    CHECK(d.values == levels[1].values);

    // sigma = 1/sqrt(2) makes the stable top a rate-1 Gaussian up to one
    // ulp in 2 sigma^2; paths agree to floating-point, not bitwise
    const GridProcess g = gamma_process(spec, h1, h2, StableParams{2.0, 0.70710678118654752440, 0.0}, 13, 0);
    REQUIRE(g.values.size() == levels[2].values.size());
    double scale = 0.0;
    for (double v : levels[2].values) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < g.values.size(); ++k)
        CHECK(std::abs(g.values[k] - levels[2].values[k]) <= 1e-12 * scale);
}

TEST_CASE("default bin widths follow the level exponents") {
    const double dt = 1.0 / 4096.0;
    CHECK(default_bin_width(1, dt) == Catch::Approx(std::sqrt(dt)).epsilon(1e-14));
    CHECK(default_bin_width(2, dt) == Catch::Approx(std::pow(dt, 0.75)).epsilon(1e-14));
    CHECK(default_bin_width(3, dt) == Catch::Approx(std::pow(dt, 0.625)).epsilon(1e-14));
    CHECK(default_bin_width(2, dt, 0.5) == Catch::Approx(0.5 * std::pow(dt, 0.75)).epsilon(1e-14));
}

TEST_CASE("self-intersection functional: positivity, bounds, inverse moments") {
    const GridSpec spec{1.0 / 2048.0, 1.0};
    const double h = default_bin_width(1, spec.dt);
    for (std::uint64_t r = 0; r < 16; ++r) {
        const double v = brownian_sil_once(spec, h, 5, r);
        CHECK(v > 0.0);
        // Cauchy-Schwarz: T = sum L h <= sqrt(V) sqrt(nbins h), and the
        // occupied width is far below 2 sup|B| + 2h <= 10 for these paths
        CHECK(v >= 1.0 / 10.0);
    }
    const SelfIntersectionEstimate e = inv_sqrt_sil(spec, h, 400, 5);
    CHECK(e.replicas == 400);
    CHECK(e.mean_v > 0.5);
    CHECK(e.mean_v < 2.0);
    CHECK(e.mean_inv_sqrt > 0.7);
    CHECK(e.mean_inv_sqrt < 1.5);
    CHECK(e.se_v > 0.0);
    CHECK(e.se_inv_sqrt > 0.0);
    // Jensen, both ways: E[V^-1/2] >= E[V]^-1/2
    CHECK(e.mean_inv_sqrt >= 1.0 / std::sqrt(e.mean_v));
    CHECK_THROWS_AS(inv_sqrt_sil(spec, h, 1, 5), std::invalid_argument);
}

TEST_CASE("grid samplers honour the requested harvest times") {
    const double dt = 1.0 / 512.0;
    const GridSampler s = make_tower_level_sampler(2, dt, {default_bin_width(1, dt)}, 61, 0);
    const std::vector<double> ts = {0.25, 1.0};
    const std::vector<double> a = s(4, ts), b = s(4, ts);
    REQUIRE(a.size() == 2);
    CHECK(a == b);
    const GridProcess full = delta_process(GridSpec{dt, 1.0}, default_bin_width(1, dt), 61, 4);
    CHECK(a[0] == full.at_time(0.25));
    CHECK(a[1] == full.at_time(1.0));
}

TEST_CASE("self-similarity gate accepts the level-1 exponent and rejects a wrong one") {
    const double dt = 1.0 / 512.0;
    const GridSampler brown = [dt](std::uint64_t r, const std::vector<double>& ts) {
        const GridProcess b = brownian_path(GridSpec{dt, ts.back()}, 1.0, derive_stream(501, "W:0", r));
        std::vector<double> out;
        for (double t : ts) out.push_back(b.at_time(t));
        return out;
    };
    const SelfSimilarityReport ok = self_similarity_check(brown, 0.5, 0.25, 4.0, 3000, 1e-3);
    CHECK(ok.ks.pass);
    const SelfSimilarityReport bad = self_similarity_check(brown, 0.9, 0.25, 4.0, 3000, 1e-3);
    CHECK_FALSE(bad.ks.pass);
}

TEST_CASE("stationary-increment gate on the level-1 process") {
    const double dt = 1.0 / 512.0;
    const GridSampler brown = [dt](std::uint64_t r, const std::vector<double>& ts) {
        const GridProcess b = brownian_path(GridSpec{dt, ts.back()}, 1.0, derive_stream(502, "W:0", r));
        std::vector<double> out;
        for (double t : ts) out.push_back(b.at_time(t));
        return out;
    };
    const GridStationarityReport rep = stationary_increment_check(brown, 0.5, 0.5, 3000, 1e-3);
    CHECK(rep.ks.pass);
}
