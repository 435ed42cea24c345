#pragma once

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "scenery.hpp"

// Lattice walks and their iterated companions.  A depth-p tower is the
// recursion
//     level 1:   Z_k = Z_{k-1} + eta_k                (a mean-zero walk)
//     level q+1: W_k = W_{k-1} + xi^(q)(level q at k-1)
// where each xi^(q) is a frozen scenery.  Level 2 is the classic random
// walk in random scenery; deeper levels re-feed the previous level as the
// index process.  All intermediate levels must be integer lattice walks;
// the final scenery may be real-valued.

namespace rwrs {

using LatticePath = std::vector<std::int64_t>;
using RealPath = std::vector<double>;

inline constexpr int kMaxTowerDepth = 5;
inline constexpr std::uint64_t kMaxMaterializedSteps = 1ull << 22;
inline constexpr std::uint64_t kMaxHorizon = 1ull << 31;

struct TowerConfig {
    SceneryDist step = SceneryDist::rademacher();       // level-1 increments
    std::vector<SceneryDist> sceneries;                 // xi^(1..p-1)
    std::uint64_t master = 0;
    std::uint64_t replica = 0;
    bool allow_uncentered = false;                      // test override only
};

inline void validate_tower(int depth, const TowerConfig& cfg) {
    if (depth < 1 || depth > kMaxTowerDepth)
        throw std::invalid_argument("tower depth must lie in [1," + std::to_string(kMaxTowerDepth) + "]");
    if (static_cast<int>(cfg.sceneries.size()) < depth - 1)
        throw std::invalid_argument("tower depth " + std::to_string(depth) + " needs " +
                                    std::to_string(depth - 1) + " sceneries");
    cfg.step.validate();
    if (!cfg.step.integer_valued())
        throw std::invalid_argument("level-1 step distribution must be integer-valued");
    if (!cfg.allow_uncentered && !cfg.step.centered())
        throw std::invalid_argument("level-1 step distribution must have exact mean zero");
    for (int q = 1; q <= depth - 1; ++q) {
        const SceneryDist& d = cfg.sceneries[static_cast<std::size_t>(q - 1)];
        d.validate();
        const bool final_level = (q == depth - 1);
        if (!final_level && !d.integer_valued())
            throw std::invalid_argument("scenery " + std::to_string(q) +
                                        " drives an intermediate level and must be integer-valued");
        if (!cfg.allow_uncentered && !d.centered())
            throw std::invalid_argument("scenery " + std::to_string(q) + " must be centered");
    }
}

namespace detail {

// Per-step sampler for integer step laws (time-indexed, one word per step
// for finite supports; one bit per step, batched 64 per word, for signs).
struct StepSampler {
    bool rademacher = true;
    std::vector<std::pair<double, std::int64_t>> cdf;

    explicit StepSampler(const SceneryDist& d) {
        rademacher = (d.kind == SceneryKind::rademacher);
        if (!rademacher) {
            double acc = 0.0;
            for (const auto& [v, p] : d.support) {
                acc += p.to_double();
                cdf.emplace_back(acc, v);
            }
            cdf.back().first = 1.0;
        }
    }

    std::int64_t draw(const StreamKey& s, std::uint64_t k, std::uint64_t& bit_cache) const {
        if (rademacher) {
            if ((k & 63) == 0) bit_cache = s.word(k >> 6);
            return ((bit_cache >> (k & 63)) & 1) ? 1 : -1;
        }
        const double u = unit_open(s.word(k));
        for (const auto& [cut, v] : cdf)
            if (u <= cut) return v;
        return cdf.back().second;
    }
};

} // namespace detail

// Stream the tower one step at a time without materializing paths.
// After step k (k = 1..n) the sink is invoked as
//     sink(k, lv, top)
// where lv[q] is the integer value of level q (q = 1..depth, or 1..depth-1
// when the final scenery is real-valued) and `top` is the value of the
// final level as a double in either case.
template <class Sink>
inline void run_tower(int depth, std::uint64_t n, const TowerConfig& cfg, Sink&& sink) {
    validate_tower(depth, cfg);
    if (n > kMaxHorizon) throw std::invalid_argument("horizon exceeds 2^31");

    const StreamKey eta = derive_stream(cfg.master, "eta", cfg.replica);
    const detail::StepSampler step(cfg.step);

    std::vector<Scenery> xi;
    xi.reserve(static_cast<std::size_t>(depth > 0 ? depth - 1 : 0));
    for (int q = 1; q <= depth - 1; ++q)
        xi.emplace_back(cfg.sceneries[static_cast<std::size_t>(q - 1)],
                        derive_stream(cfg.master, "xi:" + std::to_string(q), cfg.replica));

    const bool real_top = depth >= 2 && !cfg.sceneries[static_cast<std::size_t>(depth - 2)].integer_valued();
    const int int_levels = real_top ? depth - 1 : depth;

    // Hoisted per-level fast-path data: a rademacher scenery read is a
    // single mix of the zigzagged site.
    bool rad[kMaxTowerDepth + 1] = {};
    std::uint64_t radkey[kMaxTowerDepth + 1] = {};
    for (int q = 2; q <= int_levels; ++q) {
        const Scenery& sc = xi[static_cast<std::size_t>(q - 2)];
        rad[q] = sc.dist().kind == SceneryKind::rademacher;
        radkey[q] = sc.stream().key;
    }

    std::int64_t pos[kMaxTowerDepth + 1] = {};
    std::int64_t inc[kMaxTowerDepth + 1] = {};
    double top = 0.0;
    std::uint64_t bit_cache = 0;

    for (std::uint64_t k = 0; k < n; ++k) {
        inc[1] = step.draw(eta, k, bit_cache);
        for (int q = 2; q <= int_levels; ++q) {
            if (rad[q]) {
                const std::uint64_t w =
                    mix64(radkey[q] + ((zigzag(pos[q - 1]) << 2) + 1) * kGolden);
                inc[q] = (w >> 63) ? 1 : -1;
            } else {
                inc[q] = xi[static_cast<std::size_t>(q - 2)].at_int(pos[q - 1]);
            }
        }
        double top_inc = 0.0;
        if (real_top) top_inc = xi[static_cast<std::size_t>(depth - 2)].at_real(pos[depth - 1]);
        for (int q = 1; q <= int_levels; ++q) pos[q] += inc[q];
        if (real_top) top += top_inc;
        sink(k + 1, pos, real_top ? top : static_cast<double>(pos[depth]));
    }
}

// Materialized tower: integer paths for levels 1..p (or 1..p-1 plus a real
// final path when the last scenery is real-valued).  Paths have n+1 entries
// including the origin.
struct TowerPath {
    int depth = 0;
    std::vector<LatticePath> int_levels;
    RealPath real_top; // empty unless the final scenery is real-valued

    bool has_real_top() const { return !real_top.empty(); }
};

inline TowerPath simulate_tower(int depth, std::uint64_t n, const TowerConfig& cfg) {
    if (n > kMaxMaterializedSteps)
        throw std::invalid_argument("materialized paths capped at 2^22 steps; use the streaming runner");
    validate_tower(depth, cfg);
    const bool real_top = depth >= 2 && !cfg.sceneries[static_cast<std::size_t>(depth - 2)].integer_valued();
    const int int_levels_count = real_top ? depth - 1 : depth;

    TowerPath tw;
    tw.depth = depth;
    tw.int_levels.assign(static_cast<std::size_t>(int_levels_count), LatticePath(n + 1, 0));
    if (real_top) tw.real_top.assign(n + 1, 0.0);

    run_tower(depth, n, cfg, [&](std::uint64_t k, const std::int64_t* lv, double top) {
        for (int q = 1; q <= int_levels_count; ++q)
            tw.int_levels[static_cast<std::size_t>(q - 1)][k] = lv[q];
        if (real_top) tw.real_top[k] = top;
    });
    return tw;
}

// Level-1 walk on its own.
inline LatticePath simulate_srw(std::uint64_t n, const SceneryDist& step, const StreamKey& key,
                                bool allow_uncentered = false) {
    step.validate();
    if (!step.integer_valued())
        throw std::invalid_argument("simulate_srw: step distribution must be integer-valued");
    if (!allow_uncentered && !step.centered())
        throw std::invalid_argument("simulate_srw: step distribution must have exact mean zero");
    if (n > kMaxMaterializedSteps)
        throw std::invalid_argument("materialized paths capped at 2^22 steps; use the streaming runner");
    const detail::StepSampler sampler(step);
    LatticePath path(n + 1, 0);
    std::uint64_t cache = 0;
    std::int64_t z = 0;
    for (std::uint64_t k = 0; k < n; ++k) {
        z += sampler.draw(key, k, cache);
        path[k + 1] = z;
    }
    return path;
}

inline LatticePath simulate_srw(std::uint64_t n, const TowerConfig& cfg) {
    return simulate_srw(n, cfg.step, derive_stream(cfg.master, "eta", cfg.replica), cfg.allow_uncentered);
}

// ---------------------------------------------------------------------------
// 3D randomly oriented walks.

struct Path3D {
    LatticePath x, y, z; // n+1 entries each
};

struct Oriented3DConfig {
    SceneryDist step = SceneryDist::rademacher();   // vertical increments
    SceneryDist xi1 = SceneryDist::rademacher();    // scenery read along z
    SceneryDist xi2 = SceneryDist::rademacher();    // scenery read along x
    std::uint64_t master = 0;
    std::uint64_t replica = 0;
};

inline void validate_oriented(const Oriented3DConfig& cfg) {
    for (const SceneryDist* d : {&cfg.step, &cfg.xi1, &cfg.xi2}) {
        d->validate();
        if (!d->integer_valued() || !d->centered())
            throw std::invalid_argument("oriented 3D walks need integer-valued centered distributions");
    }
}

// Full-step model: every step moves all three coordinates,
//   dz = eta_k,  dx = xi1(z before the step),  dy = xi2(x before the step).
// The (z, x, y) triple follows the same law as tower levels (1, 2, 3) and
// shares its stream labels, so the paths coincide replica by replica.
inline Path3D simulate_oriented3d(std::uint64_t n, const Oriented3DConfig& cfg) {
    validate_oriented(cfg);
    if (n > kMaxMaterializedSteps)
        throw std::invalid_argument("materialized paths capped at 2^22 steps");
    const StreamKey eta = derive_stream(cfg.master, "eta", cfg.replica);
    const Scenery s1(cfg.xi1, derive_stream(cfg.master, "xi:1", cfg.replica));
    const Scenery s2(cfg.xi2, derive_stream(cfg.master, "xi:2", cfg.replica));
    const detail::StepSampler step(cfg.step);

    Path3D p;
    p.x.assign(n + 1, 0);
    p.y.assign(n + 1, 0);
    p.z.assign(n + 1, 0);
    std::int64_t x = 0, y = 0, z = 0;
    std::uint64_t cache = 0;
    for (std::uint64_t k = 0; k < n; ++k) {
        const std::int64_t dz = step.draw(eta, k, cache);
        const std::int64_t dx = s1.at_int(z);
        const std::int64_t dy = s2.at_int(x);
        z += dz; x += dx; y += dy;
        p.x[k + 1] = x; p.y[k + 1] = y; p.z[k + 1] = z;
    }
    return p;
}

// Nearest-neighbour variant: one coordinate moves per step,
//   (0,0,+1), (0,0,-1) each with probability 1/4,
//   (xi1(z),0,0) with probability 1/4, (0,xi2(x),0) with probability 1/4.
// The vertical coordinate then has Var(z_n) = n/2.
inline Path3D simulate_nn3d(std::uint64_t n, const Oriented3DConfig& cfg) {
    validate_oriented(cfg);
    if (n > kMaxMaterializedSteps)
        throw std::invalid_argument("materialized paths capped at 2^22 steps");
    const StreamKey dir = derive_stream(cfg.master, "dir", cfg.replica);
    const Scenery s1(cfg.xi1, derive_stream(cfg.master, "xi:1", cfg.replica));
    const Scenery s2(cfg.xi2, derive_stream(cfg.master, "xi:2", cfg.replica));

    Path3D p;
    p.x.assign(n + 1, 0);
    p.y.assign(n + 1, 0);
    p.z.assign(n + 1, 0);
    std::int64_t x = 0, y = 0, z = 0;
    std::uint64_t cache = 0;
    for (std::uint64_t k = 0; k < n; ++k) {
        if ((k & 31) == 0) cache = dir.word(k >> 5);
        switch ((cache >> ((k & 31) * 2)) & 3) {
            case 0: z += 1; break;
            case 1: z -= 1; break;
            case 2: x += s1.at_int(z); break;
            case 3: y += s2.at_int(x); break;
        }
        p.x[k + 1] = x; p.y[k + 1] = y; p.z[k + 1] = z;
    }
    return p;
}

// ---------------------------------------------------------------------------
// Model variants around the oriented walk.

enum class VariantKind {
    twin_level2,        // two scenery sums read along the same vertical walk
    level2_driven_by_z, // (y,z) plane walk; x reads a scenery along z
    level2_driven_by_y, // (y,z) plane walk; x reads a scenery along y
    level2_driven_by_2d // (y,z) plane walk; x reads a plane-indexed scenery
};

inline const char* to_string(VariantKind k) {
    switch (k) {
        case VariantKind::twin_level2: return "twin_level2";
        case VariantKind::level2_driven_by_z: return "level2_driven_by_z";
        case VariantKind::level2_driven_by_y: return "level2_driven_by_y";
        case VariantKind::level2_driven_by_2d: return "level2_driven_by_2d";
    }
    return "?";
}

inline VariantKind variant_from_string(const std::string& s) {
    if (s == "twin_level2") return VariantKind::twin_level2;
    if (s == "level2_driven_by_z") return VariantKind::level2_driven_by_z;
    if (s == "level2_driven_by_y") return VariantKind::level2_driven_by_y;
    if (s == "level2_driven_by_2d") return VariantKind::level2_driven_by_2d;
    throw std::invalid_argument("unknown variant: " + s);
}

struct VariantConfig {
    SceneryDist scenery = SceneryDist::rademacher();
    std::uint64_t master = 0;
    std::uint64_t replica = 0;
};

// twin_level2: x and y accumulate two independent sceneries read at the same
// vertical position; their cross-covariance vanishes exactly.
// The plane-walk variants move (y,z) by independent signs each step and
// accumulate x from a scenery indexed by z, by y, or by the pair (y,z).
inline Path3D simulate_variant(VariantKind kind, std::uint64_t n, const VariantConfig& cfg) {
    cfg.scenery.validate();
    if (!cfg.scenery.integer_valued() || !cfg.scenery.centered())
        throw std::invalid_argument("variant sceneries must be integer-valued and centered");
    if (n > kMaxMaterializedSteps)
        throw std::invalid_argument("materialized paths capped at 2^22 steps");

    Path3D p;
    p.x.assign(n + 1, 0);
    p.y.assign(n + 1, 0);
    p.z.assign(n + 1, 0);
    std::int64_t x = 0, y = 0, z = 0;

    if (kind == VariantKind::twin_level2) {
        const StreamKey eta = derive_stream(cfg.master, "eta", cfg.replica);
        const Scenery sa(cfg.scenery, derive_stream(cfg.master, "xi:1", cfg.replica));
        const Scenery sb(cfg.scenery, derive_stream(cfg.master, "xi:2", cfg.replica));
        const detail::StepSampler step(SceneryDist::rademacher());
        std::uint64_t cache = 0;
        for (std::uint64_t k = 0; k < n; ++k) {
            const std::int64_t dx = sa.at_int(z);
            const std::int64_t dy = sb.at_int(z);
            z += step.draw(eta, k, cache);
            x += dx; y += dy;
            p.x[k + 1] = x; p.y[k + 1] = y; p.z[k + 1] = z;
        }
        return p;
    }

    const StreamKey ey = derive_stream(cfg.master, "eta:y", cfg.replica);
    const StreamKey ez = derive_stream(cfg.master, "eta:z", cfg.replica);
    const Scenery sc(cfg.scenery, derive_stream(
        cfg.master, kind == VariantKind::level2_driven_by_2d ? "xi:2d" : "xi:1", cfg.replica));
    const detail::StepSampler step(SceneryDist::rademacher());
    std::uint64_t cy = 0, cz = 0;
    for (std::uint64_t k = 0; k < n; ++k) {
        std::int64_t dx = 0;
        switch (kind) {
            case VariantKind::level2_driven_by_z: dx = sc.at_int(z); break;
            case VariantKind::level2_driven_by_y: dx = sc.at_int(y); break;
            case VariantKind::level2_driven_by_2d: dx = sc.at_int_2d(y, z); break;
            default: break;
        }
        y += step.draw(ey, k, cy);
        z += step.draw(ez, k, cz);
        x += dx;
        p.x[k + 1] = x; p.y[k + 1] = y; p.z[k + 1] = z;
    }
    return p;
}

// ---------------------------------------------------------------------------
// Local time and self-intersections.

// Visit counts of path[0..n-1] (the first n states, origin included).
// Dense storage over [min,max] when the occupied range is comparable to n,
// hash storage otherwise.  Total count is exactly n.
class LocalTimeTable {
public:
    LocalTimeTable() = default;

    static LocalTimeTable from_path(const LatticePath& path, std::uint64_t n) {
        if (n > path.size())
            throw std::invalid_argument("local_time: n exceeds path length");
        LocalTimeTable t;
        t.total_ = n;
        if (n == 0) return t;
        std::int64_t lo = path[0], hi = path[0];
        for (std::uint64_t k = 0; k < n; ++k) {
            lo = std::min(lo, path[k]);
            hi = std::max(hi, path[k]);
        }
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
        if (range <= std::max<std::uint64_t>(4 * n, 1024)) {
            t.dense_ = true;
            t.lo_ = lo;
            t.counts_.assign(range, 0);
            for (std::uint64_t k = 0; k < n; ++k)
                ++t.counts_[static_cast<std::size_t>(path[k] - lo)];
        } else {
            t.dense_ = false;
            for (std::uint64_t k = 0; k < n; ++k) ++t.sparse_[path[k]];
        }
        return t;
    }

    std::uint64_t count(std::int64_t site) const {
        if (dense_) {
            if (counts_.empty() || site < lo_ ||
                site >= lo_ + static_cast<std::int64_t>(counts_.size()))
                return 0;
            return counts_[static_cast<std::size_t>(site - lo_)];
        }
        auto it = sparse_.find(site);
        return it == sparse_.end() ? 0 : it->second;
    }

    std::uint64_t total() const { return total_; }

    // Visit sites in ascending order; f(site, count), zero counts skipped.
    template <class F>
    void for_each(F&& f) const {
        if (dense_) {
            for (std::size_t i = 0; i < counts_.size(); ++i)
                if (counts_[i]) f(lo_ + static_cast<std::int64_t>(i), counts_[i]);
        } else {
            std::vector<std::pair<std::int64_t, std::uint64_t>> v(sparse_.begin(), sparse_.end());
            std::sort(v.begin(), v.end());
            for (const auto& [s, c] : v) f(s, c);
        }
    }

private:
    bool dense_ = true;
    std::int64_t lo_ = 0;
    std::vector<std::uint64_t> counts_;
    std::unordered_map<std::int64_t, std::uint64_t> sparse_;
    std::uint64_t total_ = 0;
};

inline LocalTimeTable local_time(const LatticePath& path, std::uint64_t n) {
    return LocalTimeTable::from_path(path, n);
}

// Number of self-intersection pairs sum_x N(x)^2 = #{(k,l) < n : X_k = X_l}.
inline std::uint64_t self_intersection(const LocalTimeTable& t) {
    std::uint64_t v = 0;
    t.for_each([&](std::int64_t, std::uint64_t c) { v += c * c; });
    return v;
}

// Rescaled occupation at one space-time point:
//   n^(alpha-1) * #{ 1 <= k <= floor(n t) : path_k = floor(n^alpha x) }.
inline double rescaled_local_time(const LatticePath& path, std::uint64_t n, double t, double x,
                                  double alpha) {
    if (!(t >= 0.0)) throw std::invalid_argument("rescaled_local_time: t must be nonnegative");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("rescaled_local_time: alpha must lie in (0,1)");
    const double nn = static_cast<double>(n);
    const std::uint64_t kmax = static_cast<std::uint64_t>(std::floor(nn * t));
    if (kmax >= path.size())
        throw std::invalid_argument("rescaled_local_time: floor(n t) exceeds path length");
    const std::int64_t site = static_cast<std::int64_t>(std::floor(std::pow(nn, alpha) * x));
    std::uint64_t cnt = 0;
    for (std::uint64_t k = 1; k <= kmax; ++k)
        if (path[k] == site) ++cnt;
    return std::pow(nn, alpha - 1.0) * static_cast<double>(cnt);
}

// ---------------------------------------------------------------------------
// Lattice span of an integer step law: the finest arithmetic progression
// a + dZ supporting the one-step distribution, after first dividing out the
// gcd d0 of the support itself.  Once d0 is divided out, a and d are
// automatically coprime: any common divisor of a and d divides every
// support point, hence divides the reduced gcd 1.
struct LatticeSpan {
    std::int64_t d0 = 1; // gcd of the raw support
    std::int64_t d = 1;  // span of the reduced walk
    std::int64_t a = 0;  // offset, normalized into [0, d)
};

inline LatticeSpan lattice_span(const SceneryDist& dist) {
    std::vector<std::int64_t> sup;
    if (dist.kind == SceneryKind::rademacher) {
        sup = {-1, 1};
    } else if (dist.kind == SceneryKind::finite_int) {
        for (const auto& [v, p] : dist.support) {
            (void)p;
            sup.push_back(v);
        }
    } else {
        throw std::invalid_argument("lattice_span: distribution is not lattice-valued");
    }
    if (sup.size() < 2)
        throw std::invalid_argument("lattice_span: single-point support has no maximal span");

    std::int64_t d0 = 0;
    for (std::int64_t v : sup) d0 = std::gcd(d0, v < 0 ? -v : v);
    if (d0 == 0)
        throw std::invalid_argument("lattice_span: support is {0}");

    std::vector<std::int64_t> red;
    red.reserve(sup.size());
    for (std::int64_t v : sup) red.push_back(v / d0);

    std::int64_t d = 0;
    for (std::size_t i = 1; i < red.size(); ++i) {
        std::int64_t diff = red[i] - red[0];
        d = std::gcd(d, diff < 0 ? -diff : diff);
    }
    if (d == 0) throw std::logic_error("lattice_span: degenerate reduced support");

    std::int64_t a = red[0] % d;
    if (a < 0) a += d;

    LatticeSpan s;
    s.d0 = d0;
    s.d = d;
    s.a = a;
    if (std::gcd(s.a, s.d) != 1) // gcd(0,1) = 1 covers the aperiodic a = 0 case
        throw std::logic_error("lattice_span: offset and span failed to reduce coprime");
    return s;
}

} // namespace rwrs
