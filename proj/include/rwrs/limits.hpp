#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "parallel.hpp"
#include "rng.hpp"
#include "stats.hpp"

// Continuum-limit machinery on a uniform time grid: Brownian paths, their
// binned occupation densities, and iterated stochastic integrals
//     level 1:   B
//     level q+1: X_t = sum_j L^(q)(t, x_j) dU_j
// where L^(q) is the binned local time of level q and dU has independent
// increments over spatial bins (Gaussian, or strictly stable).  Each bin's
// increment is a pure function of (stream, bin index), so the integrator
// field is frozen per path: all times t see the same realization.

namespace rwrs {

struct GridSpec {
    double dt = 1.0 / 16384.0;
    double T = 1.0;

    std::uint64_t steps() const {
        const double s = T / dt;
        const double r = std::round(s);
        if (!(dt > 0.0) || !(T > 0.0) || std::abs(s - r) > 1e-9 * std::max(1.0, s) || r < 1.0)
            throw std::invalid_argument("GridSpec: T must be a positive multiple of dt");
        if (r > static_cast<double>(1ull << 26))
            throw std::invalid_argument("GridSpec: more than 2^26 steps");
        return static_cast<std::uint64_t>(r);
    }
};

struct GridProcess {
    double dt = 0.0;
    std::vector<double> values; // values[k] at time k*dt, size steps+1

    double T() const { return dt * static_cast<double>(values.size() - 1); }

    std::uint64_t index_of(double t) const {
        const double s = t / dt;
        const double r = std::round(s);
        if (std::abs(s - r) > 1e-9 * std::max(1.0, s) || r < 0.0 ||
            r >= static_cast<double>(values.size()))
            throw std::invalid_argument("GridProcess: time is not on the grid");
        return static_cast<std::uint64_t>(r);
    }

    double at_time(double t) const { return values[index_of(t)]; }
};

// Steps k = 2m, 2m+1 take the cosine/sine outputs of one Box-Muller
// transform, exactly as standard_normal(key, k) would, at half the libm
// traffic.
inline GridProcess brownian_path(const GridSpec& spec, double rate, const StreamKey& key) {
    if (!(rate > 0.0)) throw std::invalid_argument("brownian_path: rate must be positive");
    const std::uint64_t n = spec.steps();
    GridProcess p;
    p.dt = spec.dt;
    p.values.assign(n + 1, 0.0);
    const double s = std::sqrt(rate * spec.dt);
    double v = 0.0;
    for (std::uint64_t k = 0; k < n; k += 2) {
        const double u1 = unit_open(key.word(k));
        const double u2 = unit_open(key.word(k + 1));
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        v += s * (r * std::cos(a));
        p.values[k + 1] = v;
        if (k + 1 < n) {
            v += s * (r * std::sin(a));
            p.values[k + 2] = v;
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// Binned occupation density.

// L(t, bin j) = (dt/h) * #{ k < t/dt : path value at k lies in bin j },
// bin j = [j h, (j+1) h).  Counting left endpoints makes the occupation
// identity exact: sum_j L(t, j) h = t for every grid time t.
struct LocalTimeField {
    double dt = 0.0;
    double h = 0.0;
    double origin = 0.0;
    std::vector<double> times;
    std::int64_t bin_lo = 0;
    std::vector<std::vector<double>> rows; // rows[i][j - bin_lo] = L(times[i], j)

    double value(std::size_t time_index, std::int64_t bin) const {
        const auto& row = rows.at(time_index);
        const std::int64_t i = bin - bin_lo;
        if (i < 0 || i >= static_cast<std::int64_t>(row.size())) return 0.0;
        return row[static_cast<std::size_t>(i)];
    }
};

inline std::int64_t bin_of(double v, double h, double origin = 0.0) {
    return static_cast<std::int64_t>(std::floor((v - origin) / h));
}

inline LocalTimeField grid_local_time(const GridProcess& p, double h, std::vector<double> times,
                                      double origin = 0.0) {
    if (!(h > 0.0)) throw std::invalid_argument("grid_local_time: h must be positive");
    if (times.empty()) throw std::invalid_argument("grid_local_time: no times requested");
    if (!std::is_sorted(times.begin(), times.end()))
        throw std::invalid_argument("grid_local_time: times must be ascending");

    std::vector<std::uint64_t> stops;
    stops.reserve(times.size());
    for (double t : times) stops.push_back(p.index_of(t));

    // occupied bin range over the whole path prefix
    const std::uint64_t last = stops.back();
    std::int64_t lo = bin_of(p.values[0], h, origin), hi = lo;
    for (std::uint64_t k = 0; k < last; ++k) {
        const std::int64_t b = bin_of(p.values[k], h, origin);
        lo = std::min(lo, b);
        hi = std::max(hi, b);
    }

    LocalTimeField f;
    f.dt = p.dt;
    f.h = h;
    f.origin = origin;
    f.times = std::move(times);
    f.bin_lo = lo;
    const std::size_t width = static_cast<std::size_t>(hi - lo + 1);

    std::vector<std::uint64_t> counts(width, 0);
    const double scale = p.dt / h;
    std::size_t next = 0;
    std::uint64_t k = 0;
    while (next < stops.size()) {
        for (; k < stops[next]; ++k)
            ++counts[static_cast<std::size_t>(bin_of(p.values[k], h, origin) - lo)];
        std::vector<double> row(width, 0.0);
        for (std::size_t j = 0; j < width; ++j)
            row[j] = scale * static_cast<double>(counts[j]);
        f.rows.push_back(std::move(row));
        ++next;
    }
    return f;
}

// ---------------------------------------------------------------------------
// Frozen bilateral integrators.

struct IntegratorSpec {
    bool gaussian = true;
    double rate = 1.0;     // Gaussian: increment variance rate * h per bin
    StableParams stable;   // otherwise: increment h^(1/beta) * stable draw

    static IntegratorSpec brownian(double rate = 1.0) {
        IntegratorSpec s;
        s.gaussian = true;
        s.rate = rate;
        return s;
    }
    static IntegratorSpec stable_law(StableParams p) {
        IntegratorSpec s;
        s.gaussian = false;
        s.stable = p;
        return s;
    }
};

// Bins left and right of the origin draw from separate streams, so the two
// half-axes of the integrator are independent by construction.
struct BilateralKeys {
    StreamKey pos, neg;
};

inline BilateralKeys bilateral_streams(std::uint64_t master, const std::string& label,
                                       std::uint64_t replica) {
    return {derive_stream(master, label + ":pos", replica),
            derive_stream(master, label + ":neg", replica)};
}

// Increment of the integrator over bin j, width h.  Pure in (keys, j).
// Both branches consume the same word pair, and beta = 2 funnels through
// the Gaussian expression: a beta = 2 stable integrator whose 2 sigma^2
// evaluates to `rate` in double arithmetic agrees bit for bit with the
// Gaussian one.
inline double integrator_increment(const IntegratorSpec& spec, const BilateralKeys& keys,
                                   std::int64_t bin, double h) {
    const StreamKey& k = bin >= 0 ? keys.pos : keys.neg;
    const std::uint64_t idx = bin >= 0 ? static_cast<std::uint64_t>(bin)
                                       : static_cast<std::uint64_t>(-1 - bin);
    const double rate =
        spec.gaussian ? spec.rate : 2.0 * spec.stable.sigma * spec.stable.sigma;
    if (spec.gaussian || spec.stable.beta == 2.0)
        return std::sqrt(rate * h) * normal_from_pair(k, idx);
    return std::pow(h, 1.0 / spec.stable.beta) * sample_stable(spec.stable, k, idx);
}

// sum_j L(t, x_j) dU_j over the occupied bins at one stored time.
inline double levy_integral(const LocalTimeField& f, std::size_t time_index,
                            const IntegratorSpec& spec, const BilateralKeys& keys) {
    const auto& row = f.rows.at(time_index);
    double acc = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (row[i] == 0.0) continue;
        acc += row[i] * integrator_increment(spec, keys, f.bin_lo + static_cast<std::int64_t>(i), f.h);
    }
    return acc;
}

namespace detail {

// One integration level, full path: from level process P build
//   X_{k+1} = X_k + (dt/h) dU_{bin(P_k)},
// which telescopes to sum_j L(t,j) dU_j at every grid time simultaneously.
// The per-bin increments are materialized densely over the occupied range
// (cheap: the range is a few thousand bins) and looked up per step.
inline GridProcess integrate_level(const GridProcess& p, double h, const IntegratorSpec& spec,
                                   const BilateralKeys& keys) {
    const std::uint64_t n = p.values.size() - 1;
    std::int64_t lo = bin_of(p.values[0], h), hi = lo;
    for (std::uint64_t k = 0; k < n; ++k) {
        const std::int64_t b = bin_of(p.values[k], h);
        lo = std::min(lo, b);
        hi = std::max(hi, b);
    }
    std::vector<double> du(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t j = lo; j <= hi; ++j)
        du[static_cast<std::size_t>(j - lo)] = integrator_increment(spec, keys, j, h);

    GridProcess out;
    out.dt = p.dt;
    out.values.assign(n + 1, 0.0);
    const double scale = p.dt / h;
    double acc = 0.0;
    for (std::uint64_t k = 0; k < n; ++k) {
        acc += scale * du[static_cast<std::size_t>(bin_of(p.values[k], h) - lo)];
        out.values[k + 1] = acc;
    }
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// The iterated-integral tower.

// Bin-width schedule: level q is (conjecturally) self-similar of exponent
// alpha_q, so its increments over dt live at scale dt^alpha_q; bins
// h_q = c * dt^alpha_q resolve the path without oversampling it.
inline double default_bin_width(int level, double dt, double c = 1.0) {
    return c * std::pow(dt, alpha_exponent(level).to_double());
}

// Levels 1..p of the tower; level 1 is the Brownian path (stream "W:0"),
// level q+1 integrates level q's occupation against fresh bilateral
// streams "W:q".  h_schedule[q-1] is the bin width used for level q.
inline std::vector<GridProcess> xi_tower(int p, const GridSpec& spec,
                                         const std::vector<double>& h_schedule, std::uint64_t master,
                                         std::uint64_t replica) {
    if (p < 1 || p > kMaxTowerDepth)
        throw std::invalid_argument("xi_tower: depth must lie in [1," + std::to_string(kMaxTowerDepth) + "]");
    if (static_cast<int>(h_schedule.size()) < p - 1)
        throw std::invalid_argument("xi_tower: depth " + std::to_string(p) + " needs " +
                                    std::to_string(p - 1) + " bin widths");
    std::vector<GridProcess> levels;
    levels.reserve(static_cast<std::size_t>(p));
    levels.push_back(brownian_path(spec, 1.0, derive_stream(master, "W:0", replica)));
    for (int q = 1; q < p; ++q) {
        const double h = h_schedule[static_cast<std::size_t>(q - 1)];
        if (!(h > 0.0)) throw std::invalid_argument("xi_tower: bin widths must be positive");
        levels.push_back(detail::integrate_level(levels.back(), h,
                                                 IntegratorSpec::brownian(1.0),
                                                 bilateral_streams(master, "W:" + std::to_string(q), replica)));
    }
    return levels;
}

// Level 2 alone: Brownian motion in Brownian scenery.
inline GridProcess delta_process(const GridSpec& spec, double h, std::uint64_t master,
                                    std::uint64_t replica) {
    return xi_tower(2, spec, {h}, master, replica).back();
}

// Level 3 with a (possibly stable) top integrator: Delta's occupation
// integrated against an independent-increment field U.  beta = 2 with
// sigma = 1/sqrt(2) reproduces the all-Gaussian level 3 exactly.
inline GridProcess gamma_process(const GridSpec& spec, double h1, double h2,
                                 const StableParams& params, std::uint64_t master,
                                 std::uint64_t replica) {
    params.validate();
    GridProcess delta = delta_process(spec, h1, master, replica);
    return detail::integrate_level(delta, h2, IntegratorSpec::stable_law(params),
                                   bilateral_streams(master, "W:2", replica));
}

// ---------------------------------------------------------------------------
// Self-intersection local time of the Brownian path.

struct SelfIntersectionEstimate {
    double mean_v = 0.0;        // E[ sum_j L(1,j)^2 h ]
    double se_v = 0.0;
    double mean_inv_sqrt = 0.0; // E[ (sum_j L(1,j)^2 h)^(-1/2) ]
    double se_inv_sqrt = 0.0;
    std::uint32_t replicas = 0;
};

// V = sum_j L(T,j)^2 h for one Brownian path; by Cauchy-Schwarz
// T = sum_j L h <= sqrt(nbins h) sqrt(V), so V >= T^2 / (occupied span).
inline double brownian_sil_once(const GridSpec& spec, double h, std::uint64_t master,
                                std::uint64_t replica) {
    const GridProcess b = brownian_path(spec, 1.0, derive_stream(master, "W:0", replica));
    const std::uint64_t n = spec.steps();
    std::int64_t lo = bin_of(b.values[0], h), hi = lo;
    for (std::uint64_t k = 0; k < n; ++k) {
        const std::int64_t j = bin_of(b.values[k], h);
        lo = std::min(lo, j);
        hi = std::max(hi, j);
    }
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(hi - lo + 1), 0);
    for (std::uint64_t k = 0; k < n; ++k)
        ++counts[static_cast<std::size_t>(bin_of(b.values[k], h) - lo)];
    double v = 0.0;
    for (std::uint64_t c : counts) v += static_cast<double>(c) * static_cast<double>(c);
    return v * spec.dt * spec.dt / h;
}

inline SelfIntersectionEstimate inv_sqrt_sil(const GridSpec& spec, double h, std::uint32_t replicas,
                                             std::uint64_t master, unsigned workers = 1,
                                             std::uint64_t base_replica = 0) {
    if (replicas < 2) throw std::invalid_argument("inv_sqrt_sil: need at least 2 replicas");
    std::vector<double> vs(replicas, 0.0), inv(replicas, 0.0);
    for_each_replica(replicas, workers, [&](std::uint64_t r) {
        const double v = brownian_sil_once(spec, h, master, base_replica + r);
        vs[r] = v;
        inv[r] = 1.0 / std::sqrt(v);
    });
    SelfIntersectionEstimate e;
    e.replicas = replicas;
    double s = 0.0;
    for (double v : vs) s += v;
    e.mean_v = s / static_cast<double>(replicas);
    e.se_v = detail::batch_se_of_mean(vs);
    s = 0.0;
    for (double v : inv) s += v;
    e.mean_inv_sqrt = s / static_cast<double>(replicas);
    e.se_inv_sqrt = detail::batch_se_of_mean(inv);
    return e;
}

// ---------------------------------------------------------------------------
// Distributional gates for grid processes.

// Sampler of X at the grid times in `ts` from a fresh replica.
using GridSampler = std::function<std::vector<double>(std::uint64_t replica, const std::vector<double>& ts)>;

inline GridSampler make_tower_level_sampler(int p, double dt, const std::vector<double>& h_schedule,
                                            std::uint64_t master, std::uint64_t base_replica = 0) {
    return [p, dt, h_schedule, master, base_replica](std::uint64_t r, const std::vector<double>& ts) {
        GridSpec spec{dt, ts.back()};
        const std::vector<GridProcess> lv = xi_tower(p, spec, h_schedule, master, base_replica + r);
        std::vector<double> out;
        out.reserve(ts.size());
        for (double t : ts) out.push_back(lv.back().at_time(t));
        return out;
    };
}

inline GridSampler make_gamma_sampler(double dt, double h1, double h2, StableParams params,
                                      std::uint64_t master, std::uint64_t base_replica = 0) {
    return [dt, h1, h2, params, master, base_replica](std::uint64_t r, const std::vector<double>& ts) {
        GridSpec spec{dt, ts.back()};
        const GridProcess g = gamma_process(spec, h1, h2, params, master, base_replica + r);
        std::vector<double> out;
        out.reserve(ts.size());
        for (double t : ts) out.push_back(g.at_time(t));
        return out;
    };
}

// KS gate for alpha-self-similarity without reference to extrema: compares
// c^(-alpha) X_{c t} against X_t on independent replica banks.
struct SelfSimilarityReport {
    KsResult ks;
    double alpha = 0.0, t = 0.0, c = 0.0;
    std::uint32_t replicas = 0;
};

inline SelfSimilarityReport self_similarity_check(const GridSampler& sampler, double alpha, double t,
                                                  double c, std::uint32_t replicas,
                                                  double ks_alpha = 1e-3, unsigned workers = 1) {
    if (!(c > 1.0)) throw std::invalid_argument("self_similarity_check: c must exceed 1");
    if (replicas < 2) throw std::invalid_argument("self_similarity_check: need at least 2 replicas");
    std::vector<double> bank_a(replicas, 0.0), bank_b(replicas, 0.0);
    const std::vector<double> t_long{c * t};
    const std::vector<double> t_short{t};
    const double scale = std::pow(c, -alpha);
    for_each_replica(replicas, workers, [&](std::uint64_t r) {
        bank_a[r] = scale * sampler(r, t_long)[0];
    });
    for_each_replica(replicas, workers, [&](std::uint64_t r) {
        bank_b[r] = sampler(static_cast<std::uint64_t>(replicas) + r, t_short)[0];
    });
    SelfSimilarityReport rep;
    rep.alpha = alpha;
    rep.t = t;
    rep.c = c;
    rep.replicas = replicas;
    rep.ks = ks_two_sample(std::move(bank_a), std::move(bank_b), ks_alpha);
    return rep;
}

// KS gate for stationary increments: X_{t+s} - X_t against a fresh X_s.
struct GridStationarityReport {
    KsResult ks;
    double t = 0.0, s = 0.0;
    std::uint32_t replicas = 0;
};

inline GridStationarityReport stationary_increment_check(const GridSampler& sampler, double t, double s,
                                                         std::uint32_t replicas, double ks_alpha = 1e-3,
                                                         unsigned workers = 1) {
    if (!(t > 0.0) || !(s > 0.0))
        throw std::invalid_argument("stationary_increment_check: t and s must be positive");
    if (replicas < 2) throw std::invalid_argument("stationary_increment_check: need at least 2 replicas");
    std::vector<double> bank_a(replicas, 0.0), bank_b(replicas, 0.0);
    const std::vector<double> pair_ts{t, t + s};
    const std::vector<double> short_ts{s};
    for_each_replica(replicas, workers, [&](std::uint64_t r) {
        const std::vector<double> v = sampler(r, pair_ts);
        bank_a[r] = v[1] - v[0];
    });
    for_each_replica(replicas, workers, [&](std::uint64_t r) {
        bank_b[r] = sampler(static_cast<std::uint64_t>(replicas) + r, short_ts)[0];
    });
    GridStationarityReport rep;
    rep.t = t;
    rep.s = s;
    rep.replicas = replicas;
    rep.ks = ks_two_sample(std::move(bank_a), std::move(bank_b), ks_alpha);
    return rep;
}

} // namespace rwrs
