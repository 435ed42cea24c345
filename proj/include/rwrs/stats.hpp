#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "exact.hpp"
#include "parallel.hpp"
#include "rational.hpp"
#include "walks.hpp"

// Estimators and gates: scaling-exponent fits over dyadic horizons,
// two-sample Kolmogorov-Smirnov, lattice point-probability estimation,
// stationarity checks.  Every estimator is deterministic given
// (seed, replica count); worker count never changes a digit.

namespace rwrs {

// ---------------------------------------------------------------------------
// Closed-form exponents.

// alpha_0 = 1, alpha_p = 1 - alpha_{p-1}/2; in closed form
// alpha_p = 2/3 + (-1/2)^p / 3 = (2^(p+1) + (-1)^p) / (3 * 2^p).
inline Rational alpha_exponent(int p) {
    if (p < 0 || p > 40) throw std::invalid_argument("alpha_exponent: level must lie in [0,40]");
    const std::int64_t sign = (p % 2 == 0) ? 1 : -1;
    return Rational((std::int64_t(2) << p) + sign, 3 * (std::int64_t(1) << p));
}

// Exponent of the driven sum when the driving walk scales with exponent
// alpha and the scenery has tail index beta: delta = 1 - alpha (1 - 1/beta).
inline double delta_exponent(double alpha, double beta) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("delta_exponent: alpha must lie in (0,1)");
    if (!(beta > 1.0 && beta <= 2.0)) throw std::invalid_argument("delta_exponent: beta must lie in (1,2]");
    return 1.0 - alpha * (1.0 - 1.0 / beta);
}

// ---------------------------------------------------------------------------
// Batch-means standard errors (no distributional assumption).

namespace detail {

inline constexpr std::size_t kBatches = 32;

inline double batch_se_of_mean(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 2) return 0.0;
    const std::size_t nb = std::min(kBatches, n / 2);
    std::vector<double> means(nb, 0.0);
    // contiguous batches in replica order; deterministic
    for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t lo = b * n / nb, hi = (b + 1) * n / nb;
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += values[i];
        means[b] = s / static_cast<double>(hi - lo);
    }
    double m = 0.0;
    for (double v : means) m += v;
    m /= static_cast<double>(nb);
    double ss = 0.0;
    for (double v : means) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(nb - 1) / static_cast<double>(nb));
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double batch_se_of_median(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 2) return 0.0;
    const std::size_t nb = std::min(kBatches, n / 2);
    std::vector<double> meds(nb, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t lo = b * n / nb, hi = (b + 1) * n / nb;
        meds[b] = median_of(std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(lo),
                                                values.begin() + static_cast<std::ptrdiff_t>(hi)));
    }
    double m = 0.0;
    for (double v : meds) m += v;
    m /= static_cast<double>(nb);
    double ss = 0.0;
    for (double v : meds) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(nb - 1) / static_cast<double>(nb));
}

} // namespace detail

// ---------------------------------------------------------------------------
// Moment curves over horizons.

struct MomentCurvePoint {
    std::uint64_t n = 0;
    double estimate = 0.0;   // E|X_n|^q, or median |X_n|
    double std_error = 0.0;
    std::uint32_t replicas = 0;
    bool degenerate = false; // all-zero sample (constant process)
};

struct MomentCurve {
    double q = 2.0;          // ignored when use_median
    bool use_median = false;
    std::vector<MomentCurvePoint> points;
};

// A horizon sampler returns X_n for one replica at each requested
// horizon.  Horizons are passed sorted ascending; one replica is one
// streamed path, harvested at checkpoints.
using HorizonSampler = std::function<std::vector<double>(std::uint64_t replica)>;

inline MomentCurve moment_curve(const HorizonSampler& sampler, const std::vector<std::uint64_t>& horizons,
                                double q, bool use_median, std::uint32_t replicas, unsigned workers = 1) {
    if (horizons.empty()) throw std::invalid_argument("moment_curve: no horizons");
    if (!std::is_sorted(horizons.begin(), horizons.end()))
        throw std::invalid_argument("moment_curve: horizons must be ascending");
    if (replicas < 2) throw std::invalid_argument("moment_curve: need at least 2 replicas");
    if (!use_median && !(q > 0.0)) throw std::invalid_argument("moment_curve: moment order must be positive");

    const std::size_t H = horizons.size();
    std::vector<std::vector<double>> columns(H, std::vector<double>(replicas, 0.0));
    for_each_replica(replicas, workers, [&](std::uint64_t r) {
        std::vector<double> vals = sampler(r);
        if (vals.size() != H) throw std::runtime_error("moment_curve: sampler returned wrong arity");
        for (std::size_t h = 0; h < H; ++h) {
            const double a = std::abs(vals[h]);
            columns[h][r] = use_median ? a : std::pow(a, q);
        }
    });

    MomentCurve curve;
    curve.q = q;
    curve.use_median = use_median;
    curve.points.reserve(H);
    for (std::size_t h = 0; h < H; ++h) {
        MomentCurvePoint pt;
        pt.n = horizons[h];
        pt.replicas = replicas;
        if (use_median) {
            pt.estimate = detail::median_of(columns[h]);
            pt.std_error = detail::batch_se_of_median(columns[h]);
        } else {
            double s = 0.0;
            for (double v : columns[h]) s += v;
            pt.estimate = s / static_cast<double>(replicas);
            pt.std_error = detail::batch_se_of_mean(columns[h]);
        }
        pt.degenerate = (pt.estimate == 0.0 && pt.std_error == 0.0);
        curve.points.push_back(pt);
    }
    return curve;
}

// Tower adapter: one streamed depth-p path per replica, |final level|
// recorded at each horizon.  The returned sampler owns a copy of cfg;
// replica r runs with stream replica index base_replica + r.
inline HorizonSampler make_tower_sampler(int depth, TowerConfig cfg, std::vector<std::uint64_t> horizons,
                                         std::uint64_t base_replica = 0) {
    if (horizons.empty()) throw std::invalid_argument("make_tower_sampler: no horizons");
    validate_tower(depth, cfg);
    return [depth, cfg, horizons, base_replica](std::uint64_t r) {
        TowerConfig c = cfg;
        c.replica = base_replica + r;
        std::vector<double> out(horizons.size(), 0.0);
        std::size_t next = 0;
        run_tower(depth, horizons.back(), c, [&](std::uint64_t k, const std::int64_t*, double top) {
            if (k == horizons[next]) {
                out[next] = top;
                ++next;
            }
        });
        return out;
    };
}

// ---------------------------------------------------------------------------
// Scaling-exponent fit: least squares of log2 estimate against log2 n.

struct ExponentFit {
    double slope = 0.0;      // d log2(estimate) / d log2(n)
    double intercept = 0.0;
    double alpha_hat = 0.0;  // slope/q for moment curves, slope for median curves
    double std_error = 0.0;  // standard error of alpha_hat from the residuals
    double r_squared = 0.0;
    bool in_range = false;   // 0 < alpha_hat < 1
};

inline ExponentFit fit_scaling_exponent(const MomentCurve& curve) {
    std::vector<double> xs, ys;
    for (const auto& pt : curve.points) {
        if (pt.degenerate || !(pt.estimate > 0.0))
            throw std::invalid_argument("fit_scaling_exponent: non-positive estimate at n = " +
                                        std::to_string(pt.n));
        xs.push_back(std::log2(static_cast<double>(pt.n)));
        ys.push_back(std::log2(pt.estimate));
    }
    const std::size_t m = xs.size();
    if (m < 3) throw std::invalid_argument("fit_scaling_exponent: need at least 3 horizons");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < m; ++i) { mx += xs[i]; my += ys[i]; }
    mx /= static_cast<double>(m); my /= static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_scaling_exponent: horizons are all equal");

    ExponentFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double resid = ys[i] - (f.intercept + f.slope * xs[i]);
        ssr += resid * resid;
    }
    f.r_squared = (syy == 0.0) ? 1.0 : 1.0 - ssr / syy;
    const double slope_se = (m > 2) ? std::sqrt(ssr / static_cast<double>(m - 2) / sxx) : 0.0;
    const double div = curve.use_median ? 1.0 : curve.q;
    f.alpha_hat = f.slope / div;
    f.std_error = slope_se / div;
    f.in_range = (f.alpha_hat > 0.0 && f.alpha_hat < 1.0);
    return f;
}

// ---------------------------------------------------------------------------
// Two-sample Kolmogorov-Smirnov.

// Supremum distance between empirical CDFs; tie-aware merge walk over the
// two sorted samples.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

// Asymptotic two-sided critical value: c(alpha) * sqrt((n+m)/(nm)) with
// c(alpha) = sqrt(-ln(alpha/2)/2).  At alpha = 1e-3, c = 1.9494746035...
inline double ks_critical(std::size_t n, std::size_t m, double alpha = 1e-3) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("ks_critical: alpha must lie in (0,1)");
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return c * std::sqrt((static_cast<double>(n) + static_cast<double>(m)) /
                         (static_cast<double>(n) * static_cast<double>(m)));
}

struct KsResult {
    double statistic = 0.0;
    double threshold = 0.0;
    double alpha = 1e-3;
    bool pass = false;
};

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double alpha = 1e-3) {
    KsResult r;
    r.alpha = alpha;
    r.threshold = ks_critical(a.size(), b.size(), alpha);
    r.statistic = ks_distance(std::move(a), std::move(b));
    r.pass = r.statistic < r.threshold;
    return r;
}

// ---------------------------------------------------------------------------
// Lattice point-probability (local limit) estimation for the level-2 walk.

struct LltPoint {
    std::uint64_t n = 0;
    double value = 0.0;       // estimate of n^(3/4) P(X_n = 0)
    double std_error = 0.0;
    std::uint32_t replicas = 0;
    std::uint64_t window = 0; // number of even times averaged (1 = plain hit count)
};

// Estimates n^(3/4) P(X_n = 0) for the depth-2 all-sign tower at even
// horizons.  Counts exact lattice hits; no kernel smoothing.  To keep the
// replica budget sane at large n, each replica averages the unbiased
// per-time values k^(3/4) 1{X_k = 0} over the trailing even times
// k in (n - w, n], w = window_fraction * n.  Every term estimates the
// rescaled constant at its own k, so the window average converges to the
// same limit; window_fraction 0 recovers the single-time estimator.
inline std::vector<LltPoint> llt_constant_estimate(const std::vector<std::uint64_t>& horizons,
                                                   std::uint32_t replicas, std::uint64_t master,
                                                   double window_fraction = 0.125,
                                                   unsigned workers = 1,
                                                   std::uint64_t base_replica = 0) {
    if (horizons.empty()) throw std::invalid_argument("llt_constant_estimate: no horizons");
    if (!std::is_sorted(horizons.begin(), horizons.end()))
        throw std::invalid_argument("llt_constant_estimate: horizons must be ascending");
    for (std::uint64_t n : horizons)
        if (n == 0 || (n & 1))
            throw std::invalid_argument("llt_constant_estimate: horizons must be even (odd times cannot hit 0)");
    if (!(window_fraction >= 0.0 && window_fraction < 1.0))
        throw std::invalid_argument("llt_constant_estimate: window fraction must lie in [0,1)");
    if (replicas < 2) throw std::invalid_argument("llt_constant_estimate: need at least 2 replicas");

    const std::size_t H = horizons.size();
    // window starts (exclusive) per horizon; even widths
    std::vector<std::uint64_t> wstart(H), wcount(H);
    for (std::size_t h = 0; h < H; ++h) {
        std::uint64_t w = static_cast<std::uint64_t>(window_fraction * static_cast<double>(horizons[h]));
        w &= ~std::uint64_t(1); // even
        if (w < 2) w = 2;       // at least the horizon itself
        if (w > horizons[h]) w = horizons[h];
        wstart[h] = horizons[h] - w;
        wcount[h] = w / 2;
    }

    TowerConfig cfg;
    cfg.master = master;
    cfg.sceneries = {SceneryDist::rademacher()};

    std::vector<std::vector<double>> columns(H, std::vector<double>(replicas, 0.0));
    const std::uint64_t nmax = horizons.back();
    for_each_replica(replicas, workers, [&](std::uint64_t r) {
        TowerConfig c = cfg;
        c.replica = base_replica + r;
        std::vector<double> acc(H, 0.0);
        std::size_t lowest = 0; // horizons below this are fully harvested
        run_tower(2, nmax, c, [&](std::uint64_t k, const std::int64_t* lv, double) {
            if (lv[2] != 0 || (k & 1)) return;
            while (lowest < H && k > horizons[lowest]) ++lowest;
            for (std::size_t h = lowest; h < H; ++h) {
                if (k > wstart[h] && k <= horizons[h])
                    acc[h] += std::pow(static_cast<double>(k), 0.75);
            }
        });
        for (std::size_t h = 0; h < H; ++h)
            columns[h][r] = acc[h] / static_cast<double>(wcount[h]);
    });

    std::vector<LltPoint> out;
    out.reserve(H);
    for (std::size_t h = 0; h < H; ++h) {
        LltPoint pt;
        pt.n = horizons[h];
        pt.replicas = replicas;
        pt.window = wcount[h];
        double s = 0.0;
        for (double v : columns[h]) s += v;
        pt.value = s / static_cast<double>(replicas);
        pt.std_error = detail::batch_se_of_mean(columns[h]);
        out.push_back(pt);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Stationary-increment gate for discrete processes.

// An increment sampler returns X_to - X_from for one replica.  Bank A
// draws X_{m+n} - X_m from replicas [0,R), bank B draws X_n - X_0 from
// fresh replicas [R,2R); a KS gate compares the two samples.
using IncrementSampler = std::function<double(std::uint64_t replica, std::uint64_t from, std::uint64_t to)>;

struct StationarityReport {
    KsResult ks;
    std::uint64_t n = 0, lag = 0;
    std::uint32_t replicas = 0;
};

inline StationarityReport stationarity_check(const IncrementSampler& sampler, std::uint64_t n,
                                             std::uint64_t lag, std::uint32_t replicas,
                                             double alpha = 1e-3, unsigned workers = 1) {
    if (n == 0 || lag == 0) throw std::invalid_argument("stationarity_check: n and lag must be positive");
    if (replicas < 2) throw std::invalid_argument("stationarity_check: need at least 2 replicas");
    std::vector<double> bank_a(replicas, 0.0), bank_b(replicas, 0.0);
    for_each_replica(replicas, workers, [&](std::uint64_t r) {
        bank_a[r] = sampler(r, lag, lag + n);
    });
    for_each_replica(replicas, workers, [&](std::uint64_t r) {
        bank_b[r] = sampler(static_cast<std::uint64_t>(replicas) + r, 0, n);
    });
    StationarityReport rep;
    rep.n = n;
    rep.lag = lag;
    rep.replicas = replicas;
    rep.ks = ks_two_sample(std::move(bank_a), std::move(bank_b), alpha);
    return rep;
}

// Tower adapter for the stationarity gate.
inline IncrementSampler make_tower_increment_sampler(int depth, TowerConfig cfg,
                                                     std::uint64_t base_replica = 0) {
    validate_tower(depth, cfg);
    return [depth, cfg, base_replica](std::uint64_t r, std::uint64_t from, std::uint64_t to) {
        if (from > to) throw std::invalid_argument("increment sampler: from > to");
        TowerConfig c = cfg;
        c.replica = base_replica + r;
        double v_from = 0.0, v_to = 0.0;
        run_tower(depth, to, c, [&](std::uint64_t k, const std::int64_t*, double top) {
            if (k == from) v_from = top;
            if (k == to) v_to = top;
        });
        return v_to - v_from;
    };
}

} // namespace rwrs
