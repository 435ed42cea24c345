#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rational.hpp"
#include "rng.hpp"

// Quenched sceneries: an i.i.d. field over lattice sites, realized lazily.
// The value at a site is a pure function of (stream key, site), so walks
// query sites on visit and revisits always see the same value -- the field
// is frozen without ever being materialized.

namespace rwrs {

enum class SceneryKind {
    rademacher,   // +1/-1 with probability 1/2 each
    finite_int,   // finite integer support, exact rational probabilities
    gaussian,     // centered normal
    stable_exact, // strictly stable, index in (1,2]
    heavy_tail,   // symmetric power tail c|x|^-(beta+1) beyond x0, uniform core
};

inline const char* to_string(SceneryKind k) {
    switch (k) {
        case SceneryKind::rademacher: return "rademacher";
        case SceneryKind::finite_int: return "finite_int";
        case SceneryKind::gaussian: return "gaussian";
        case SceneryKind::stable_exact: return "stable";
        case SceneryKind::heavy_tail: return "heavy_tail";
    }
    return "?";
}

struct SceneryDist {
    SceneryKind kind = SceneryKind::rademacher;

    // finite_int
    std::vector<std::pair<std::int64_t, Rational>> support; // (value, probability)

    // gaussian
    double variance = 1.0;

    // stable_exact
    StableParams stable;

    // heavy_tail: density c|x/scale|^-(beta+1)/scale for |x| >= scale,
    // constant c/scale on (-scale, scale), c = beta/(2(beta+1)).
    // Symmetric, hence centered; tail P(|X|>u) = (u/scale)^-beta/(beta+1).
    double tail_beta = 1.5;
    double scale = 1.0;

    static SceneryDist rademacher() { return SceneryDist{}; }

    static SceneryDist finite_int(std::vector<std::pair<std::int64_t, Rational>> sup) {
        SceneryDist d;
        d.kind = SceneryKind::finite_int;
        d.support = std::move(sup);
        d.validate();
        return d;
    }

    static SceneryDist point_mass(std::int64_t v) {
        return finite_int({{v, Rational(1)}});
    }

    static SceneryDist gaussian_dist(double variance) {
        SceneryDist d;
        d.kind = SceneryKind::gaussian;
        d.variance = variance;
        d.validate();
        return d;
    }

    static SceneryDist stable_dist(StableParams p) {
        SceneryDist d;
        d.kind = SceneryKind::stable_exact;
        d.stable = p;
        d.validate();
        return d;
    }

    static SceneryDist heavy_tail_dist(double beta, double scale = 1.0) {
        SceneryDist d;
        d.kind = SceneryKind::heavy_tail;
        d.tail_beta = beta;
        d.scale = scale;
        d.validate();
        return d;
    }

    void validate() const {
        switch (kind) {
            case SceneryKind::rademacher:
                return;
            case SceneryKind::finite_int: {
                if (support.empty())
                    throw std::invalid_argument("finite_int scenery: empty support");
                Rational total(0);
                for (const auto& [v, p] : support) {
                    (void)v;
                    if (p.num <= 0) throw std::invalid_argument("finite_int scenery: probabilities must be positive");
                    total = total + p;
                }
                if (total != Rational(1))
                    throw std::invalid_argument("finite_int scenery: probabilities must sum to 1, got " + total.str());
                for (std::size_t i = 0; i < support.size(); ++i)
                    for (std::size_t j = i + 1; j < support.size(); ++j)
                        if (support[i].first == support[j].first)
                            throw std::invalid_argument("finite_int scenery: duplicate support point");
                return;
            }
            case SceneryKind::gaussian:
                if (!(variance > 0.0)) throw std::invalid_argument("gaussian scenery: variance must be positive");
                return;
            case SceneryKind::stable_exact:
                stable.validate();
                return;
            case SceneryKind::heavy_tail:
                // beta = 2 is excluded: the u^-2 tail has infinite variance,
                // so sqrt(n) norming fails and the law sits outside every
                // normal domain of attraction.
                if (!(tail_beta > 1.0 && tail_beta < 2.0))
                    throw std::invalid_argument("heavy_tail scenery: beta must lie in (1,2)");
                if (!(scale > 0.0)) throw std::invalid_argument("heavy_tail scenery: scale must be positive");
                return;
        }
    }

    bool integer_valued() const {
        return kind == SceneryKind::rademacher || kind == SceneryKind::finite_int;
    }

    // Exact for integer-valued kinds; the continuous kinds here are
    // centered by construction (symmetry, or no-drift stable with beta>1).
    bool centered() const {
        switch (kind) {
            case SceneryKind::rademacher: return true;
            case SceneryKind::finite_int: {
                Rational mean(0);
                for (const auto& [v, p] : support) mean = mean + Rational(v) * p;
                return mean.is_zero();
            }
            case SceneryKind::gaussian: return true;
            case SceneryKind::stable_exact: return true; // mean 0 for beta > 1, no drift term
            case SceneryKind::heavy_tail: return true;   // symmetric
        }
        return false;
    }

    // Largest q with E|X|^q finite; +inf encoded as a huge sentinel.
    double moment_order_bound() const {
        switch (kind) {
            case SceneryKind::rademacher:
            case SceneryKind::finite_int:
            case SceneryKind::gaussian: return 1e300;
            case SceneryKind::stable_exact: return stable.beta == 2.0 ? 1e300 : stable.beta;
            case SceneryKind::heavy_tail: return tail_beta;
        }
        return 0.0;
    }

    bool has_finite_moment(double q) const { return q < moment_order_bound(); }

    // Second moment where it exists.
    double second_moment() const {
        switch (kind) {
            case SceneryKind::rademacher: return 1.0;
            case SceneryKind::finite_int: {
                double s = 0.0;
                for (const auto& [v, p] : support)
                    s += static_cast<double>(v) * static_cast<double>(v) * p.to_double();
                return s;
            }
            case SceneryKind::gaussian: return variance;
            case SceneryKind::stable_exact:
                if (stable.beta == 2.0) return 2.0 * stable.sigma * stable.sigma;
                throw std::domain_error("second_moment: infinite for stable beta < 2");
            case SceneryKind::heavy_tail:
                throw std::domain_error("second_moment: infinite for heavy_tail beta < 2");
        }
        return 0.0;
    }

    std::string describe() const {
        std::string s = to_string(kind);
        if (kind == SceneryKind::finite_int) {
            s += "{";
            for (std::size_t i = 0; i < support.size(); ++i) {
                if (i) s += ",";
                s += std::to_string(support[i].first) + ":" + support[i].second.str();
            }
            s += "}";
        } else if (kind == SceneryKind::gaussian) {
            s += "(var=" + std::to_string(variance) + ")";
        } else if (kind == SceneryKind::stable_exact) {
            s += "(beta=" + std::to_string(stable.beta) + ",sigma=" + std::to_string(stable.sigma) +
                 ",nu=" + std::to_string(stable.nu) + ")";
        } else if (kind == SceneryKind::heavy_tail) {
            s += "(beta=" + std::to_string(tail_beta) + ",scale=" + std::to_string(scale) + ")";
        }
        return s;
    }
};

// Quantile of the heavy-tail law with scale 1.  Derivation: with
// c = beta/(2(beta+1)) the CDF is 1/2 + c x on [-1,1] and
// 1 - (c/beta) x^-beta on [1,inf); both pieces invert in closed form and
// meet at x = 1.
inline double heavy_tail_quantile(double beta, double u) {
    const double c = beta / (2.0 * (beta + 1.0));
    const double v = u - 0.5;
    const double av = v < 0 ? -v : v;
    if (av <= c) return v / c;
    const double x = std::pow(2.0 * (beta + 1.0) * (0.5 - av), -1.0 / beta);
    return v < 0 ? -x : x;
}

// A realized scenery: distribution + stream.  Each site owns four counter
// slots so multi-uniform transforms (Box-Muller, CMS) stay pure functions
// of the site.
class Scenery {
public:
    Scenery() = default;
    Scenery(SceneryDist dist, StreamKey key) : dist_(std::move(dist)), key_(std::move(key)) {
        dist_.validate();
        if (dist_.kind == SceneryKind::finite_int) {
            double acc = 0.0;
            cdf_.reserve(dist_.support.size());
            for (const auto& [v, p] : dist_.support) {
                acc += p.to_double();
                cdf_.emplace_back(acc, v);
            }
            cdf_.back().first = 1.0; // close the table against rounding
        }
    }

    const SceneryDist& dist() const { return dist_; }
    const StreamKey& stream() const { return key_; }

    // Integer-valued field value at a lattice site.
    std::int64_t at_int(std::int64_t site) const {
        const std::uint64_t base = zigzag(site) << 2;
        switch (dist_.kind) {
            case SceneryKind::rademacher:
                return (key_.word(base) >> 63) ? 1 : -1;
            case SceneryKind::finite_int: {
                const double u = unit_open(key_.word(base));
                for (const auto& [cut, v] : cdf_)
                    if (u <= cut) return v;
                return cdf_.back().second;
            }
            default:
                throw std::logic_error("at_int: scenery is not integer-valued");
        }
    }

    // Real-valued field value at a lattice site.
    double at_real(std::int64_t site) const {
        const std::uint64_t base = zigzag(site) << 2;
        switch (dist_.kind) {
            case SceneryKind::rademacher:
            case SceneryKind::finite_int:
                return static_cast<double>(at_int(site));
            case SceneryKind::gaussian: {
                const double u1 = unit_open(key_.word(base));
                const double u2 = unit_open(key_.word(base + 1));
                return std::sqrt(dist_.variance) * std::sqrt(-2.0 * std::log(u1)) *
                       std::cos(6.283185307179586476925286766559 * u2);
            }
            case SceneryKind::stable_exact:
                // CMS consumes words 2i and 2i+1; i = zigzag<<1 lands those
                // on slots 0 and 1 of this site's four-slot block.
                return sample_stable(dist_.stable, key_, zigzag(site) << 1);
            case SceneryKind::heavy_tail: {
                const double u = unit_open(key_.word(base));
                return dist_.scale * heavy_tail_quantile(dist_.tail_beta, u);
            }
        }
        return 0.0;
    }

    // Plane-indexed field value (for sceneries indexed by a 2D walk).
    // Site pair is folded bijectively through Morton interleaving, so
    // distinct plane sites never share a counter.
    std::int64_t at_int_2d(std::int64_t a, std::int64_t b) const {
        const std::uint64_t za = zigzag(a), zb = zigzag(b);
        if (za > 0xFFFFFFFFull || zb > 0xFFFFFFFFull)
            throw std::out_of_range("at_int_2d: site outside the 2D counter domain");
        const std::uint64_t idx = interleave_bits(static_cast<std::uint32_t>(za),
                                                  static_cast<std::uint32_t>(zb));
        switch (dist_.kind) {
            case SceneryKind::rademacher:
                return (key_.word(idx << 2) >> 63) ? 1 : -1;
            case SceneryKind::finite_int: {
                const double u = unit_open(key_.word(idx << 2));
                for (const auto& [cut, v] : cdf_)
                    if (u <= cut) return v;
                return cdf_.back().second;
            }
            default:
                throw std::logic_error("at_int_2d: scenery is not integer-valued");
        }
    }

private:
    SceneryDist dist_;
    StreamKey key_;
    std::vector<std::pair<double, std::int64_t>> cdf_;
};

// Free-function spelling used throughout the ops.
inline std::int64_t scenery_at_int(const Scenery& s, std::int64_t site) { return s.at_int(site); }
inline double scenery_at_real(const Scenery& s, std::int64_t site) { return s.at_real(site); }

} // namespace rwrs
