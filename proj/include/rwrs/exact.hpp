#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "scenery.hpp"

// Exact finite-n references, computed by dynamic programming or outright
// enumeration.  These provide the independent second route for checking
// the Monte Carlo estimators: no sampling, no shared code with the
// simulation loops.

namespace rwrs {

// Exact pmf of the n-step walk with the given integer step law, as a dense
// array over [-n*m, n*m] where m = max|support|.  probs[i] corresponds to
// site lo + i.
struct WalkPmf {
    std::int64_t lo = 0;
    std::vector<double> probs;

    double at(std::int64_t site) const {
        const std::int64_t i = site - lo;
        if (i < 0 || i >= static_cast<std::int64_t>(probs.size())) return 0.0;
        return probs[static_cast<std::size_t>(i)];
    }
};

inline WalkPmf walk_pmf(const SceneryDist& step, std::uint64_t n) {
    step.validate();
    if (!step.integer_valued())
        throw std::invalid_argument("walk_pmf: step distribution must be integer-valued");
    if (n > 4096)
        throw std::invalid_argument("walk_pmf: quadratic DP capped at n = 4096");

    std::vector<std::pair<std::int64_t, double>> atoms;
    if (step.kind == SceneryKind::rademacher) {
        atoms = {{-1, 0.5}, {1, 0.5}};
    } else {
        for (const auto& [v, p] : step.support) atoms.emplace_back(v, p.to_double());
    }
    std::int64_t m = 0;
    for (const auto& [v, p] : atoms) {
        (void)p;
        m = std::max(m, v < 0 ? -v : v);
    }

    const std::int64_t width = 2 * static_cast<std::int64_t>(n) * std::max<std::int64_t>(m, 1) + 1;
    WalkPmf pmf;
    pmf.lo = -static_cast<std::int64_t>(n) * std::max<std::int64_t>(m, 1);
    pmf.probs.assign(static_cast<std::size_t>(width), 0.0);
    pmf.probs[static_cast<std::size_t>(-pmf.lo)] = 1.0;

    std::vector<double> next(static_cast<std::size_t>(width), 0.0);
    for (std::uint64_t s = 0; s < n; ++s) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::int64_t i = 0; i < width; ++i) {
            const double p = pmf.probs[static_cast<std::size_t>(i)];
            if (p == 0.0) continue;
            for (const auto& [v, q] : atoms) {
                const std::int64_t j = i + v;
                if (j >= 0 && j < width) next[static_cast<std::size_t>(j)] += p * q;
            }
        }
        pmf.probs.swap(next);
    }
    return pmf;
}

// Return probabilities P(Z_m = 0) for m = 0..n in one convolution sweep.
inline std::vector<double> return_probabilities(const SceneryDist& step, std::uint64_t n) {
    step.validate();
    if (!step.integer_valued())
        throw std::invalid_argument("return_probabilities: step distribution must be integer-valued");
    if (n > 4096)
        throw std::invalid_argument("return_probabilities: quadratic DP capped at n = 4096");

    std::vector<std::pair<std::int64_t, double>> atoms;
    if (step.kind == SceneryKind::rademacher) {
        atoms = {{-1, 0.5}, {1, 0.5}};
    } else {
        for (const auto& [v, p] : step.support) atoms.emplace_back(v, p.to_double());
    }
    std::int64_t m = 0;
    for (const auto& [v, p] : atoms) {
        (void)p;
        m = std::max(m, v < 0 ? -v : v);
    }
    m = std::max<std::int64_t>(m, 1);

    const std::int64_t width = 2 * static_cast<std::int64_t>(n) * m + 1;
    const std::int64_t origin = static_cast<std::int64_t>(n) * m;
    std::vector<double> cur(static_cast<std::size_t>(width), 0.0), next(cur);
    cur[static_cast<std::size_t>(origin)] = 1.0;

    std::vector<double> r;
    r.reserve(n + 1);
    r.push_back(1.0);
    for (std::uint64_t s = 1; s <= n; ++s) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::int64_t i = 0; i < width; ++i) {
            const double p = cur[static_cast<std::size_t>(i)];
            if (p == 0.0) continue;
            for (const auto& [v, q] : atoms) {
                const std::int64_t j = i + v;
                if (j >= 0 && j < width) next[static_cast<std::size_t>(j)] += p * q;
            }
        }
        cur.swap(next);
        r.push_back(cur[static_cast<std::size_t>(origin)]);
    }
    return r;
}

// E[ sum_x N_n(x)^2 ] for the walk: by stationarity of increments this is
// sum_{k,l=0}^{n-1} P(Z_{|k-l|} = 0) = n + 2 sum_{m=1}^{n-1} (n-m) P(Z_m = 0).
inline double expected_self_intersection(const SceneryDist& step, std::uint64_t n) {
    if (n == 0) return 0.0;
    const std::vector<double> r = return_probabilities(step, n > 0 ? n - 1 : 0);
    double acc = static_cast<double>(n);
    for (std::uint64_t m = 1; m < n; ++m)
        acc += 2.0 * static_cast<double>(n - m) * r[m];
    return acc;
}

// E[(level-2 value at time n)^2] = E[xi^2] * E[V_n] for a centered scenery
// with finite variance: conditioning on the walk, the scenery sum has
// conditional variance E[xi^2] * sum_x N_n(x)^2.
inline double level2_second_moment(const SceneryDist& step, const SceneryDist& xi, std::uint64_t n) {
    return xi.second_moment() * expected_self_intersection(step, n);
}

// Exact P(level-2 value at time n = 0) for the sign walk with a sign
// scenery, by enumerating all 2^n walk paths and convolving the scenery
// conditionally: given visit counts N(x), the scenery sum hits zero with
// probability read off an exact +/-N(x) convolution.
inline double exact_level2_return_prob(std::uint64_t n) {
    if (n > 20) throw std::invalid_argument("exact_level2_return_prob: enumeration capped at n = 20");
    if (n == 0) return 1.0;

    const std::int64_t span = static_cast<std::int64_t>(n);
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(2 * span + 1), 0);

    double total = 0.0;
    const std::uint64_t npaths = 1ull << n;
    std::vector<double> conv, nxt;
    for (std::uint64_t bits = 0; bits < npaths; ++bits) {
        // visit counts of Z_0..Z_{n-1}
        std::fill(counts.begin(), counts.end(), 0);
        std::int64_t z = 0;
        for (std::uint64_t k = 0; k < n; ++k) {
            ++counts[static_cast<std::size_t>(z + span)];
            z += ((bits >> k) & 1) ? 1 : -1;
        }
        // conditional law of the scenery sum: convolve +/-c per visited site
        conv.assign(static_cast<std::size_t>(2 * n + 1), 0.0);
        conv[n] = 1.0; // sum offset by n
        for (std::size_t i = 0; i < counts.size(); ++i) {
            const std::uint64_t c = counts[i];
            if (!c) continue;
            nxt.assign(conv.size(), 0.0);
            for (std::size_t j = 0; j < conv.size(); ++j) {
                const double p = conv[j];
                if (p == 0.0) continue;
                if (j + c < conv.size()) nxt[j + c] += 0.5 * p;
                if (j >= c) nxt[j - c] += 0.5 * p;
            }
            conv.swap(nxt);
        }
        total += conv[n];
    }
    return total / static_cast<double>(npaths);
}

} // namespace rwrs
