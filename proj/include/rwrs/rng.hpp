#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

// Counter-based randomness.  Every variate in the lab is a pure function
// of (master seed, stream label, replica index, draw index): no mutable
// generator state, so any site or step can be re-queried in any order,
// on any worker, and the answer never changes.

namespace rwrs {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer; full avalanche on 64 bits.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30; x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27; x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

// Signed site -> counter domain: 0,-1,1,-2,2,... -> 0,1,2,3,4,...
inline constexpr std::uint64_t zigzag(std::int64_t s) {
    return (static_cast<std::uint64_t>(s) << 1) ^ static_cast<std::uint64_t>(s >> 63);
}

// Bit-interleave two 32-bit values (Morton order).  Bijective pairing of
// 2D sites into the counter domain for plane-indexed sceneries.
inline constexpr std::uint64_t interleave_bits(std::uint32_t a, std::uint32_t b) {
    auto spread = [](std::uint64_t v) constexpr {
        v &= 0xFFFFFFFFull;
        v = (v | (v << 16)) & 0x0000FFFF0000FFFFull;
        v = (v | (v << 8))  & 0x00FF00FF00FF00FFull;
        v = (v | (v << 4))  & 0x0F0F0F0F0F0F0F0Full;
        v = (v | (v << 2))  & 0x3333333333333333ull;
        v = (v | (v << 1))  & 0x5555555555555555ull;
        return v;
    };
    return spread(a) | (spread(b) << 1);
}

// A derived stream: 64-bit key plus the identifying coordinates it was
// derived from (kept for reporting; only `key` enters the hot path).
struct StreamKey {
    std::uint64_t key = 0;
    std::uint64_t master = 0;
    std::uint64_t replica = 0;
    std::string label;

    // index-th 64-bit word of this stream.
    std::uint64_t word(std::uint64_t index) const { return mix64(key + (index + 1) * kGolden); }
};

// Label and replica are absorbed byte-wise through the mixer, so any
// change to (master, label, replica) moves the key to an unrelated point.
inline StreamKey derive_stream(std::uint64_t master, std::string_view label, std::uint64_t replica) {
    std::uint64_t k = mix64(master ^ 0xA5B35705FC27B2A1ull);
    for (unsigned char c : label) k = mix64(k ^ (static_cast<std::uint64_t>(c) + 0x101ull));
    k = mix64(k ^ mix64(replica + kGolden));
    StreamKey s;
    s.key = k;
    s.master = master;
    s.replica = replica;
    s.label = std::string(label);
    return s;
}

// Uniform on the open interval (0,1): odd multiples (2k+1) * 2^-53 from the
// top 52 bits.  Every value is exactly representable, so 0 and 1 are
// unreachable (safe under log / quantile transforms); the naive
// (k + 0.5) * 2^-53 form rounds up to 1.0 at the top word.
inline double unit_open(std::uint64_t w) {
    return static_cast<double>((w >> 12) * 2 + 1) * 0x1.0p-53;
}

// One standard normal from the word pair (2i, 2i+1): the cosine branch of
// a Box-Muller transform.  Used where each index must own its words
// outright (per-bin integrator increments).
inline double normal_from_pair(const StreamKey& s, std::uint64_t pair_index) {
    const double u1 = unit_open(s.word(2 * pair_index));
    const double u2 = unit_open(s.word(2 * pair_index + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// One standard normal per index.  Indices 2i and 2i+1 consume the words
// 2i and 2i+1 through one Box-Muller transform (cosine and sine branch);
// the two outputs of a transform are exactly independent.
inline double standard_normal(const StreamKey& s, std::uint64_t index) {
    const std::uint64_t pair = index >> 1;
    const double u1 = unit_open(s.word(2 * pair));
    const double u2 = unit_open(s.word(2 * pair + 1));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    return (index & 1) ? r * std::sin(a) : r * std::cos(a);
}

inline double sample_gaussian(const StreamKey& s, std::uint64_t index, double mean, double variance) {
    if (!(variance >= 0.0)) throw std::invalid_argument("sample_gaussian: negative variance");
    return mean + std::sqrt(variance) * standard_normal(s, index);
}

// Strictly stable law, index beta in (1,2], in the parameterization with
// characteristic function
//     E exp(iuS) = exp(-sigma^beta |u|^beta (1 - i nu tan(pi beta/2) sgn u)).
// beta = 2 is the Gaussian endpoint: exp(-sigma^2 u^2), variance 2 sigma^2.
struct StableParams {
    double beta = 2.0;
    double sigma = 1.0;
    double nu = 0.0;

    void validate() const {
        if (!(beta > 1.0) || !(beta <= 2.0))
            throw std::invalid_argument("StableParams: beta must lie in (1,2]");
        if (!(sigma > 0.0))
            throw std::invalid_argument("StableParams: sigma must be positive");
        if (!(nu >= -1.0) || !(nu <= 1.0))
            throw std::invalid_argument("StableParams: nu must lie in [-1,1]");
    }
};

// Chambers-Mallows-Stuck transform.  Consumes words 2*index, 2*index+1.
// At beta = 2 the tangent factor vanishes and the transform degenerates;
// that branch is short-circuited to the exact Gaussian endpoint, reusing
// the same word-consumption pattern as standard_normal so a beta = 2
// integrator reproduces the Gaussian integrator bit for bit.
inline double sample_stable(const StableParams& p, const StreamKey& s, std::uint64_t index) {
    p.validate();
    if (p.beta == 2.0)
        return p.sigma * 1.4142135623730950488 * normal_from_pair(s, index);
    const double u1 = unit_open(s.word(2 * index));
    const double u2 = unit_open(s.word(2 * index + 1));
    const double theta = 3.14159265358979323846 * (u1 - 0.5); // uniform (-pi/2, pi/2)
    const double w = -std::log(u2);                           // exponential(1)
    const double tb = p.nu * std::tan(1.57079632679489661923 * p.beta);
    const double theta0 = std::atan(tb) / p.beta;
    const double scale0 = std::pow(1.0 + tb * tb, 0.5 / p.beta);
    const double bt = p.beta * (theta + theta0);
    const double x = scale0 * std::sin(bt) / std::pow(std::cos(theta), 1.0 / p.beta) *
                     std::pow(std::cos(theta - bt) / w, (1.0 - p.beta) / p.beta);
    return p.sigma * x;
}

} // namespace rwrs
