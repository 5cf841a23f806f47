#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace nnscore {

namespace detail {
// SplitMix64 finalizer (Steele et al.), used purely as a seed mixer.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}
}  // namespace detail

/// Derives an independent stream seed from a master seed and up to three
/// counters (point index, repetition index, stage, ...). The derivation is a
/// pure function, so work items produce identical streams no matter which
/// worker executes them.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    std::uint64_t s = detail::mix64(master ^ 0x4e4e53434f524531ull);
    s = detail::mix64(s ^ a);
    s = detail::mix64(s ^ b);
    s = detail::mix64(s ^ c);
    return s;
}

/// Deterministic random stream. Variate generation is spelled out here
/// (53-bit uniforms, Box-Muller normals) instead of using <random>
/// distributions, whose output is implementation-defined.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound). bound must be nonzero.
    std::uint64_t uniform_index(std::uint64_t bound) {
        // Rejection to remove modulo bias.
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        std::uint64_t draw;
        do {
            draw = engine_();
        } while (draw >= limit);
        return draw % bound;
    }

    /// Standard normal via Box-Muller; the paired variate is cached.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        cached_ = radius * std::sin(angle);
        has_cached_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace nnscore
