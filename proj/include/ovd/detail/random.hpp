#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace ovd::detail {

/// splitmix64 step; used to derive independent sub-seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Mixes a master seed with stream identifiers into a new seed.
/// Deterministic and order-sensitive: mix(s, a, b) != mix(s, b, a).
template <typename... Ids>
std::uint64_t mix_seed(std::uint64_t master, Ids... ids) {
    std::uint64_t state = master;
    std::uint64_t out = splitmix64(state);
    ((state ^= static_cast<std::uint64_t>(ids), out = splitmix64(state)), ...);
    return out;
}

/// Seeded generator with explicitly-specified draw formulas so that streams
/// are reproducible bit-for-bit (std::mt19937_64 output is fixed by the
/// standard; the distributions below avoid the implementation-defined
/// std::*_distribution classes).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Rejection-free modulo is fine here: n is tiny compared to 2^64.
        return engine_() % n;
    }

    /// Standard normal via Box-Muller (second variate discarded).
    double normal() {
        const double u1 = open_unit();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Circularly-symmetric complex Gaussian with E[|z|^2] = power.
    std::complex<double> complex_normal(double power) {
        const double u1 = open_unit();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1)) * std::sqrt(power / 2.0);
        return {r * std::cos(2.0 * std::numbers::pi * u2),
                r * std::sin(2.0 * std::numbers::pi * u2)};
    }

    std::mt19937_64& engine() { return engine_; }

private:
    // Uniform in (0, 1]; keeps log() finite.
    double open_unit() {
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

    std::mt19937_64 engine_;
};

} // namespace ovd::detail
