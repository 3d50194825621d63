#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace tmag {

/// Permeability of free space [H/m].
inline constexpr double kMu0 = 4.0e-7 * 3.14159265358979323846;

/// Fraction of B_sat above which the magnet counts as saturated.
inline constexpr double kSaturationFraction = 0.98;

/// Error type for all domain failures (bad input, no intersection, timeouts).
class TmagError : public std::runtime_error {
public:
    explicit TmagError(const std::string& what) : std::runtime_error(what) {}
};

/// Deterministic, platform-independent RNG (splitmix64 core).
/// One instance per simulation; campaign cells derive independent
/// substreams by mixing the master seed with cell/cycle indices.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Gaussian sample via Box-Muller (no state caching, two uniforms per draw).
    double gaussian(double mean, double sigma) {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * r * std::cos(6.28318530717958647692 * u2);
    }

    /// Derive an independent substream seed from this RNG's seed and salts.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
        Rng r(seed ^ (a * 0xD1342543DE82EF95ull) ^ (b * 0xAF251AF3B0F025B5ull));
        return r.next_u64();
    }

private:
    std::uint64_t state_;
};

}  // namespace tmag
