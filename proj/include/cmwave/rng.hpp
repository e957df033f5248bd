// rng.hpp - seeded random streams for deterministic Monte Carlo runs.
//
// Every trial gets its own stream derived from (master_seed, point, trial),
// so results do not depend on how trials are scheduled across threads.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace cmwave {

/// Stateless 64-bit finalizer (splitmix64 output function).
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derive an independent stream seed for one trial of one sweep point.
inline std::uint64_t derive_stream_seed(std::uint64_t master_seed,
                                        std::uint64_t point_index,
                                        std::uint64_t trial_index) {
    std::uint64_t h = mix64(master_seed);
    h = mix64(h ^ (0xA24BAED4963EE407ULL * (point_index + 1)));
    h = mix64(h ^ (0x9FB21C651E98DF25ULL * (trial_index + 1)));
    return h;
}

/**
 * Seeded random stream used by channel sampling, bit generation, and noise.
 *
 * Draw order is part of the reproducibility contract: callers that share a
 * stream must draw in a fixed sequence (the harness draws channel, then bits,
 * then noise).
 */
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    static RandomStream for_trial(std::uint64_t master_seed,
                                  std::uint64_t point_index,
                                  std::uint64_t trial_index) {
        return RandomStream(derive_stream_seed(master_seed, point_index, trial_index));
    }

    /// Uniform double in [0, 1).
    double uniform() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    /// Standard normal draw.
    double gaussian() {
        return std::normal_distribution<double>(0.0, 1.0)(engine_);
    }

    /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
    std::complex<double> complex_gaussian(double variance) {
        const double scale = std::sqrt(variance / 2.0);
        return {scale * gaussian(), scale * gaussian()};
    }

    int bit() { return static_cast<int>(engine_() & 1u); }

    std::vector<std::uint8_t> bits(std::size_t count) {
        std::vector<std::uint8_t> out(count);
        for (auto& b : out) b = static_cast<std::uint8_t>(bit());
        return out;
    }

    std::uint64_t raw() { return engine_(); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace cmwave
