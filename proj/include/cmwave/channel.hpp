// channel.hpp - delay-Doppler multipath channel: sampling, the time-domain
// channel matrix, channel application, and Eb/N0-calibrated noise.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cmwave/numerics.hpp"
#include "cmwave/rng.hpp"
#include "cmwave/waveform.hpp"

namespace cmwave {

/**
 * Channel statistics. Dopplers are drawn uniformly in +-f_max and normalized
 * to the subcarrier spacing; path gains are i.i.d. CN(0, 1/L). Integer delays
 * default to the fixed profile {0, ..., L-1} so repeated runs see the same
 * delay spread; random_delays switches to distinct uniform delays within
 * [0, max_delay].
 */
struct ChannelParams {
    std::size_t L = 3;                       // paths per user
    double max_doppler_hz = 2000.0;          // f_max
    double subcarrier_spacing_hz = 15000.0;  // delta f
    double carrier_hz = 4.0e9;               // f_c (informative)
    double velocity_kmh = 500.0;             // v (informative)
    std::size_t max_delay = 2;               // largest delay in samples
    bool random_delays = false;

    double normalized_max_doppler() const {
        return max_doppler_hz / subcarrier_spacing_hz;
    }

    /// Largest delay any realization drawn from these parameters can have.
    std::size_t delay_span() const { return random_delays ? max_delay : L - 1; }

    void validate() const {
        if (L == 0) throw std::invalid_argument("ChannelParams: need at least one path");
        if (max_doppler_hz < 0.0 || subcarrier_spacing_hz <= 0.0) {
            throw std::invalid_argument("ChannelParams: bad Doppler or spacing");
        }
        if (random_delays && max_delay + 1 < L) {
            throw std::invalid_argument(
                "ChannelParams: max_delay too small for distinct delays");
        }
    }
};

struct Path {
    cplx gain{0.0, 0.0};
    double doppler = 0.0;   // normalized to subcarrier spacing
    std::size_t delay = 0;  // samples
};

struct ChannelRealization {
    std::vector<std::vector<Path>> users;  // users[u][p]
};

/**
 * Draw one realization for U users. Per user the draws are: delays (one
 * shuffle, random mode only), then gain and Doppler for each path in order.
 */
inline ChannelRealization sample_channel(const ChannelParams& params, std::size_t u_count,
                                         RandomStream& rng) {
    params.validate();
    const double fbar = params.normalized_max_doppler();
    ChannelRealization realization;
    realization.users.resize(u_count);
    for (std::size_t u = 0; u < u_count; ++u) {
        std::vector<std::size_t> delays(params.L);
        if (params.random_delays) {
            std::vector<std::size_t> pool(params.max_delay + 1);
            std::iota(pool.begin(), pool.end(), std::size_t{0});
            for (std::size_t p = 0; p < params.L; ++p) {
                const std::size_t pick =
                    p + static_cast<std::size_t>(rng.uniform() *
                                                 static_cast<double>(pool.size() - p));
                std::swap(pool[p], pool[std::min(pick, pool.size() - 1)]);
                delays[p] = pool[p];
            }
        } else {
            std::iota(delays.begin(), delays.end(), std::size_t{0});
        }
        auto& paths = realization.users[u];
        paths.resize(params.L);
        for (std::size_t p = 0; p < params.L; ++p) {
            paths[p].gain = rng.complex_gaussian(1.0 / static_cast<double>(params.L));
            paths[p].doppler = fbar > 0.0 ? rng.uniform(-fbar, fbar) : 0.0;
            paths[p].delay = delays[p];
        }
    }
    return realization;
}

/**
 * Time-domain channel matrix H = sum_p h_p D_p Pi^{l_p} with
 * D_p = diag(1, e^{j 2 pi v_p / N}, ..., e^{j 2 pi v_p (N-1)/N}).
 */
inline ComplexMatrix channel_matrix(const std::vector<Path>& paths, std::size_t n) {
    ComplexMatrix h(n, n);
    for (const auto& path : paths) {
        if (path.delay >= n) {
            throw std::invalid_argument("channel_matrix: path delay must be less than N");
        }
        for (std::size_t row = 0; row < n; ++row) {
            const double phase = 2.0 * std::numbers::pi * path.doppler *
                                 static_cast<double>(row) / static_cast<double>(n);
            h(row, (row + n - path.delay) % n) += path.gain * std::polar(1.0, phase);
        }
    }
    return h;
}

/// Apply one user's paths to a length-N block: (H s) without building H.
inline Signal apply_paths(const std::vector<Path>& paths, const Signal& s) {
    const std::size_t n = s.size();
    Signal y(n, cplx{0.0, 0.0});
    for (const auto& path : paths) {
        if (path.delay >= n) {
            throw std::invalid_argument("apply_paths: path delay must be less than N");
        }
        for (std::size_t row = 0; row < n; ++row) {
            const double phase = 2.0 * std::numbers::pi * path.doppler *
                                 static_cast<double>(row) / static_cast<double>(n);
            y[row] += path.gain * std::polar(1.0, phase) * s[(row + n - path.delay) % n];
        }
    }
    return y;
}

/**
 * r = sum_u H_u s_u + w with w circularly-symmetric complex Gaussian of
 * per-sample variance sigma2. All signals must share one block length.
 */
inline Signal apply_channel(const std::vector<Signal>& tx,
                            const ChannelRealization& realization, double sigma2,
                            RandomStream& rng) {
    if (tx.empty() || tx.size() != realization.users.size()) {
        throw std::invalid_argument("apply_channel: one transmit signal per user required");
    }
    const std::size_t n = tx.front().size();
    Signal r(n, cplx{0.0, 0.0});
    for (std::size_t u = 0; u < tx.size(); ++u) {
        if (tx[u].size() != n) {
            throw std::invalid_argument("apply_channel: signal lengths differ");
        }
        const Signal y = apply_paths(realization.users[u], tx[u]);
        for (std::size_t i = 0; i < n; ++i) r[i] += y[i];
    }
    if (sigma2 > 0.0) {
        for (std::size_t i = 0; i < n; ++i) r[i] += rng.complex_gaussian(sigma2);
    }
    return r;
}

/**
 * Noise variance that realizes a requested Eb/N0.
 *
 * With unit-energy constellation symbols every user's block carries energy M,
 * so the block energy is U*M, and the block carries U * bits_per_user
 * information bits (chirp, symbol, and direction bits all count as payload).
 * Eb is their ratio and sigma2 = Eb / 10^(ebn0_db / 10).
 */
inline double noise_variance_for_ebn0(const SystemConfig& config, double ebn0_db) {
    config.validate();
    const double eb = static_cast<double>(config.M) /
                      static_cast<double>(config.bits_per_user());
    return eb * std::pow(10.0, -ebn0_db / 10.0);
}

}  // namespace cmwave
