// waveform.hpp - bit handling, PSK and chirp modulation, interleaved
// subcarrier mapping, and the transmit chains for the DFT-s-OFDM, OFDM, and
// AFDM waveform families with optional chirp modulation.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmwave/numerics.hpp"

namespace cmwave {

using Signal = std::vector<cplx>;
using BitVec = std::vector<std::uint8_t>;

enum class Waveform {
    DftSOfdm,
    ChirpedDftSOfdm,
    DftSOfdmCm,
    Ofdm,
    Afdm,
    AfdmCm,
};

enum class ChirpDirection { Up, Down, Combined };

inline bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

inline std::size_t ilog2(std::size_t v) {
    std::size_t bits = 0;
    while (v > 1) {
        v >>= 1;
        ++bits;
    }
    return bits;
}

inline bool uses_chirp_modulation(Waveform w) {
    return w == Waveform::DftSOfdmCm || w == Waveform::AfdmCm;
}

inline bool uses_dft_spreading(Waveform w) {
    return w == Waveform::DftSOfdm || w == Waveform::ChirpedDftSOfdm ||
           w == Waveform::DftSOfdmCm;
}

inline bool is_afdm_family(Waveform w) {
    return w == Waveform::Afdm || w == Waveform::AfdmCm;
}

inline std::string waveform_name(Waveform w) {
    switch (w) {
        case Waveform::DftSOfdm: return "dft_s_ofdm";
        case Waveform::ChirpedDftSOfdm: return "chirped_dft_s_ofdm";
        case Waveform::DftSOfdmCm: return "dft_s_ofdm_cm";
        case Waveform::Ofdm: return "ofdm";
        case Waveform::Afdm: return "afdm";
        case Waveform::AfdmCm: return "afdm_cm";
    }
    throw std::invalid_argument("waveform_name: unknown waveform");
}

/**
 * Full description of one multi-user transmission scheme.
 *
 * N subcarriers are shared by U users through interleaved mapping: user u owns
 * subcarriers I_u, I_u + N/M, ..., I_u + (M-1) N/M with 1-based I_u. The chirp
 * modulation order P encodes log2(P) extra bits per user in the starting
 * frequency of the chirp; P = 1 means the chirp carries no bits.
 */
struct SystemConfig {
    Waveform waveform = Waveform::DftSOfdmCm;
    std::size_t N = 8;   // total subcarriers (IFFT size)
    std::size_t M = 2;   // symbols per user (DFT size)
    std::size_t U = 1;   // users
    std::size_t Q = 2;   // PSK order
    std::size_t P = 2;   // chirp modulation order (1 = no chirp bits)
    double chirp_rate = 1.0 / 8.0;  // c_r, cycles per sample^2
    ChirpDirection chirp_direction = ChirpDirection::Up;
    std::size_t cp_len = 0;
    std::vector<std::size_t> user_subcarrier_indices;  // I_u, 1-based
    double afdm_c1 = 0.0;
    double afdm_c2 = 0.0;
    // Fixed shift applied to the chirp of the chirped (non-CM) waveform; a
    // chirped DFT-s-OFDM run with shift k behaves like the CM waveform with
    // its chirp bits pinned to the value k.
    std::size_t chirped_shift = 0;

    std::size_t stride() const { return N / M; }

    std::size_t chirp_bit_count() const {
        return uses_chirp_modulation(waveform) ? ilog2(P) : 0;
    }
    std::size_t symbol_bit_count() const { return M * ilog2(Q); }
    std::size_t direction_bit_count() const {
        return chirp_direction == ChirpDirection::Combined ? 1 : 0;
    }
    std::size_t bits_per_user() const {
        return direction_bit_count() + chirp_bit_count() + symbol_bit_count();
    }
    std::size_t total_bits() const { return U * bits_per_user(); }

    void validate() const {
        if (N == 0 || M == 0 || U == 0) {
            throw std::invalid_argument("SystemConfig: N, M, U must be positive");
        }
        if (N % M != 0) throw std::invalid_argument("SystemConfig: N must be a multiple of M");
        if (!is_power_of_two(Q) || Q < 2) {
            throw std::invalid_argument("SystemConfig: Q must be a power of two >= 2");
        }
        if (!is_power_of_two(P) || P > N) {
            throw std::invalid_argument("SystemConfig: P must be a power of two <= N");
        }
        if (!uses_chirp_modulation(waveform) && P != 1) {
            throw std::invalid_argument(
                "SystemConfig: P > 1 requires a chirp-modulated waveform");
        }
        if (chirp_direction == ChirpDirection::Combined &&
            waveform != Waveform::DftSOfdmCm) {
            throw std::invalid_argument(
                "SystemConfig: combined up/down mode applies to DFT-s-OFDM-CM only");
        }
        if (is_afdm_family(waveform) && chirp_direction != ChirpDirection::Up) {
            throw std::invalid_argument("SystemConfig: AFDM chirps are up-chirps");
        }
        if (user_subcarrier_indices.size() != U) {
            throw std::invalid_argument(
                "SystemConfig: need one subcarrier index per user");
        }
        for (std::size_t u = 0; u < U; ++u) {
            const std::size_t iu = user_subcarrier_indices[u];
            if (iu < 1 || iu > stride()) {
                throw std::invalid_argument("SystemConfig: subcarrier index out of range");
            }
            for (std::size_t v = u + 1; v < U; ++v) {
                if (user_subcarrier_indices[v] == iu) {
                    throw std::invalid_argument(
                        "SystemConfig: subcarrier indices must be distinct");
                }
            }
        }
        if (chirped_shift >= N) {
            throw std::invalid_argument("SystemConfig: chirped_shift must be less than N");
        }
    }
};

/// Convenience builder with I_u = 1..U and the default chirp rate 1/N.
inline SystemConfig make_config(Waveform w, std::size_t n, std::size_t m, std::size_t u,
                                std::size_t q, std::size_t p, std::size_t cp_len = 0) {
    SystemConfig cfg;
    cfg.waveform = w;
    cfg.N = n;
    cfg.M = m;
    cfg.U = u;
    cfg.Q = q;
    cfg.P = p;
    cfg.chirp_rate = 1.0 / static_cast<double>(n);
    cfg.cp_len = cp_len;
    cfg.user_subcarrier_indices.resize(u);
    for (std::size_t i = 0; i < u; ++i) cfg.user_subcarrier_indices[i] = i + 1;
    cfg.validate();
    return cfg;
}

/// One user's payload, split into its chirp and constellation parts.
struct UserMessage {
    BitVec chirp_bits;
    BitVec symbol_bits;
    std::optional<int> direction_bit;  // combined mode only; 0 = up, 1 = down
};

inline double energy(const Signal& s) {
    double e = 0.0;
    for (const auto& v : s) e += std::norm(v);
    return e;
}

/// Split a per-user bit vector into [direction][chirp][symbol] parts.
inline UserMessage split_bits(const BitVec& bits, const SystemConfig& config) {
    if (bits.size() != config.bits_per_user()) {
        throw std::invalid_argument("split_bits: expected " +
                                    std::to_string(config.bits_per_user()) +
                                    " bits, got " + std::to_string(bits.size()));
    }
    UserMessage msg;
    std::size_t pos = 0;
    if (config.direction_bit_count() == 1) {
        msg.direction_bit = bits[pos++];
    }
    msg.chirp_bits.assign(bits.begin() + pos, bits.begin() + pos + config.chirp_bit_count());
    pos += config.chirp_bit_count();
    msg.symbol_bits.assign(bits.begin() + pos, bits.end());
    return msg;
}

/// Natural binary, most significant bit first: (1,1) -> 3.
inline std::size_t chirp_index(const BitVec& chirp_bits) {
    std::size_t nu = 0;
    for (auto b : chirp_bits) nu = (nu << 1) | (b & 1u);
    return nu;
}

/**
 * Linear chirp c[n] = exp(+j pi rate n^2) for the up direction and its
 * conjugate for the down direction, n = 0..N-1. Every sample has unit modulus.
 */
inline Signal generate_chirp(std::size_t n_samples, double chirp_rate,
                             ChirpDirection direction) {
    if (n_samples == 0) throw std::invalid_argument("generate_chirp: need at least 1 sample");
    if (direction == ChirpDirection::Combined) {
        throw std::invalid_argument("generate_chirp: direction must be up or down");
    }
    const double sign = direction == ChirpDirection::Down ? -1.0 : 1.0;
    Signal c(n_samples);
    for (std::size_t n = 0; n < n_samples; ++n) {
        const double nn = static_cast<double>(n);
        c[n] = std::polar(1.0, sign * std::numbers::pi * chirp_rate * nn * nn);
    }
    return c;
}

/**
 * Circular left shift by nu positions: out[n] = c[(n + nu) mod N], moving the
 * chirp's starting frequency to bin nu. nu = N (one full rotation) is allowed
 * and returns the signal unchanged.
 */
inline Signal chirp_modulate(const Signal& c, std::size_t nu) {
    const std::size_t n = c.size();
    if (nu > n) throw std::invalid_argument("chirp_modulate: shift exceeds signal length");
    Signal out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = c[(i + nu) % n];
    return out;
}

/// 0-based row of subcarrier m for user u under interleaved mapping.
inline std::size_t subcarrier_row(const SystemConfig& config, std::size_t u, std::size_t m) {
    return (config.user_subcarrier_indices[u] - 1) + m * config.stride();
}

/// N x M selection matrix P_u = I_N(:, I_u : N/M : N); satisfies P^T P = I_M.
inline ComplexMatrix mapping_matrix(const SystemConfig& config, std::size_t u) {
    config.validate();
    if (u >= config.U) throw std::invalid_argument("mapping_matrix: user index out of range");
    ComplexMatrix p(config.N, config.M);
    for (std::size_t m = 0; m < config.M; ++m) p(subcarrier_row(config, u, m), m) = 1.0;
    return p;
}

namespace detail {

/// Binary value of a Gray code word.
inline std::size_t gray_to_binary(std::size_t g) {
    std::size_t mask = g >> 1;
    while (mask != 0) {
        g ^= mask;
        mask >>= 1;
    }
    return g;
}

}  // namespace detail

/**
 * Gray-labeled unit-energy Q-PSK table indexed by the bit value of a symbol.
 * QPSK sits at odd multiples of pi/4; other orders start at angle zero.
 */
inline std::vector<cplx> psk_symbol_table(std::size_t q) {
    if (!is_power_of_two(q) || q < 2) {
        throw std::invalid_argument("psk_symbol_table: constellation order must be a power of two >= 2");
    }
    const double offset = q == 4 ? std::numbers::pi / 4.0 : 0.0;
    std::vector<cplx> table(q);
    for (std::size_t bits = 0; bits < q; ++bits) {
        const std::size_t k = detail::gray_to_binary(bits);
        table[bits] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) /
                                          static_cast<double>(q) + offset);
    }
    return table;
}

/// Map a bit list to PSK symbols, log2(Q) bits per symbol, MSB first.
inline std::vector<cplx> psk_map(const BitVec& symbol_bits, std::size_t q) {
    const std::size_t bps = ilog2(q);
    if (!is_power_of_two(q) || q < 2) {
        throw std::invalid_argument("psk_map: constellation order must be a power of two >= 2");
    }
    if (symbol_bits.size() % bps != 0) {
        throw std::invalid_argument("psk_map: bit count must be a multiple of log2(Q)");
    }
    const auto table = psk_symbol_table(q);
    std::vector<cplx> symbols(symbol_bits.size() / bps);
    for (std::size_t s = 0; s < symbols.size(); ++s) {
        std::size_t value = 0;
        for (std::size_t b = 0; b < bps; ++b) value = (value << 1) | symbol_bits[s * bps + b];
        symbols[s] = table[value];
    }
    return symbols;
}

namespace detail {

/// Forward roots of unity exp(-j 2 pi k / n), cached per size (node-stable).
inline const std::vector<cplx>& unit_roots(std::size_t n) {
    thread_local std::map<std::size_t, std::vector<cplx>> cache;
    const auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<cplx> roots(n);
    for (std::size_t k = 0; k < n; ++k) {
        roots[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) /
                                       static_cast<double>(n));
    }
    return cache.emplace(n, std::move(roots)).first->second;
}

}  // namespace detail

/// Direct unitary DFT of a signal; O(n^2), which is plenty at these sizes.
inline Signal dft(const Signal& x, bool inverse = false) {
    const std::size_t n = x.size();
    if (n == 0) throw std::invalid_argument("dft: empty signal");
    const auto& roots = detail::unit_roots(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    Signal y(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc{0.0, 0.0};
        for (std::size_t m = 0; m < n; ++m) {
            const cplx w = roots[(k * m) % n];
            acc += x[m] * (inverse ? std::conj(w) : w);
        }
        y[k] = acc * scale;
    }
    return y;
}

namespace detail {

inline Signal afdm_c2_apply(const SystemConfig& config, Signal mapped) {
    if (config.afdm_c2 != 0.0) {
        for (std::size_t n = 0; n < mapped.size(); ++n) {
            const double nn = static_cast<double>(n);
            mapped[n] *= std::polar(1.0, 2.0 * std::numbers::pi * config.afdm_c2 * nn * nn);
        }
    }
    return mapped;
}

/// Chirp diagonal for the configured waveform, already shifted by nu.
inline Signal chirp_diag(const SystemConfig& config, std::size_t nu, ChirpDirection dir) {
    if (is_afdm_family(config.waveform)) {
        // First AFDM chirp exp(j 2 pi c1 n^2); rate 2*c1 in the pi-convention.
        return chirp_modulate(generate_chirp(config.N, 2.0 * config.afdm_c1,
                                             ChirpDirection::Up),
                              nu);
    }
    return chirp_modulate(generate_chirp(config.N, config.chirp_rate, dir), nu);
}

}  // namespace detail

/**
 * Transmit chain from explicit per-user choices (chirp shift, symbol indices).
 * symbol_indices holds the raw bit value of each constellation symbol.
 *
 * Chains, all energy-preserving:
 *   DFT-s-OFDM        F_N^H P_u F_M x
 *   chirped           C(shift)        . F_N^H P_u F_M x
 *   DFT-s-OFDM-CM     C_dir(nu)       . F_N^H P_u F_M x
 *   OFDM              F_N^H P_u x
 *   AFDM              C1(0)           . F_N^H C2 P_u x
 *   AFDM-CM           C1(nu)          . F_N^H C2 P_u x
 */
inline Signal modulate_indices(const SystemConfig& config, std::size_t u, std::size_t nu,
                               const std::vector<std::size_t>& symbol_indices,
                               ChirpDirection direction) {
    if (u >= config.U) throw std::invalid_argument("modulate_indices: user index out of range");
    if (symbol_indices.size() != config.M) {
        throw std::invalid_argument("modulate_indices: need M symbol indices");
    }
    const auto table = psk_symbol_table(config.Q);
    Signal x(config.M);
    for (std::size_t m = 0; m < config.M; ++m) {
        if (symbol_indices[m] >= config.Q) {
            throw std::invalid_argument("modulate_indices: symbol index out of range");
        }
        x[m] = table[symbol_indices[m]];
    }

    const Signal spread = uses_dft_spreading(config.waveform) ? dft(x, false) : x;

    Signal mapped(config.N, cplx{0.0, 0.0});
    for (std::size_t m = 0; m < config.M; ++m) {
        mapped[subcarrier_row(config, u, m)] = spread[m];
    }
    if (is_afdm_family(config.waveform)) {
        mapped = detail::afdm_c2_apply(config, std::move(mapped));
    }

    Signal time = dft(mapped, true);

    switch (config.waveform) {
        case Waveform::DftSOfdm:
        case Waveform::Ofdm:
            break;
        case Waveform::ChirpedDftSOfdm: {
            const Signal c = detail::chirp_diag(config, config.chirped_shift, direction);
            for (std::size_t n = 0; n < config.N; ++n) time[n] *= c[n];
            break;
        }
        case Waveform::DftSOfdmCm:
        case Waveform::Afdm:
        case Waveform::AfdmCm: {
            if (nu >= std::max<std::size_t>(config.P, 1)) {
                throw std::invalid_argument("modulate_indices: chirp index out of range");
            }
            const Signal c = detail::chirp_diag(config, nu, direction);
            for (std::size_t n = 0; n < config.N; ++n) time[n] *= c[n];
            break;
        }
    }
    return time;
}

/// Resolve the chirp direction for one message under the configured mode.
inline ChirpDirection resolve_direction(const SystemConfig& config, const UserMessage& msg) {
    if (config.chirp_direction != ChirpDirection::Combined) return config.chirp_direction;
    if (!msg.direction_bit.has_value()) {
        throw std::invalid_argument("modulate: combined mode requires a direction bit");
    }
    return *msg.direction_bit == 0 ? ChirpDirection::Up : ChirpDirection::Down;
}

/// Length-N time-domain signal of user u for one message.
inline Signal modulate(const SystemConfig& config, const UserMessage& msg, std::size_t u) {
    config.validate();
    if (msg.chirp_bits.size() != config.chirp_bit_count() ||
        msg.symbol_bits.size() != config.symbol_bit_count() ||
        msg.direction_bit.has_value() != (config.direction_bit_count() == 1)) {
        throw std::invalid_argument("modulate: message does not match configuration");
    }
    const std::size_t nu = chirp_index(msg.chirp_bits);
    const std::size_t bps = ilog2(config.Q);
    std::vector<std::size_t> indices(config.M);
    for (std::size_t m = 0; m < config.M; ++m) {
        std::size_t value = 0;
        for (std::size_t b = 0; b < bps; ++b) {
            value = (value << 1) | msg.symbol_bits[m * bps + b];
        }
        indices[m] = value;
    }
    return modulate_indices(config, u, nu, indices, resolve_direction(config, msg));
}

/// Prepend the last cp_len samples.
inline Signal add_cp(const Signal& s, std::size_t cp_len) {
    if (cp_len >= s.size()) {
        throw std::invalid_argument("add_cp: prefix must be shorter than the signal");
    }
    Signal out;
    out.reserve(s.size() + cp_len);
    out.insert(out.end(), s.end() - static_cast<std::ptrdiff_t>(cp_len), s.end());
    out.insert(out.end(), s.begin(), s.end());
    return out;
}

/// Drop the first cp_len samples.
inline Signal remove_cp(const Signal& s, std::size_t cp_len) {
    if (s.size() <= cp_len) {
        throw std::invalid_argument("remove_cp: signal shorter than prefix");
    }
    return Signal(s.begin() + static_cast<std::ptrdiff_t>(cp_len), s.end());
}

}  // namespace cmwave
