// receiver.hpp - joint multi-user maximum-likelihood detection over chirp
// indices and constellation symbols, with bit-error accounting.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cmwave/channel.hpp"
#include "cmwave/waveform.hpp"

namespace cmwave {

/// Thrown when the joint candidate space exceeds the enumeration cap.
class SearchSpaceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultCandidateCap = std::size_t{1} << 24;

/// One user's hypothesis: optional chirp direction, chirp index, symbol values.
struct PerUserChoice {
    std::optional<int> direction;            // 0 = up, 1 = down (combined mode)
    std::size_t nu = 0;                      // chirp index
    std::vector<std::size_t> symbol_indices; // bit value of each symbol
};

/// Joint hypothesis over all users plus its bit labeling.
struct CandidateMessage {
    std::vector<PerUserChoice> users;
    BitVec bit_label;
    std::size_t candidate_index = 0;
};

struct DetectionResult {
    CandidateMessage decided;
    double metric = 0.0;  // residual norm at the decision
    std::size_t bit_errors = 0;
    std::size_t total_bits = 0;
};

/// Candidates per user: directions x P x Q^M.
inline std::size_t per_user_candidate_count(const SystemConfig& config) {
    std::size_t count = config.direction_bit_count() == 1 ? 2 : 1;
    count *= std::max<std::size_t>(config.P, 1);
    for (std::size_t m = 0; m < config.M; ++m) count *= config.Q;
    return count;
}

/// Joint candidate count, guarded against the enumeration cap.
inline std::size_t candidate_count(const SystemConfig& config,
                                   std::size_t cap = kDefaultCandidateCap) {
    const std::size_t per_user = per_user_candidate_count(config);
    std::size_t total = 1;
    for (std::size_t u = 0; u < config.U; ++u) {
        if (total > cap / per_user) {
            throw SearchSpaceError("candidate space exceeds enumeration cap");
        }
        total *= per_user;
    }
    return total;
}

namespace detail {

/// Decode one user's sub-candidate index into (direction, nu, symbols).
inline PerUserChoice decode_user_choice(const SystemConfig& config, std::size_t j) {
    PerUserChoice choice;
    std::size_t q_pow = 1;
    for (std::size_t m = 0; m < config.M; ++m) q_pow *= config.Q;
    const std::size_t p = std::max<std::size_t>(config.P, 1);
    if (config.direction_bit_count() == 1) {
        choice.direction = static_cast<int>(j / (p * q_pow));
        j %= p * q_pow;
    }
    choice.nu = j / q_pow;
    j %= q_pow;
    choice.symbol_indices.resize(config.M);
    for (std::size_t m = 0; m < config.M; ++m) {
        std::size_t divisor = 1;
        for (std::size_t k = m + 1; k < config.M; ++k) divisor *= config.Q;
        choice.symbol_indices[m] = (j / divisor) % config.Q;
    }
    return choice;
}

inline void append_msb_bits(BitVec& out, std::size_t value, std::size_t bit_count) {
    for (std::size_t b = 0; b < bit_count; ++b) {
        out.push_back(static_cast<std::uint8_t>((value >> (bit_count - 1 - b)) & 1u));
    }
}

inline void append_user_label(BitVec& out, const SystemConfig& config,
                              const PerUserChoice& choice) {
    if (config.direction_bit_count() == 1) {
        out.push_back(static_cast<std::uint8_t>(*choice.direction & 1));
    }
    append_msb_bits(out, choice.nu, config.chirp_bit_count());
    const std::size_t bps = ilog2(config.Q);
    for (const auto idx : choice.symbol_indices) append_msb_bits(out, idx, bps);
}

}  // namespace detail

/// Build the full candidate for one joint index (user 1 outermost digit).
inline CandidateMessage candidate_from_index(const SystemConfig& config, std::size_t index) {
    const std::size_t per_user = per_user_candidate_count(config);
    CandidateMessage cand;
    cand.candidate_index = index;
    cand.users.resize(config.U);
    for (std::size_t u = config.U; u-- > 0;) {
        cand.users[u] = detail::decode_user_choice(config, index % per_user);
        index /= per_user;
    }
    cand.bit_label.reserve(config.total_bits());
    for (std::size_t u = 0; u < config.U; ++u) {
        detail::append_user_label(cand.bit_label, config, cand.users[u]);
    }
    return cand;
}

/**
 * All joint candidates in lexicographic order: user 1 is the outermost digit;
 * within a user the direction (if any) varies slowest, then the chirp index,
 * then the symbol indices.
 */
inline std::vector<CandidateMessage> enumerate_candidates(
    const SystemConfig& config, std::size_t cap = kDefaultCandidateCap) {
    config.validate();
    const std::size_t total = candidate_count(config, cap);
    std::vector<CandidateMessage> out;
    out.reserve(total);
    for (std::size_t i = 0; i < total; ++i) out.push_back(candidate_from_index(config, i));
    return out;
}

/// Hamming distance between the bit labels of two candidates.
inline std::size_t count_bit_errors(const CandidateMessage& a, const CandidateMessage& b) {
    if (a.bit_label.size() != b.bit_label.size()) {
        throw std::invalid_argument("count_bit_errors: bit label lengths differ");
    }
    std::size_t errors = 0;
    for (std::size_t i = 0; i < a.bit_label.size(); ++i) {
        errors += a.bit_label[i] != b.bit_label[i];
    }
    return errors;
}

/**
 * Exhaustive joint ML detector.
 *
 * For a given channel realization it caches y_{u,j} = H_u s_u(j) for every
 * user u and per-user sub-candidate j, then minimizes
 * || r - sum_u y_{u,j_u} || over all joint candidates by depth-first partial
 * residuals. Ties resolve to the lowest candidate index because the search
 * visits candidates in lexicographic order and only accepts strict
 * improvements. The cache is immutable during detect(), so one detector can
 * serve concurrent reads; the harness keeps one instance per worker.
 */
class MlDetector {
public:
    explicit MlDetector(const SystemConfig& config, std::size_t cap = kDefaultCandidateCap)
        : config_(config), per_user_(per_user_candidate_count(config)) {
        config_.validate();
        total_candidates_ = candidate_count(config_, cap);
        contributions_.resize(config_.U,
                              std::vector<Signal>(per_user_, Signal(config_.N)));
        partial_.resize(config_.U + 1, Signal(config_.N));
        choice_stack_.resize(config_.U, 0);
        best_choices_.resize(config_.U, 0);
        choices_.resize(per_user_);
        for (std::size_t j = 0; j < per_user_; ++j) {
            choices_[j] = detail::decode_user_choice(config_, j);
        }
        build_synthesis_tables();
    }

    const SystemConfig& config() const { return config_; }

    /// Noiseless transmit signal of sub-candidate j for user u (cached chain).
    Signal transmit_signal(std::size_t u, std::size_t j) const {
        const std::size_t n = config_.N;
        const auto& choice = choices_[j];
        std::size_t s_index = 0;
        for (const auto sym : choice.symbol_indices) s_index = s_index * config_.Q + sym;
        Signal s(n);
        const Signal& base = bases_[u][s_index];
        const Signal& chirp = chirps_[chirp_slot(choice)];
        for (std::size_t i = 0; i < n; ++i) s[i] = base[i] * chirp[i];
        return s;
    }

    /// Rebuild the per-candidate cache for a new channel realization.
    void set_realization(const ChannelRealization& realization) {
        if (realization.users.size() != config_.U) {
            throw std::invalid_argument("MlDetector: realization user count mismatch");
        }
        const std::size_t n = config_.N;
        for (std::size_t u = 0; u < config_.U; ++u) {
            // Doppler phase ramps with the path gain folded in.
            const auto& paths = realization.users[u];
            ramps_.assign(paths.size(), Signal(n));
            for (std::size_t p = 0; p < paths.size(); ++p) {
                if (paths[p].delay >= n) {
                    throw std::invalid_argument("MlDetector: path delay must be less than N");
                }
                for (std::size_t row = 0; row < n; ++row) {
                    const double phase = 2.0 * std::numbers::pi * paths[p].doppler *
                                         static_cast<double>(row) / static_cast<double>(n);
                    ramps_[p][row] = paths[p].gain * std::polar(1.0, phase);
                }
            }
            for (std::size_t j = 0; j < per_user_; ++j) {
                const Signal s = transmit_signal(u, j);
                Signal& y = contributions_[u][j];
                std::fill(y.begin(), y.end(), cplx{0.0, 0.0});
                for (std::size_t p = 0; p < paths.size(); ++p) {
                    const std::size_t delay = paths[p].delay;
                    for (std::size_t row = 0; row < n; ++row) {
                        y[row] += ramps_[p][row] * s[(row + n - delay) % n];
                    }
                }
            }
        }
    }

    DetectionResult detect(const Signal& r) {
        if (r.size() != config_.N) {
            throw std::invalid_argument("MlDetector: received block length mismatch");
        }
        best_metric_ = std::numeric_limits<double>::infinity();
        partial_[0] = r;
        search(0);

        std::size_t index = 0;
        for (std::size_t u = 0; u < config_.U; ++u) {
            index = index * per_user_ + best_choices_[u];
        }
        DetectionResult result;
        result.decided = candidate_from_index(config_, index);
        result.metric = std::sqrt(best_metric_);
        result.total_bits = config_.total_bits();
        return result;
    }

private:
    /// Index into chirps_ for one per-user choice.
    std::size_t chirp_slot(const PerUserChoice& choice) const {
        if (!uses_chirp_modulation(config_.waveform)) return 0;
        if (choice.direction.has_value()) {
            return static_cast<std::size_t>(*choice.direction) * config_.P + choice.nu;
        }
        return choice.nu;
    }

    void build_synthesis_tables() {
        const std::size_t n = config_.N;

        // Chain matrix per user: everything between the symbols and the chirp.
        const ComplexMatrix idft_n = dft_matrix(n, true);
        chains_.clear();
        chains_.reserve(config_.U);
        for (std::size_t u = 0; u < config_.U; ++u) {
            ComplexMatrix pre = mapping_matrix(config_, u);  // N x M
            if (is_afdm_family(config_.waveform) && config_.afdm_c2 != 0.0) {
                for (std::size_t row = 0; row < n; ++row) {
                    const double rr = static_cast<double>(row);
                    const cplx c2 =
                        std::polar(1.0, 2.0 * std::numbers::pi * config_.afdm_c2 * rr * rr);
                    for (std::size_t col = 0; col < config_.M; ++col) pre(row, col) *= c2;
                }
            }
            if (uses_dft_spreading(config_.waveform)) {
                pre = pre * dft_matrix(config_.M, false);
            }
            chains_.push_back(idft_n * pre);
        }

        // Symbol bases per user: chain * x for every symbol combination.
        const auto table = psk_symbol_table(config_.Q);
        std::size_t combos = 1;
        for (std::size_t m = 0; m < config_.M; ++m) combos *= config_.Q;
        bases_.assign(config_.U, std::vector<Signal>(combos, Signal(n)));
        std::vector<std::size_t> syms(config_.M, 0);
        for (std::size_t s = 0; s < combos; ++s) {
            std::size_t rem = s;
            for (std::size_t m = config_.M; m-- > 0;) {
                syms[m] = rem % config_.Q;
                rem /= config_.Q;
            }
            for (std::size_t u = 0; u < config_.U; ++u) {
                Signal& base = bases_[u][s];
                for (std::size_t row = 0; row < n; ++row) {
                    cplx acc{0.0, 0.0};
                    for (std::size_t m = 0; m < config_.M; ++m) {
                        acc += chains_[u](row, m) * table[syms[m]];
                    }
                    base[row] = acc;
                }
            }
        }

        // Chirp diagonals. Slot 0 is the waveform's fixed chirp (or all ones);
        // chirp-modulated waveforms get one slot per (direction, nu).
        chirps_.clear();
        switch (config_.waveform) {
            case Waveform::DftSOfdm:
            case Waveform::Ofdm:
                chirps_.push_back(Signal(n, cplx{1.0, 0.0}));
                break;
            case Waveform::ChirpedDftSOfdm:
                chirps_.push_back(detail_chirp(config_.chirped_shift, config_.chirp_direction));
                break;
            case Waveform::Afdm:
                chirps_.push_back(detail_chirp(0, ChirpDirection::Up));
                break;
            case Waveform::DftSOfdmCm:
            case Waveform::AfdmCm: {
                const std::size_t dirs = config_.direction_bit_count() == 1 ? 2 : 1;
                for (std::size_t d = 0; d < dirs; ++d) {
                    const ChirpDirection dir =
                        (config_.chirp_direction == ChirpDirection::Combined
                             ? (d == 0 ? ChirpDirection::Up : ChirpDirection::Down)
                             : config_.chirp_direction);
                    for (std::size_t nu = 0; nu < config_.P; ++nu) {
                        chirps_.push_back(detail_chirp(nu, dir));
                    }
                }
                break;
            }
        }
    }

    Signal detail_chirp(std::size_t nu, ChirpDirection dir) const {
        if (is_afdm_family(config_.waveform)) {
            return chirp_modulate(
                generate_chirp(config_.N, 2.0 * config_.afdm_c1, ChirpDirection::Up), nu);
        }
        return chirp_modulate(generate_chirp(config_.N, config_.chirp_rate, dir), nu);
    }

    void search(std::size_t depth) {
        const std::size_t n = config_.N;
        const Signal& p = partial_[depth];
        if (depth + 1 == config_.U) {
            // Leaf level: score each final choice without materializing the
            // last residual vector.
            for (std::size_t j = 0; j < per_user_; ++j) {
                const Signal& contrib = contributions_[depth][j];
                double metric = 0.0;
                for (std::size_t i = 0; i < n; ++i) metric += std::norm(p[i] - contrib[i]);
                if (metric < best_metric_) {
                    best_metric_ = metric;
                    choice_stack_[depth] = j;
                    best_choices_ = choice_stack_;
                }
            }
            return;
        }
        for (std::size_t j = 0; j < per_user_; ++j) {
            const Signal& contrib = contributions_[depth][j];
            for (std::size_t i = 0; i < n; ++i) {
                partial_[depth + 1][i] = p[i] - contrib[i];
            }
            choice_stack_[depth] = j;
            search(depth + 1);
        }
    }

    SystemConfig config_;
    std::size_t per_user_ = 0;
    std::size_t total_candidates_ = 0;
    std::vector<PerUserChoice> choices_;
    std::vector<ComplexMatrix> chains_;               // [user], N x M
    std::vector<std::vector<Signal>> bases_;          // [user][symbol combo]
    std::vector<Signal> chirps_;                      // indexed by chirp_slot
    std::vector<Signal> ramps_;                       // scratch, per realization
    std::vector<std::vector<Signal>> contributions_;  // [user][sub-candidate]
    std::vector<Signal> partial_;
    std::vector<std::size_t> choice_stack_;
    std::vector<std::size_t> best_choices_;
    double best_metric_ = 0.0;
};

/// One-shot detection with perfect channel knowledge.
inline DetectionResult ml_detect(const Signal& r, const ChannelRealization& realization,
                                 const SystemConfig& config,
                                 std::size_t cap = kDefaultCandidateCap) {
    MlDetector detector(config, cap);
    detector.set_realization(realization);
    return detector.detect(r);
}

}  // namespace cmwave
