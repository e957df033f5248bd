// analysis.hpp - PAPR, spectral efficiency, pairwise-error-probability BER
// upper bound, diversity order, and the chirp modulation order optimizer.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cmwave/channel.hpp"
#include "cmwave/numerics.hpp"
#include "cmwave/receiver.hpp"
#include "cmwave/rng.hpp"
#include "cmwave/waveform.hpp"

namespace cmwave {

/// Peak-to-average power ratio in dB.
inline double papr_db(const Signal& s) {
    if (s.empty()) throw std::domain_error("papr_db: empty signal");
    double peak = 0.0;
    double sum = 0.0;
    for (const auto& v : s) {
        const double p = std::norm(v);
        peak = std::max(peak, p);
        sum += p;
    }
    if (sum <= 0.0) throw std::domain_error("papr_db: all-zero signal has no PAPR");
    const double mean = sum / static_cast<double>(s.size());
    return 10.0 * std::log10(peak / mean);
}

/**
 * Spectral efficiency in bits/s/Hz: U (M log2 Q + log2 P) / N, plus U/N when
 * the combined up/down mode adds a direction bit per user. Waveforms without
 * chirp modulation have P = 1 and reduce to U M log2 Q / N.
 */
inline double spectral_efficiency(const SystemConfig& config) {
    config.validate();
    return static_cast<double>(config.total_bits()) / static_cast<double>(config.N);
}

/**
 * Effective matrix of a single-user candidate: column p holds
 * D_p Pi^{l_p} s(a), so that E(a) h is the noiseless received block for path
 * gains h.
 */
inline ComplexMatrix effective_matrix(const CandidateMessage& candidate,
                                      const std::vector<Path>& paths,
                                      const SystemConfig& config) {
    if (candidate.users.size() != 1 || config.U != 1) {
        throw std::invalid_argument("effective_matrix: single-user candidates only");
    }
    const auto& choice = candidate.users[0];
    const ChirpDirection dir =
        choice.direction.has_value()
            ? (*choice.direction == 0 ? ChirpDirection::Up : ChirpDirection::Down)
            : config.chirp_direction;
    const Signal s = modulate_indices(config, 0, choice.nu, choice.symbol_indices, dir);

    const std::size_t n = config.N;
    ComplexMatrix e(n, paths.size());
    for (std::size_t p = 0; p < paths.size(); ++p) {
        if (paths[p].delay >= n) {
            throw std::invalid_argument("effective_matrix: path delay must be less than N");
        }
        for (std::size_t row = 0; row < n; ++row) {
            const double phase = 2.0 * std::numbers::pi * paths[p].doppler *
                                 static_cast<double>(row) / static_cast<double>(n);
            e(row, p) = std::polar(1.0, phase) * s[(row + n - paths[p].delay) % n];
        }
    }
    return e;
}

/// One ordered candidate pair of the BER upper bound.
struct PairTerm {
    std::size_t a_index = 0;
    std::size_t b_index = 0;
    std::size_t rank = 0;
    std::vector<double> eigenvalues;  // the nonzero ones, descending
    double pep = 0.0;
    std::size_t hamming = 0;
};

struct BoundReport {
    double gamma = 0.0;  // 1 / sigma^2
    std::vector<PairTerm> pair_terms;
    double f = 0.0;  // normalization weight
    double p_e = 0.0;
    std::size_t diversity_order = 0;
};

namespace detail {

/// PEP approximation from the rank and nonzero eigenvalues of Theta(a, b).
inline double pep_from_eigen(const std::vector<double>& lambdas, std::size_t rank,
                             double gamma, std::size_t l_paths) {
    if (rank == 0) return 1.0;  // indistinguishable pair
    double geo = 1.0;
    for (std::size_t r = 0; r < rank; ++r) geo *= lambdas[r];
    geo = std::pow(geo, 1.0 / static_cast<double>(rank));
    const double ld = static_cast<double>(l_paths);
    const double r = static_cast<double>(rank);
    return std::pow(geo * gamma / (4.0 * ld), -r) / 12.0 +
           std::pow(geo * gamma / (3.0 * ld), -r) / 4.0;
}

}  // namespace detail

/**
 * Pairwise term for candidates a != b: Theta = (E(a)-E(b))^H (E(a)-E(b)),
 * its rank and nonzero eigenvalues, and the two-term PEP approximation
 * (1/12)[g gamma / 4L]^{-R} + (1/4)[g gamma / 3L]^{-R} with g the geometric
 * mean of the nonzero eigenvalues. Rank-0 pairs return pep = 1; they indicate
 * an ambiguous configuration (P above the optimized order).
 */
inline PairTerm pep_pair(const CandidateMessage& a, const CandidateMessage& b, double gamma,
                         const std::vector<Path>& paths, const SystemConfig& config) {
    if (a.candidate_index == b.candidate_index) {
        throw std::invalid_argument("pep_pair: candidates must differ");
    }
    const ComplexMatrix ea = effective_matrix(a, paths, config);
    const ComplexMatrix eb = effective_matrix(b, paths, config);
    ComplexMatrix diff(ea.rows(), ea.cols());
    for (std::size_t r = 0; r < ea.rows(); ++r)
        for (std::size_t c = 0; c < ea.cols(); ++c) diff(r, c) = ea(r, c) - eb(r, c);
    const ComplexMatrix theta = diff.adjoint() * diff;
    const EigenResult eig = hermitian_eigen(theta, 1e-10);

    PairTerm term;
    term.a_index = a.candidate_index;
    term.b_index = b.candidate_index;
    term.rank = eig.rank;
    term.eigenvalues.assign(eig.eigenvalues.begin(), eig.eigenvalues.begin() + eig.rank);
    term.pep = detail::pep_from_eigen(term.eigenvalues, eig.rank, gamma, paths.size());
    term.hamming = count_bit_errors(a, b);
    return term;
}

/**
 * Single-user BER upper bound: P_e <= (1/f) sum over ordered pairs of
 * PEP(a -> b) d(a, b) with f = Q^M M log2 Q + P log2 P, evaluated at the
 * given Doppler/delay profile.
 */
inline BoundReport ber_upper_bound(const SystemConfig& config, double gamma,
                                   const std::vector<Path>& paths) {
    if (config.U != 1) {
        throw std::invalid_argument("ber_upper_bound: the bound is single-user");
    }
    const auto candidates = enumerate_candidates(config);

    BoundReport report;
    report.gamma = gamma;
    double q_pow = 1.0;
    for (std::size_t m = 0; m < config.M; ++m) q_pow *= static_cast<double>(config.Q);
    report.f = q_pow * static_cast<double>(config.M) * static_cast<double>(ilog2(config.Q)) +
               static_cast<double>(config.P) * static_cast<double>(ilog2(config.P));

    double sum = 0.0;
    std::size_t min_rank = paths.size() + 1;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        for (std::size_t j = 0; j < candidates.size(); ++j) {
            if (i == j) continue;
            PairTerm term = pep_pair(candidates[i], candidates[j], gamma, paths, config);
            sum += term.pep * static_cast<double>(term.hamming);
            min_rank = std::min(min_rank, term.rank);
            report.pair_terms.push_back(std::move(term));
        }
    }
    report.p_e = sum / report.f;
    report.diversity_order = min_rank;
    return report;
}

/**
 * Bound averaged over doppler_draws random Doppler profiles (delays stay at
 * the fixed {0..L-1} profile; gains do not enter the PEP, which is already
 * averaged over them). Per-pair PEPs are averaged, ranks reported as the
 * minimum across draws, eigenvalues taken from the first draw.
 */
inline BoundReport ber_upper_bound_averaged(const SystemConfig& config, double gamma,
                                            const ChannelParams& channel,
                                            std::size_t doppler_draws,
                                            std::uint64_t seed) {
    if (doppler_draws == 0) {
        throw std::invalid_argument("ber_upper_bound_averaged: need at least one draw");
    }
    channel.validate();
    RandomStream rng(mix64(seed));
    BoundReport report;
    for (std::size_t draw = 0; draw < doppler_draws; ++draw) {
        std::vector<Path> paths(channel.L);
        const double fbar = channel.normalized_max_doppler();
        for (std::size_t p = 0; p < channel.L; ++p) {
            paths[p].gain = 1.0;
            paths[p].doppler = fbar > 0.0 ? rng.uniform(-fbar, fbar) : 0.0;
            paths[p].delay = p;
        }
        BoundReport one = ber_upper_bound(config, gamma, paths);
        if (draw == 0) {
            report = std::move(one);
        } else {
            report.p_e += one.p_e;
            report.diversity_order = std::min(report.diversity_order, one.diversity_order);
            for (std::size_t t = 0; t < report.pair_terms.size(); ++t) {
                report.pair_terms[t].pep += one.pair_terms[t].pep;
                report.pair_terms[t].rank =
                    std::min(report.pair_terms[t].rank, one.pair_terms[t].rank);
            }
        }
    }
    const double inv = 1.0 / static_cast<double>(doppler_draws);
    report.p_e *= inv;
    for (auto& term : report.pair_terms) term.pep *= inv;
    return report;
}

/// Minimum rank of Theta(a, b) over all ordered candidate pairs.
inline std::size_t diversity_order(const SystemConfig& config,
                                   const std::vector<Path>& paths) {
    // gamma is irrelevant for ranks; any positive value works.
    return ber_upper_bound(config, 1.0, paths).diversity_order;
}

/// Two composite transmissions the noiseless detector cannot tell apart.
struct CollisionPair {
    std::size_t nu_a = 0;
    std::vector<std::size_t> symbols_a;  // all users' symbol indices, flattened
    std::size_t nu_b = 0;
    std::vector<std::size_t> symbols_b;
};

struct ChirpTraceEntry {
    std::size_t p_tried = 0;
    bool ambiguous = false;
    std::optional<CollisionPair> collision;
};

struct ChirpOrderResult {
    std::size_t p_star = 0;
    std::vector<ChirpTraceEntry> trace;
};

/**
 * Ambiguity scan for one trial order p_tilde: all users share a chirp index
 * nu0 in [0, p_tilde) and the composite noiseless signal
 * sum_u C(nu0) F_N^H P_u F_M x_u is compared across every candidate pair.
 * Returns the first colliding pair (equal within 1e-9 per sample), if any.
 */
inline std::optional<CollisionPair> chirp_ambiguity(const SystemConfig& config,
                                                    std::size_t p_tilde) {
    config.validate();
    if (p_tilde == 0 || p_tilde > config.N) {
        throw std::invalid_argument("chirp_ambiguity: trial order must be in [1, N]");
    }
    // The scan always uses the up-chirp DFT-s-OFDM-CM chain regardless of the
    // configured waveform kind.
    SystemConfig scan = config;
    scan.waveform = Waveform::DftSOfdmCm;
    scan.chirp_direction = ChirpDirection::Up;
    scan.P = config.N;  // allow any nu < N through modulate_indices
    scan.validate();

    std::size_t sym_combos = 1;
    for (std::size_t i = 0; i < scan.U * scan.M; ++i) {
        if (sym_combos > (std::size_t{1} << 22) / scan.Q) {
            throw SearchSpaceError("chirp_ambiguity: symbol combination count too large");
        }
        sym_combos *= scan.Q;
    }
    const std::size_t total = p_tilde * sym_combos;

    std::vector<Signal> composites(total);
    std::vector<std::size_t> nus(total);
    std::vector<std::vector<std::size_t>> symbol_sets(total);
    std::size_t idx = 0;
    std::vector<std::size_t> symbols(scan.U * scan.M, 0);
    for (std::size_t nu = 0; nu < p_tilde; ++nu) {
        std::fill(symbols.begin(), symbols.end(), std::size_t{0});
        for (std::size_t combo = 0; combo < sym_combos; ++combo) {
            Signal composite(scan.N, cplx{0.0, 0.0});
            for (std::size_t u = 0; u < scan.U; ++u) {
                const std::vector<std::size_t> user_syms(
                    symbols.begin() + static_cast<std::ptrdiff_t>(u * scan.M),
                    symbols.begin() + static_cast<std::ptrdiff_t>((u + 1) * scan.M));
                const Signal s =
                    modulate_indices(scan, u, nu, user_syms, ChirpDirection::Up);
                for (std::size_t n = 0; n < scan.N; ++n) composite[n] += s[n];
            }
            composites[idx] = std::move(composite);
            nus[idx] = nu;
            symbol_sets[idx] = symbols;
            ++idx;
            // next symbol combination, least significant position last
            for (std::size_t pos = symbols.size(); pos-- > 0;) {
                if (++symbols[pos] < scan.Q) break;
                symbols[pos] = 0;
            }
        }
    }

    const double tol_sq = 1e-9 * 1e-9;  // per-sample tolerance, squared
    for (std::size_t i = 0; i < total; ++i) {
        for (std::size_t j = i + 1; j < total; ++j) {
            bool equal = true;
            for (std::size_t n = 0; n < scan.N; ++n) {
                if (std::norm(composites[i][n] - composites[j][n]) > tol_sq) {
                    equal = false;
                    break;
                }
            }
            if (equal) {
                CollisionPair pair;
                pair.nu_a = nus[i];
                pair.symbols_a = symbol_sets[i];
                pair.nu_b = nus[j];
                pair.symbols_b = symbol_sets[j];
                return pair;
            }
        }
    }
    return std::nullopt;
}

/**
 * Halving search for the chirp modulation order: start at P~ = N and halve
 * until the shared-chirp detection problem has a unique solution. The final
 * order is P*; any P <= P* is ambiguity-free.
 */
inline ChirpOrderResult optimize_chirp_order(const SystemConfig& config) {
    config.validate();
    ChirpOrderResult result;
    for (std::size_t p_tilde = config.N; p_tilde >= 1; p_tilde /= 2) {
        ChirpTraceEntry entry;
        entry.p_tried = p_tilde;
        entry.collision = chirp_ambiguity(config, p_tilde);
        entry.ambiguous = entry.collision.has_value();
        const bool unique = !entry.ambiguous;
        result.trace.push_back(std::move(entry));
        if (unique) {
            result.p_star = p_tilde;
            return result;
        }
        if (p_tilde == 1) break;
    }
    throw std::domain_error(
        "optimize_chirp_order: no ambiguity-free order exists; the constellation "
        "chain itself is non-injective");
}

}  // namespace cmwave
