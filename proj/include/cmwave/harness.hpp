// harness.hpp - deterministic Monte Carlo BER engine. Every trial derives its
// randomness from (master_seed, point index, trial index), stopping decisions
// happen at fixed batch boundaries, and error counts are integers, so a sweep
// is a pure function of its SweepSpec no matter how many workers run it.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cmwave/channel.hpp"
#include "cmwave/receiver.hpp"
#include "cmwave/rng.hpp"
#include "cmwave/waveform.hpp"

namespace cmwave {

struct SweepSpec {
    SystemConfig config;
    ChannelParams channel;
    std::vector<double> ebn0_db_points;
    std::size_t min_errors = 200;
    std::size_t max_trials = 1'000'000;
    std::uint64_t master_seed = 1;
    bool noiseless = false;  // debug: force sigma2 = 0

    void validate() const {
        config.validate();
        channel.validate();
        for (std::size_t i = 1; i < ebn0_db_points.size(); ++i) {
            if (!(ebn0_db_points[i] > ebn0_db_points[i - 1])) {
                throw std::invalid_argument("SweepSpec: Eb/N0 points must be increasing");
            }
        }
        if (min_errors == 0 || max_trials == 0) {
            throw std::invalid_argument("SweepSpec: min_errors and max_trials must be positive");
        }
        if (config.cp_len < channel.delay_span()) {
            throw std::invalid_argument("SweepSpec: cp_len shorter than the channel delay span");
        }
    }
};

struct BerPoint {
    double ebn0_db = 0.0;
    std::size_t trials = 0;
    std::size_t bit_errors = 0;
    double ber = 0.0;
    double stderr_ = 0.0;  // binomial standard error
};

struct BerCurve {
    std::vector<BerPoint> rows;
};

namespace detail {

// Stopping decisions are taken only at multiples of this trial count, so the
// number of trials run never depends on the worker count.
inline constexpr std::size_t kTrialBatch = 1024;

/// Run one trial; returns the number of bit errors.
inline std::size_t run_trial(const SweepSpec& spec, MlDetector& detector, double sigma2,
                             std::size_t point_index, std::size_t trial_index) {
    RandomStream stream =
        RandomStream::for_trial(spec.master_seed, point_index, trial_index);
    const SystemConfig& cfg = spec.config;

    const ChannelRealization realization = sample_channel(spec.channel, cfg.U, stream);

    BitVec tx_bits;
    tx_bits.reserve(cfg.total_bits());
    std::vector<Signal> tx(cfg.U);
    for (std::size_t u = 0; u < cfg.U; ++u) {
        const BitVec user_bits = stream.bits(cfg.bits_per_user());
        tx_bits.insert(tx_bits.end(), user_bits.begin(), user_bits.end());
        tx[u] = modulate(cfg, split_bits(user_bits, cfg), u);
    }

    const Signal r = apply_channel(tx, realization, sigma2, stream);

    detector.set_realization(realization);
    const DetectionResult result = detector.detect(r);

    std::size_t errors = 0;
    for (std::size_t i = 0; i < tx_bits.size(); ++i) {
        errors += tx_bits[i] != result.decided.bit_label[i];
    }
    return errors;
}

}  // namespace detail

/**
 * Estimate the BER at one sweep point. Trials draw a fresh channel and fresh
 * payload bits each time; the point stops once min_errors bit errors have
 * accumulated or max_trials trials have run, checked at batch boundaries.
 */
inline BerPoint run_point_index(const SweepSpec& spec, std::size_t point_index,
                                unsigned threads = 1) {
    spec.validate();
    if (point_index >= spec.ebn0_db_points.size()) {
        throw std::invalid_argument("run_point: point index out of range");
    }
    const double ebn0_db = spec.ebn0_db_points[point_index];
    const double sigma2 =
        spec.noiseless ? 0.0 : noise_variance_for_ebn0(spec.config, ebn0_db);

    const unsigned workers =
        std::max(1u, threads == 0 ? std::thread::hardware_concurrency() : threads);

    std::size_t trials_done = 0;
    std::size_t errors = 0;
    std::vector<MlDetector> detectors(workers, MlDetector(spec.config));

    while (trials_done < spec.max_trials && errors < spec.min_errors) {
        const std::size_t batch =
            std::min(detail::kTrialBatch, spec.max_trials - trials_done);
        std::vector<std::size_t> worker_errors(workers, 0);
        auto work = [&](unsigned w) {
            std::size_t local = 0;
            for (std::size_t t = w; t < batch; t += workers) {
                local += detail::run_trial(spec, detectors[w], sigma2, point_index,
                                           trials_done + t);
            }
            worker_errors[w] = local;
        };
        if (workers == 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
            for (auto& th : pool) th.join();
        }
        for (const auto e : worker_errors) errors += e;
        trials_done += batch;
    }

    BerPoint row;
    row.ebn0_db = ebn0_db;
    row.trials = trials_done;
    row.bit_errors = errors;
    const double total_bits =
        static_cast<double>(trials_done) * static_cast<double>(spec.config.total_bits());
    row.ber = static_cast<double>(errors) / total_bits;
    row.stderr_ = std::sqrt(std::max(row.ber * (1.0 - row.ber), 0.0) / total_bits);
    return row;
}

/// run_point addressed by Eb/N0 value; it must be one of the sweep's points.
inline BerPoint run_point(const SweepSpec& spec, double ebn0_db, unsigned threads = 1) {
    for (std::size_t i = 0; i < spec.ebn0_db_points.size(); ++i) {
        if (spec.ebn0_db_points[i] == ebn0_db) return run_point_index(spec, i, threads);
    }
    throw std::invalid_argument("run_point: Eb/N0 value is not a sweep point");
}

inline BerCurve run_sweep(const SweepSpec& spec, unsigned threads = 1) {
    spec.validate();
    BerCurve curve;
    curve.rows.reserve(spec.ebn0_db_points.size());
    for (std::size_t i = 0; i < spec.ebn0_db_points.size(); ++i) {
        curve.rows.push_back(run_point_index(spec, i, threads));
    }
    return curve;
}

/// CSV rows in the schema waveform,ebn0_db,trials,bit_errors,ber,stderr.
inline std::string to_csv(const BerCurve& curve, const std::string& waveform_label) {
    std::string out = "waveform,ebn0_db,trials,bit_errors,ber,stderr\n";
    char line[192];
    for (const auto& row : curve.rows) {
        std::snprintf(line, sizeof(line), "%s,%g,%zu,%zu,%.9e,%.9e\n",
                      waveform_label.c_str(), row.ebn0_db, row.trials, row.bit_errors,
                      row.ber, row.stderr_);
        out += line;
    }
    return out;
}

/**
 * Eb/N0 at which a curve crosses the target BER, by log-linear interpolation
 * between the first bracketing pair of rows with nonzero BER. Returns nullopt
 * when the curve never crosses the target.
 */
inline std::optional<double> ebn0_at_ber(const BerCurve& curve, double target_ber) {
    for (std::size_t i = 0; i + 1 < curve.rows.size(); ++i) {
        const auto& hi = curve.rows[i];
        const auto& lo = curve.rows[i + 1];
        if (hi.ber <= 0.0 || lo.ber <= 0.0) continue;
        if (hi.ber >= target_ber && lo.ber <= target_ber) {
            if (hi.ber == lo.ber) return hi.ebn0_db;
            const double t = (std::log10(target_ber) - std::log10(hi.ber)) /
                             (std::log10(lo.ber) - std::log10(hi.ber));
            return hi.ebn0_db + t * (lo.ebn0_db - hi.ebn0_db);
        }
    }
    return std::nullopt;
}

/// Least-squares slope of log10(BER) per dB over rows [first, last].
inline std::optional<double> log_ber_slope(const BerCurve& curve, std::size_t first,
                                           std::size_t last) {
    if (last >= curve.rows.size() || first > last) return std::nullopt;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (std::size_t i = first; i <= last; ++i) {
        if (curve.rows[i].ber <= 0.0) continue;
        const double x = curve.rows[i].ebn0_db;
        const double y = std::log10(curve.rows[i].ber);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return std::nullopt;
    const double denom = static_cast<double>(n) * sxx - sx * sx;
    if (denom == 0.0) return std::nullopt;
    return (static_cast<double>(n) * sxy - sx * sy) / denom;
}

}  // namespace cmwave
