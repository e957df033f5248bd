// config.hpp - experiment configuration documents (JSON) and the bundled
// experiment presets. Configs round-trip losslessly and unknown keys are
// rejected so a typo cannot silently fall back to a default.

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmwave/channel.hpp"
#include "cmwave/harness.hpp"
#include "cmwave/waveform.hpp"

namespace cmwave {

/// One labeled waveform to simulate; comparisons run several under one sweep.
struct RunSpec {
    std::string label;
    SystemConfig config;

    bool operator==(const RunSpec&) const = default;
};

inline bool operator==(const SystemConfig& a, const SystemConfig& b) {
    return a.waveform == b.waveform && a.N == b.N && a.M == b.M && a.U == b.U &&
           a.Q == b.Q && a.P == b.P && a.chirp_rate == b.chirp_rate &&
           a.chirp_direction == b.chirp_direction && a.cp_len == b.cp_len &&
           a.user_subcarrier_indices == b.user_subcarrier_indices &&
           a.afdm_c1 == b.afdm_c1 && a.afdm_c2 == b.afdm_c2 &&
           a.chirped_shift == b.chirped_shift;
}

inline bool operator==(const ChannelParams& a, const ChannelParams& b) {
    return a.L == b.L && a.max_doppler_hz == b.max_doppler_hz &&
           a.subcarrier_spacing_hz == b.subcarrier_spacing_hz &&
           a.carrier_hz == b.carrier_hz && a.velocity_kmh == b.velocity_kmh &&
           a.max_delay == b.max_delay && a.random_delays == b.random_delays;
}

/**
 * Top-level experiment document consumed by the CLI: system configs to run,
 * the channel, the Eb/N0 sweep, stopping rules, seeding, and output location.
 */
struct ExperimentConfig {
    std::string preset;  // name this document was derived from, if any
    std::string output_dir = ".";
    std::uint64_t seed = 12345;
    unsigned threads = 0;  // 0 = all hardware threads
    ChannelParams channel;
    std::vector<double> ebn0_db;
    std::size_t min_errors = 200;
    std::size_t max_trials = 1'000'000;
    std::size_t bound_doppler_draws = 20;
    std::size_t papr_draws = 512;
    std::vector<RunSpec> runs;

    bool operator==(const ExperimentConfig&) const = default;

    SweepSpec sweep_for(const RunSpec& run) const {
        SweepSpec spec;
        spec.config = run.config;
        spec.channel = channel;
        spec.ebn0_db_points = ebn0_db;
        spec.min_errors = min_errors;
        spec.max_trials = max_trials;
        spec.master_seed = seed;
        return spec;
    }
};

namespace detail {

inline std::string direction_name(ChirpDirection d) {
    switch (d) {
        case ChirpDirection::Up: return "up";
        case ChirpDirection::Down: return "down";
        case ChirpDirection::Combined: return "combined";
    }
    throw std::invalid_argument("unknown chirp direction");
}

inline ChirpDirection direction_from_name(const std::string& s) {
    if (s == "up") return ChirpDirection::Up;
    if (s == "down") return ChirpDirection::Down;
    if (s == "combined") return ChirpDirection::Combined;
    throw std::invalid_argument("unknown chirp direction: " + s);
}

inline Waveform waveform_from_name(const std::string& s) {
    for (const Waveform w : {Waveform::DftSOfdm, Waveform::ChirpedDftSOfdm,
                             Waveform::DftSOfdmCm, Waveform::Ofdm, Waveform::Afdm,
                             Waveform::AfdmCm}) {
        if (waveform_name(w) == s) return w;
    }
    throw std::invalid_argument("unknown waveform: " + s);
}

inline void require_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                         const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const auto& k : allowed) {
            if (item.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw std::invalid_argument(where + ": unknown key '" + item.key() + "'");
        }
    }
}

}  // namespace detail

inline nlohmann::json to_json(const SystemConfig& c) {
    return nlohmann::json{{"waveform", waveform_name(c.waveform)},
                          {"n", c.N},
                          {"m", c.M},
                          {"u", c.U},
                          {"q", c.Q},
                          {"p", c.P},
                          {"chirp_rate", c.chirp_rate},
                          {"chirp_direction", detail::direction_name(c.chirp_direction)},
                          {"cp_len", c.cp_len},
                          {"subcarrier_indices", c.user_subcarrier_indices},
                          {"afdm_c1", c.afdm_c1},
                          {"afdm_c2", c.afdm_c2},
                          {"chirped_shift", c.chirped_shift}};
}

inline SystemConfig system_config_from_json(const nlohmann::json& j) {
    detail::require_keys(j,
                         {"waveform", "n", "m", "u", "q", "p", "chirp_rate",
                          "chirp_direction", "cp_len", "subcarrier_indices", "afdm_c1",
                          "afdm_c2", "chirped_shift"},
                         "system config");
    SystemConfig c;
    c.waveform = detail::waveform_from_name(j.at("waveform").get<std::string>());
    c.N = j.at("n").get<std::size_t>();
    c.M = j.at("m").get<std::size_t>();
    c.U = j.at("u").get<std::size_t>();
    c.Q = j.at("q").get<std::size_t>();
    c.P = j.at("p").get<std::size_t>();
    c.chirp_rate = j.value("chirp_rate", 1.0 / static_cast<double>(c.N));
    c.chirp_direction =
        detail::direction_from_name(j.value("chirp_direction", std::string("up")));
    c.cp_len = j.value("cp_len", std::size_t{0});
    if (j.contains("subcarrier_indices")) {
        c.user_subcarrier_indices =
            j.at("subcarrier_indices").get<std::vector<std::size_t>>();
    } else {
        c.user_subcarrier_indices.resize(c.U);
        for (std::size_t u = 0; u < c.U; ++u) c.user_subcarrier_indices[u] = u + 1;
    }
    c.afdm_c1 = j.value("afdm_c1", 0.0);
    c.afdm_c2 = j.value("afdm_c2", 0.0);
    c.chirped_shift = j.value("chirped_shift", std::size_t{0});
    c.validate();
    return c;
}

inline nlohmann::json to_json(const ChannelParams& c) {
    return nlohmann::json{{"paths", c.L},
                          {"max_doppler_hz", c.max_doppler_hz},
                          {"subcarrier_spacing_hz", c.subcarrier_spacing_hz},
                          {"carrier_hz", c.carrier_hz},
                          {"velocity_kmh", c.velocity_kmh},
                          {"max_delay", c.max_delay},
                          {"random_delays", c.random_delays}};
}

inline ChannelParams channel_params_from_json(const nlohmann::json& j) {
    detail::require_keys(j,
                         {"paths", "max_doppler_hz", "subcarrier_spacing_hz", "carrier_hz",
                          "velocity_kmh", "max_delay", "random_delays"},
                         "channel");
    ChannelParams c;
    c.L = j.value("paths", c.L);
    c.max_doppler_hz = j.value("max_doppler_hz", c.max_doppler_hz);
    c.subcarrier_spacing_hz = j.value("subcarrier_spacing_hz", c.subcarrier_spacing_hz);
    c.carrier_hz = j.value("carrier_hz", c.carrier_hz);
    c.velocity_kmh = j.value("velocity_kmh", c.velocity_kmh);
    c.max_delay = j.value("max_delay", c.max_delay);
    c.random_delays = j.value("random_delays", c.random_delays);
    c.validate();
    return c;
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& run : c.runs) {
        nlohmann::json r = to_json(run.config);
        r["label"] = run.label;
        runs.push_back(std::move(r));
    }
    return nlohmann::json{{"preset", c.preset},
                          {"output_dir", c.output_dir},
                          {"seed", c.seed},
                          {"threads", c.threads},
                          {"channel", to_json(c.channel)},
                          {"ebn0_db", c.ebn0_db},
                          {"min_errors", c.min_errors},
                          {"max_trials", c.max_trials},
                          {"bound_doppler_draws", c.bound_doppler_draws},
                          {"papr_draws", c.papr_draws},
                          {"runs", runs}};
}

inline ExperimentConfig experiment_from_json(const nlohmann::json& j) {
    detail::require_keys(j,
                         {"preset", "output_dir", "seed", "threads", "channel", "ebn0_db",
                          "min_errors", "max_trials", "bound_doppler_draws", "papr_draws",
                          "runs"},
                         "experiment");
    ExperimentConfig c;
    c.preset = j.value("preset", std::string{});
    c.output_dir = j.value("output_dir", std::string("."));
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    if (j.contains("channel")) c.channel = channel_params_from_json(j.at("channel"));
    c.ebn0_db = j.value("ebn0_db", std::vector<double>{});
    c.min_errors = j.value("min_errors", c.min_errors);
    c.max_trials = j.value("max_trials", c.max_trials);
    c.bound_doppler_draws = j.value("bound_doppler_draws", c.bound_doppler_draws);
    c.papr_draws = j.value("papr_draws", c.papr_draws);
    if (!j.contains("runs") || !j.at("runs").is_array() || j.at("runs").empty()) {
        throw std::invalid_argument("experiment: at least one run is required");
    }
    for (const auto& rj : j.at("runs")) {
        if (!rj.contains("label")) throw std::invalid_argument("run: missing label");
        nlohmann::json sys = rj;
        sys.erase("label");
        RunSpec run;
        run.label = rj.at("label").get<std::string>();
        run.config = system_config_from_json(sys);
        c.runs.push_back(std::move(run));
    }
    return c;
}

inline ExperimentConfig load_experiment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config parse error in " + path + ": " + e.what());
    }
    return experiment_from_json(j);
}

// ---------------------------------------------------------------------------
// Presets. Each bundles the system parameters of one standard comparison
// scenario with the shared high-mobility channel (3 equal-power paths,
// f_max = 2 kHz at 15 kHz spacing, i.e. 500 km/h at a 4 GHz carrier).
// ---------------------------------------------------------------------------

namespace detail {

inline ChannelParams default_channel() {
    ChannelParams ch;
    ch.L = 3;
    ch.max_doppler_hz = 2000.0;
    ch.subcarrier_spacing_hz = 15000.0;
    ch.carrier_hz = 4.0e9;
    ch.velocity_kmh = 500.0;
    ch.max_delay = 2;
    ch.random_delays = false;
    return ch;
}

inline std::vector<double> ebn0_range(double lo, double hi, double step) {
    std::vector<double> points;
    for (double v = lo; v <= hi + 1e-9; v += step) points.push_back(v);
    return points;
}

/// Full-diversity first chirp rate (2 ceil(alpha_max) + 1) / (2N).
inline double afdm_c1_default(std::size_t n, const ChannelParams& ch) {
    const double alpha = std::ceil(ch.normalized_max_doppler());
    return (2.0 * alpha + 1.0) / (2.0 * static_cast<double>(n));
}

}  // namespace detail

inline std::vector<std::string> preset_names() {
    return {"fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "table1"};
}

/**
 * Bundled experiment presets:
 *   fig3   N=8 M=2 U=4 Q=2: chirped DFT-s-OFDM with the chirp start pinned to
 *          each of the four two-bit patterns.
 *   fig4   N=8 M=2 Q=2 P=2: DFT-s-OFDM-CM at U=1 and U=4; the U=1 run also
 *          drives the analytical BER upper bound.
 *   fig5   N=8 M=2 U=4 Q=2: DFT-s-OFDM vs chirped DFT-s-OFDM vs
 *          DFT-s-OFDM-CM (P=2).
 *   fig6   N=4 M=1 U=4, equal spectral efficiency: 8-PSK baselines vs
 *          QPSK+chirp-bit DFT-s-OFDM-CM.
 *   fig7   N=8 M=2 U=1 Q=2: DFT-s-OFDM-CM with P=2 vs P=4.
 *   fig8   N=4 M=1 U=4, equal spectral efficiency: OFDM and AFDM 8-PSK
 *          baselines vs AFDM-CM and DFT-s-OFDM-CM with QPSK+chirp bit.
 *   table1 N=8 M=2 U=4 Q=2 P=4: PAPR per chirp index.
 */
inline ExperimentConfig preset(const std::string& name) {
    ExperimentConfig cfg;
    cfg.preset = name;
    cfg.channel = detail::default_channel();
    const std::size_t cp = cfg.channel.max_delay;

    auto add = [&cfg](std::string label, SystemConfig sys) {
        cfg.runs.push_back(RunSpec{std::move(label), std::move(sys)});
    };

    if (name == "fig3") {
        cfg.ebn0_db = detail::ebn0_range(0.0, 16.0, 2.0);
        for (std::size_t shift = 0; shift < 4; ++shift) {
            SystemConfig sys = make_config(Waveform::ChirpedDftSOfdm, 8, 2, 4, 2, 1, cp);
            sys.chirped_shift = shift;
            add("dft_s_ofdm_cm_nu" + std::to_string(shift), sys);
        }
    } else if (name == "fig4") {
        cfg.ebn0_db = detail::ebn0_range(0.0, 20.0, 2.0);
        cfg.max_trials = 2'000'000;
        add("dft_s_ofdm_cm_u1", make_config(Waveform::DftSOfdmCm, 8, 2, 1, 2, 2, cp));
        add("dft_s_ofdm_cm_u4", make_config(Waveform::DftSOfdmCm, 8, 2, 4, 2, 2, cp));
    } else if (name == "fig5") {
        cfg.ebn0_db = detail::ebn0_range(0.0, 16.0, 2.0);
        add("dft_s_ofdm", make_config(Waveform::DftSOfdm, 8, 2, 4, 2, 1, cp));
        add("chirped_dft_s_ofdm", make_config(Waveform::ChirpedDftSOfdm, 8, 2, 4, 2, 1, cp));
        add("dft_s_ofdm_cm", make_config(Waveform::DftSOfdmCm, 8, 2, 4, 2, 2, cp));
    } else if (name == "fig6") {
        cfg.ebn0_db = detail::ebn0_range(0.0, 26.0, 2.0);
        add("dft_s_ofdm_8psk", make_config(Waveform::DftSOfdm, 4, 1, 4, 8, 1, cp));
        add("chirped_dft_s_ofdm_8psk",
            make_config(Waveform::ChirpedDftSOfdm, 4, 1, 4, 8, 1, cp));
        add("dft_s_ofdm_cm_qpsk_p2", make_config(Waveform::DftSOfdmCm, 4, 1, 4, 4, 2, cp));
    } else if (name == "fig7") {
        cfg.ebn0_db = detail::ebn0_range(0.0, 20.0, 2.0);
        cfg.max_trials = 2'000'000;
        add("dft_s_ofdm_cm_p2", make_config(Waveform::DftSOfdmCm, 8, 2, 1, 2, 2, cp));
        add("dft_s_ofdm_cm_p4", make_config(Waveform::DftSOfdmCm, 8, 2, 1, 2, 4, cp));
    } else if (name == "fig8") {
        cfg.ebn0_db = detail::ebn0_range(0.0, 26.0, 2.0);
        const double c1 = detail::afdm_c1_default(4, cfg.channel);
        SystemConfig ofdm = make_config(Waveform::Ofdm, 4, 1, 4, 8, 1, cp);
        add("ofdm_8psk", ofdm);
        SystemConfig afdm = make_config(Waveform::Afdm, 4, 1, 4, 8, 1, cp);
        afdm.afdm_c1 = c1;
        add("afdm_8psk", afdm);
        SystemConfig afdm_cm = make_config(Waveform::AfdmCm, 4, 1, 4, 4, 2, cp);
        afdm_cm.afdm_c1 = c1;
        add("afdm_cm_qpsk_p2", afdm_cm);
        add("dft_s_ofdm_cm_qpsk_p2", make_config(Waveform::DftSOfdmCm, 4, 1, 4, 4, 2, cp));
    } else if (name == "table1") {
        cfg.ebn0_db = {};
        add("dft_s_ofdm_cm", make_config(Waveform::DftSOfdmCm, 8, 2, 4, 2, 4, cp));
    } else {
        throw std::invalid_argument("unknown preset: " + name);
    }
    return cfg;
}

}  // namespace cmwave
