// cli.hpp - command-line front end: simulate / bound / papr / optimize-p /
// preset. Kept in a header (run_cli) so the test suite can exercise the exact
// code path the binary uses, including exit codes.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cmwave/analysis.hpp"
#include "cmwave/config.hpp"
#include "cmwave/harness.hpp"

namespace cmwave {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitResourceCap = 3;

namespace cli_detail {

struct CommonOptions {
    std::string config_path;
    std::string preset_name;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::size_t> max_trials;
    std::optional<std::size_t> min_errors;
};

inline void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "experiment config file (JSON)");
    cmd->add_option("--preset", opts.preset_name, "built-in experiment preset");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "master seed");
    cmd->add_option("--threads", opts.threads, "worker threads (0 = all cores)");
    cmd->add_option("--max-trials", opts.max_trials, "trial cap per sweep point");
    cmd->add_option("--min-errors", opts.min_errors, "bit errors collected per point");
}

inline ExperimentConfig resolve(const CommonOptions& opts) {
    if (!opts.config_path.empty() && !opts.preset_name.empty()) {
        throw std::invalid_argument("--config and --preset are mutually exclusive");
    }
    ExperimentConfig cfg;
    if (!opts.config_path.empty()) {
        cfg = load_experiment(opts.config_path);
    } else if (!opts.preset_name.empty()) {
        cfg = preset(opts.preset_name);
    } else {
        throw std::invalid_argument("one of --config or --preset is required");
    }
    if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.threads) cfg.threads = *opts.threads;
    if (opts.max_trials) cfg.max_trials = *opts.max_trials;
    if (opts.min_errors) cfg.min_errors = *opts.min_errors;
    return cfg;
}

inline std::string file_prefix(const ExperimentConfig& cfg) {
    return cfg.preset.empty() ? std::string{} : cfg.preset + "_";
}

inline std::filesystem::path output_path(const ExperimentConfig& cfg,
                                         const std::string& name) {
    std::filesystem::create_directories(cfg.output_dir);
    return std::filesystem::path(cfg.output_dir) / (file_prefix(cfg) + name);
}

inline void write_file(const std::filesystem::path& path, const std::string& content,
                       std::ostream& out) {
    std::ofstream f(path);
    if (!f) throw std::invalid_argument("cannot write " + path.string());
    f << content;
    out << "wrote " << path.string() << "\n";
}

inline std::string bits_string(std::size_t value, std::size_t bit_count) {
    if (bit_count == 0) return "-";
    std::string s;
    for (std::size_t b = 0; b < bit_count; ++b) {
        s += static_cast<char>('0' + ((value >> (bit_count - 1 - b)) & 1u));
    }
    return s;
}

inline std::string symbols_string(const std::vector<std::size_t>& syms) {
    std::string s = "[";
    for (std::size_t i = 0; i < syms.size(); ++i) {
        if (i) s += " ";
        s += std::to_string(syms[i]);
    }
    return s + "]";
}

inline int cmd_simulate(const CommonOptions& opts, std::ostream& out) {
    const ExperimentConfig cfg = resolve(opts);
    for (const auto& run : cfg.runs) {
        const SweepSpec spec = cfg.sweep_for(run);
        spec.validate();
        out << "simulating " << run.label << " (" << waveform_name(run.config.waveform)
            << ", N=" << run.config.N << ", U=" << run.config.U << ")\n";
        BerCurve curve;
        for (std::size_t i = 0; i < spec.ebn0_db_points.size(); ++i) {
            const BerPoint row = run_point_index(spec, i, cfg.threads);
            char line[128];
            std::snprintf(line, sizeof(line), "  %5.1f dB  ber=%.3e  (%zu/%zu trials)\n",
                          row.ebn0_db, row.ber, row.bit_errors, row.trials);
            out << line;
            curve.rows.push_back(row);
        }
        write_file(output_path(cfg, run.label + ".csv"), to_csv(curve, run.label), out);
    }
    return kExitOk;
}

inline int cmd_bound(const CommonOptions& opts, std::ostream& out) {
    const ExperimentConfig cfg = resolve(opts);
    std::vector<const RunSpec*> single_user;
    for (const auto& run : cfg.runs) {
        if (run.config.U == 1) single_user.push_back(&run);
    }
    if (single_user.empty()) {
        throw std::invalid_argument("bound: the BER upper bound is single-user; "
                                    "the config has no U=1 run");
    }
    for (const RunSpec* run : single_user) {
        std::string csv = "ebn0_db,bound\n";
        BoundReport last;
        double last_gamma = 0.0;
        for (const double ebn0 : cfg.ebn0_db) {
            const double sigma2 = noise_variance_for_ebn0(run->config, ebn0);
            const double gamma = 1.0 / sigma2;
            const BoundReport report = ber_upper_bound_averaged(
                run->config, gamma, cfg.channel, cfg.bound_doppler_draws, cfg.seed);
            char line[96];
            std::snprintf(line, sizeof(line), "%g,%.9e\n", ebn0, report.p_e);
            csv += line;
            last = report;
            last_gamma = gamma;
        }
        write_file(output_path(cfg, run->label + "_bound.csv"), csv, out);

        std::ostringstream rep;
        if (cfg.ebn0_db.empty()) {
            last_gamma = 1.0;
            last = ber_upper_bound_averaged(run->config, last_gamma, cfg.channel,
                                            cfg.bound_doppler_draws, cfg.seed);
        }
        rep << "BER upper bound report: " << run->label << "\n";
        rep << "candidates: " << candidate_count(run->config)
            << ", ordered pairs: " << last.pair_terms.size() << "\n";
        rep << "normalization f = " << last.f << "\n";
        rep << "diversity order G_D = " << last.diversity_order << "\n";
        const BoundReport doubled = ber_upper_bound_averaged(
            run->config, 2.0 * last_gamma, cfg.channel, cfg.bound_doppler_draws, cfg.seed);
        rep << "gamma doubling check at gamma=" << last_gamma
            << ": p_e ratio = " << (doubled.p_e / last.p_e)
            << " (2^-G_D = " << std::pow(2.0, -static_cast<double>(last.diversity_order))
            << ")\n";
        rep << "pair terms at gamma=" << last_gamma << " (a <-> b, rank, pep, hamming):\n";
        const std::size_t shown = std::min<std::size_t>(last.pair_terms.size(), 64);
        for (std::size_t i = 0; i < shown; ++i) {
            const auto& t = last.pair_terms[i];
            rep << "  " << t.a_index << " -> " << t.b_index << "  R=" << t.rank
                << "  pep=" << t.pep << "  d=" << t.hamming << "\n";
        }
        if (shown < last.pair_terms.size()) {
            rep << "  ... " << (last.pair_terms.size() - shown) << " more\n";
        }
        write_file(output_path(cfg, run->label + "_bound_report.txt"), rep.str(), out);
    }
    return kExitOk;
}

inline int cmd_papr(const CommonOptions& opts, std::ostream& out) {
    const ExperimentConfig cfg = resolve(opts);
    for (std::size_t run_idx = 0; run_idx < cfg.runs.size(); ++run_idx) {
        const auto& run = cfg.runs[run_idx];
        const SystemConfig& sys = run.config;
        const std::size_t bps = ilog2(sys.Q);
        std::ostringstream table;
        table << "max PAPR per chirp index: " << run.label << " ("
              << waveform_name(sys.waveform) << ", Q=" << sys.Q << ", "
              << cfg.papr_draws << " symbol draws)\n";
        table << "chirp_bits  nu  papr_db_max\n";
        for (std::size_t nu = 0; nu < std::max<std::size_t>(sys.P, 1); ++nu) {
            RandomStream stream(derive_stream_seed(cfg.seed, run_idx, nu));
            double worst = 0.0;
            for (std::size_t draw = 0; draw < cfg.papr_draws; ++draw) {
                std::vector<std::size_t> syms(sys.M);
                for (auto& s : syms) {
                    std::size_t v = 0;
                    for (std::size_t b = 0; b < bps; ++b) v = (v << 1) | stream.bit();
                    s = v;
                }
                const Signal s = modulate_indices(sys, 0, nu, syms, sys.chirp_direction);
                worst = std::max(worst, papr_db(s));
            }
            char line[96];
            std::snprintf(line, sizeof(line), "%-10s  %2zu  %.6f\n",
                          bits_string(nu, ilog2(sys.P)).c_str(), nu, worst);
            table << line;
        }
        out << table.str();
        write_file(output_path(cfg, run.label + "_papr.txt"), table.str(), out);
    }
    return kExitOk;
}

inline int cmd_optimize_p(const CommonOptions& opts, std::ostream& out) {
    const ExperimentConfig cfg = resolve(opts);
    for (const auto& run : cfg.runs) {
        const ChirpOrderResult result = optimize_chirp_order(run.config);
        std::ostringstream rep;
        rep << "chirp order search: " << run.label << " (N=" << run.config.N
            << ", M=" << run.config.M << ", U=" << run.config.U << ", Q=" << run.config.Q
            << ")\n";
        for (const auto& entry : result.trace) {
            rep << "  P~=" << entry.p_tried << ": "
                << (entry.ambiguous ? "ambiguous" : "unique");
            if (entry.collision) {
                rep << "  (nu=" << entry.collision->nu_a << " "
                    << symbols_string(entry.collision->symbols_a)
                    << " == nu=" << entry.collision->nu_b << " "
                    << symbols_string(entry.collision->symbols_b) << ")";
            }
            rep << "\n";
        }
        rep << "P* = " << result.p_star << "\n";
        out << rep.str();
        write_file(output_path(cfg, run.label + "_pstar.txt"), rep.str(), out);
    }
    return kExitOk;
}

}  // namespace cli_detail

/**
 * Entry point shared by the binary and the tests. Returns the process exit
 * code: 0 on success, 2 for configuration errors, 3 when a search-space or
 * resource cap is exceeded.
 */
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    CLI::App app{"chirp-modulated multicarrier waveform simulator"};
    app.require_subcommand(1);

    cli_detail::CommonOptions sim_opts, bound_opts, papr_opts, opt_opts;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo BER sweeps to CSV");
    cli_detail::add_common(sim, sim_opts);
    auto* bound = app.add_subcommand("bound", "analytical BER upper bound to CSV + report");
    cli_detail::add_common(bound, bound_opts);
    auto* papr = app.add_subcommand("papr", "max PAPR per chirp index");
    cli_detail::add_common(papr, papr_opts);
    auto* optp = app.add_subcommand("optimize-p", "halving search for the chirp order P*");
    cli_detail::add_common(optp, opt_opts);

    std::string preset_to_dump;
    bool list_presets = false;
    auto* dump = app.add_subcommand("preset", "print a built-in preset config as JSON");
    dump->add_option("name", preset_to_dump, "preset name");
    dump->add_flag("--list", list_presets, "list preset names");

    std::vector<char*> argv;
    std::vector<std::string> storage = args;
    storage.insert(storage.begin(), "cmwave");
    argv.reserve(storage.size());
    for (auto& s : storage) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        if (sim->parsed()) return cli_detail::cmd_simulate(sim_opts, out);
        if (bound->parsed()) return cli_detail::cmd_bound(bound_opts, out);
        if (papr->parsed()) return cli_detail::cmd_papr(papr_opts, out);
        if (optp->parsed()) return cli_detail::cmd_optimize_p(opt_opts, out);
        if (dump->parsed()) {
            if (list_presets) {
                for (const auto& name : preset_names()) out << name << "\n";
                return kExitOk;
            }
            if (preset_to_dump.empty()) {
                throw std::invalid_argument("preset: name required (or --list)");
            }
            out << to_json(preset(preset_to_dump)).dump(2) << "\n";
            return kExitOk;
        }
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfigError;
    } catch (const SearchSpaceError& e) {
        err << "error: " << e.what() << "\n";
        return kExitResourceCap;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
}

}  // namespace cmwave
