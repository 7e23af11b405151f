// Command-line front end: Monte-Carlo simulation plus the closed-form
// analysis tables (density evolution, decodable probability, rate threshold,
// coherence duration, decoder complexity).

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "imura/analysis.hpp"
#include "imura/config.hpp"
#include "imura/errors.hpp"
#include "imura/harness.hpp"

namespace {

imura::SystemConfig make_config(const std::string& config_path, std::uint64_t seed,
                                bool seed_set) {
    imura::SystemConfig config;
    if (!config_path.empty()) {
        config = imura::load_config_file(config_path);
    } else {
        imura::validate(config);
    }
    if (seed_set) config.seed = seed;
    return config;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::fputs(text.c_str(), stdout);
        return;
    }
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (f == nullptr) throw imura::IoError("cannot open output file: " + path);
    std::fputs(text.c_str(), f);
    std::fclose(f);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Link-level simulator and analysis toolkit for an index-modulated "
                 "ALOHA unsourced-random-access scheme"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::uint64_t seed = 1;
    bool seed_set = false;
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--seed", seed, "master RNG seed")->each([&](const std::string&) {
        seed_set = true;
    });

    // sim
    auto* sim = app.add_subcommand("sim", "Monte-Carlo FER/NSE/throughput sweep");
    std::string sweep_name = "snr";
    std::vector<double> values;
    int trials = 200;
    std::string decoder_name = "sdr";
    bool no_sic = false, perfect_sic = false;
    std::string out_path;
    int threads = 0;
    sim->add_option("--sweep", sweep_name, "sweep variable: snr | na | rate")
        ->check(CLI::IsMember({"snr", "na", "rate"}));
    sim->add_option("--values", values, "sweep points (ascending)")->required();
    sim->add_option("--trials", trials, "trials per sweep point");
    sim->add_option("--decoder", decoder_name, "superposed-codeword decomposer")
        ->check(CLI::IsMember({"ml", "sdr"}));
    sim->add_flag("--no-sic", no_sic, "detection-only ablation (NSE without SIC)");
    sim->add_flag("--perfect-sic", perfect_sic, "genie peeling diagnostic (throughput envelope)");
    sim->add_option("--out", out_path, "output CSV path (default: stdout)");
    sim->add_option("--threads", threads, "worker threads (0 = hardware)");

    // analyze-de
    auto* de = app.add_subcommand("analyze-de", "density-evolution sweep: r, Z_final, T(r)");
    int de_K = 2, de_M = 4, de_tmax = 0, de_nslot = 33;
    double de_rmin = 0.5, de_rmax = 4.0, de_rstep = 0.1;
    std::string de_out;
    de->add_option("--K", de_K, "repetitions per user");
    de->add_option("--M", de_M, "max decodable codewords per slot");
    de->add_option("--Nslot", de_nslot, "sub-slots (ties t_max to round(r*Nslot))");
    de->add_option("--t-max", de_tmax, "iteration override (0 = round(r*Nslot))");
    de->add_option("--r-min", de_rmin, "first rate");
    de->add_option("--r-max", de_rmax, "last rate");
    de->add_option("--r-step", de_rstep, "rate increment");
    de->add_option("--out", de_out, "output CSV path (default: stdout)");

    // analyze-gamma
    auto* ag = app.add_subcommand("analyze-gamma", "decodable-probability curve: t, gamma_t");
    int ag_na = 100, ag_K = 2, ag_nslot = 33, ag_M = 4, ag_tmax = 50;
    std::string ag_out;
    ag->add_option("--Na", ag_na, "active users");
    ag->add_option("--K", ag_K, "repetitions per user");
    ag->add_option("--Nslot", ag_nslot, "sub-slots");
    ag->add_option("--M", ag_M, "max decodable codewords per slot");
    ag->add_option("--t-max", ag_tmax, "last iteration");
    ag->add_option("--out", ag_out, "output CSV path (default: stdout)");

    // threshold
    auto* th = app.add_subcommand("threshold", "transmission-rate threshold r_th");
    int th_K = 2, th_M = 4, th_nslot = 33;
    double th_step = 0.01, th_crit = 1e-5;
    th->add_option("--K", th_K, "repetitions per user");
    th->add_option("--M", th_M, "max decodable codewords per slot");
    th->add_option("--Nslot", th_nslot, "sub-slots");
    th->add_option("--step", th_step, "rate scan increment");
    th->add_option("--z-crit", th_crit, "convergence criterion on Z");

    // coherence
    auto* co = app.add_subcommand("coherence", "coherence-duration table N_cd(v)");
    std::vector<double> co_v = {3.0};
    double co_fc = 2e9, co_bc = 5e5;
    co->add_option("--v", co_v, "velocities in km/h");
    co->add_option("--fc", co_fc, "carrier frequency in Hz");
    co->add_option("--bc", co_bc, "coherence bandwidth in Hz");

    // complexity
    auto* cx = app.add_subcommand("complexity", "decoder operation-count table");
    std::vector<double> cx_r = {1.0, 2.0, 3.0};
    cx->add_option("--r", cx_r, "transmission rates");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed()) {
            imura::SystemConfig config = make_config(config_path, seed, seed_set);
            imura::ExperimentSpec spec;
            spec.sweep = sweep_name == "snr"  ? imura::SweepVariable::kSnrDb
                         : sweep_name == "na" ? imura::SweepVariable::kNumActive
                                              : imura::SweepVariable::kRate;
            spec.values = values;
            spec.trials = trials;
            spec.decoder = decoder_name == "ml" ? imura::ScdVariant::kMl
                                                : imura::ScdVariant::kSdr;
            spec.sic = !no_sic;
            spec.perfect_sic = perfect_sic;
            spec.master_seed = config.seed;
            spec.threads = threads;
            const auto rows = imura::run_experiment(spec, config);
            write_text(out_path, imura::csv_text(rows));
        } else if (de->parsed()) {
            std::string text = "r,Z_final,T_r\n";
            char line[128];
            for (int i = 0;; ++i) {
                const double r = de_rmin + i * de_rstep;
                if (r > de_rmax + 1e-12) break;
                const int tmax = de_tmax > 0
                                     ? de_tmax
                                     : std::max(1, static_cast<int>(std::lround(r * de_nslot)));
                const auto state = imura::density_evolution(r, de_K, de_M, tmax);
                std::snprintf(line, sizeof(line), "%.10g,%.10g,%.10g\n", r,
                              state.Z[static_cast<std::size_t>(tmax)], state.T_r);
                text += line;
            }
            write_text(de_out, text);
        } else if (ag->parsed()) {
            const auto curve = imura::decodability_curve(ag_na, ag_K, ag_nslot, ag_M, ag_tmax);
            std::string text = "t,gamma_t\n";
            char line[128];
            for (int t = 1; t <= ag_tmax; ++t) {
                std::snprintf(line, sizeof(line), "%d,%.10g\n", t,
                              curve.gamma[static_cast<std::size_t>(t)]);
                text += line;
            }
            write_text(ag_out, text);
        } else if (th->parsed()) {
            const double r_th = imura::rate_threshold(th_K, th_M, th_nslot, th_step, th_crit);
            std::printf("%.2f\n", r_th);
        } else if (co->parsed()) {
            for (double v : co_v)
                std::printf("%g %.0f\n", v, imura::coherence_duration(v, co_fc, co_bc));
        } else if (cx->parsed()) {
            imura::SystemConfig config = make_config(config_path, seed, seed_set);
            for (double r : cx_r)
                std::printf("%g %.6g\n", r, imura::decoder_complexity(config, r));
        }
    } catch (const imura::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const imura::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
