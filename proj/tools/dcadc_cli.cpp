/** @file dcadc_cli.cpp
 *  @brief Command-line front end: validate, sweep-sine, run-scm, spectrum.
 *
 *  Exit codes: 0 success, 1 configuration error, 2 runtime error.
 */
#include "dcadc/harness.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct Options {
    std::string config;
    std::string out = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int channel = 1;
    bool channel_set = false;
    int jobs = 0;
};

dcadc::ScenarioConfig load(const Options& o) {
    auto cfg = o.config.empty() ? dcadc::load_config("") : dcadc::load_config_file(o.config);
    if (o.seed_set) cfg.master_seed = o.seed;
    if (o.jobs > 0) cfg.jobs = o.jobs;
    cfg.validate();
    return cfg;
}

int count_failures(const dcadc::RunLog& log) {
    for (const auto& [task, e] : log.errors) std::fprintf(stderr, "warning: %s failed: %s\n", task.c_str(), e.c_str());
    return static_cast<int>(log.errors.size());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dual-comb sub-band ADC simulator"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&o](CLI::App* sc) {
        sc->add_option("--config", o.config, "scenario file (section.key = value)");
        sc->add_option("--seed", o.seed, "master seed, overrides run.seed")->each([&o](const std::string&) { o.seed_set = true; });
        sc->add_option("--jobs", o.jobs, "worker threads, overrides run.jobs")->check(CLI::PositiveNumber);
    };
    auto* validate = app.add_subcommand("validate", "check a scenario file and print the resolved configuration");
    add_common(validate);
    auto* sweep = app.add_subcommand("sweep-sine", "single-tone sweep: sweep.csv + manifest.txt");
    add_common(sweep);
    sweep->add_option("--out", o.out, "output directory");
    auto* scm = app.add_subcommand("run-scm", "SCM-PAM4 run: scm_snr.csv, spectrum_chN.csv + manifest.txt");
    add_common(scm);
    scm->add_option("--out", o.out, "output directory");
    scm->add_option("--channel", o.channel, "demodulate only this channel")->each([&o](const std::string&) { o.channel_set = true; });
    auto* spectrum = app.add_subcommand("spectrum", "dump one sub-band capture spectrum");
    add_common(spectrum);
    spectrum->add_option("--out", o.out, "output directory");
    spectrum->add_option("--channel", o.channel, "sub-band / channel for the SCM source");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    dcadc::ScenarioConfig cfg;
    try {
        cfg = load(o);
    } catch (const dcadc::ConfigError& e) {
        std::cerr << "config error";
        if (!e.rule().empty()) std::cerr << " [" << e.rule() << "]";
        std::cerr << ": " << e.what() << "\n";
        return kConfigError;
    }

    try {
        dcadc::RunLog log;
        if (validate->parsed()) {
            std::cout << dcadc::dump_config(cfg);
            return kOk;
        }
        if (sweep->parsed()) {
            const auto pts = dcadc::run_sweep(cfg, o.out, &log);
            for (const auto& p : pts)
                if (p.ok)
                    std::printf("%8.4f GHz  sub-band %2d  SFDR %6.2f dB  SINAD %6.2f dB  ENOB %5.2f\n", p.route.tested_hz / 1e9,
                                p.route.subband, p.metrics.sfdr_db, p.metrics.sinad_db, p.metrics.enob_bits);
            std::printf("wrote %s/sweep.csv\n", o.out.c_str());
            return count_failures(log) == static_cast<int>(pts.size()) ? kRuntimeError : kOk;
        }
        if (scm->parsed()) {
            const std::vector<int> chans = o.channel_set ? std::vector<int>{o.channel} : std::vector<int>{};
            const auto res = dcadc::run_scm(cfg, o.out, chans, &log);
            for (const auto& r : res)
                if (r.ok) std::printf("channel %2d  SNR %6.2f dB\n", r.channel, r.demod.snr_db);
            std::printf("wrote %s/scm_snr.csv\n", o.out.c_str());
            return count_failures(log) == static_cast<int>(res.size()) ? kRuntimeError : kOk;
        }
        if (spectrum->parsed()) {
            dcadc::run_spectrum(cfg, o.channel, o.out, &log);
            std::printf("wrote %s/%s\n", o.out.c_str(), log.artifacts.empty() ? "" : log.artifacts.front().c_str());
            return kOk;
        }
    } catch (const dcadc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return kOk;
}
