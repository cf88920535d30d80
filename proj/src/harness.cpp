/** @file harness.cpp
 *  @brief Sweep / SCM / spectrum runners and artifact writing. */
#include "dcadc/harness.hpp"

#include "dcadc/rng.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

namespace dcadc {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMinOffset = 0.15;  ///< of delta_f
constexpr double kMaxOffset = 0.45;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string join(const std::string& dir, const std::string& name) { return (std::filesystem::path(dir) / name).string(); }

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << content;
    if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
}

DemodConfig demod_for(const ScenarioConfig& cfg, int n) {
    DemodConfig d = cfg.demod;
    d.channel_index = n;
    d.baud = cfg.scm.baud;
    d.rolloff = cfg.scm.rolloff;
    d.baseband_offset = cfg.scm.baseband_offset;
    return d;
}

void write_spectrum_file(const std::string& path, const SpectrumEstimate& s, int n, double rate, const char* source) {
    std::ostringstream os;
    os << "# subband = " << n << "\n# sample_rate_hz = " << rate << "\n# source = " << source << "\n";
    write_spectrum_csv(os, s);
    write_file(path, os.str());
}

}  // namespace

SweepRoute route_frequency(double f, const ScenarioConfig& cfg) {
    const double df = cfg.combs.delta_f;
    SweepRoute r;
    r.subband = std::max(1, static_cast<int>(std::ceil(f / df - 0.5)));
    double b = f - r.subband * df;
    const double sign = b < 0.0 ? -1.0 : 1.0;
    // Keep clear of the AC-coupling corner (a 10 MHz high-pass still costs 0.17 dB at
    // 50 MHz, more than the tilt between adjacent sweep points) and of the resampler edge.
    double mag = std::clamp(std::abs(b), kMinOffset * df, kMaxOffset * df);
    if (cfg.sweep.snap) {
        const double rate = cfg.metrics.analysis_rate > 0.0 ? cfg.metrics.analysis_rate : cfg.adc.rate;
        const double bin = rate / static_cast<double>(cfg.metrics.n_fft);
        double k = std::round(mag / bin);
        // Odd bins: coherent in the record and never sharing a bin with a resampler image.
        if (std::fmod(k, 2.0) == 0.0) k += (k + 1) * bin <= kMaxOffset * df ? 1 : -1;
        mag = k * bin;
    }
    b = sign * mag;
    r.baseband_hz = b;
    r.tested_hz = r.subband * df + b;
    return r;
}

std::vector<double> sweep_frequencies(const SweepSpec& s) {
    std::vector<double> f;
    const auto n = static_cast<std::size_t>(std::floor((s.stop - s.start) / s.step + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) f.push_back(s.start + static_cast<double>(i) * s.step);
    return f;
}

SampledWaveform sine_drive(const ScenarioConfig& cfg, double f, std::uint64_t seed) {
    const double duration = static_cast<double>(cfg.sweep.record) / cfg.analog_rate;
    SampledWaveform x = sine_waveform(f, cfg.sweep.amplitude, duration, cfg.analog_rate);
    if (cfg.sweep.via_dac) x = dac_model(x, cfg.dac, derive_seed(seed, "dac"));
    return apply_tilt(x, cfg.electrical_rolloff_db, 0.1e9, 10e9);
}

SampledWaveform scm_drive(const ScenarioConfig& cfg, std::vector<std::vector<double>>& symbols) {
    const std::size_t n_sym = periodic_burst_symbols(cfg.scm, cfg.analog_rate);
    symbols.assign(static_cast<std::size_t>(cfg.scm.n_channels), {});
    std::vector<std::vector<double>> sent(symbols.size());
    for (int k = 1; k <= cfg.scm.n_channels; ++k) {
        const auto i = static_cast<std::size_t>(k - 1);
        symbols[i] = gen_pam4_symbols(n_sym, derive_seed(cfg.master_seed, "scm-symbols", static_cast<std::uint64_t>(k)));
        if (cfg.channel_active(k)) sent[i] = symbols[i];
    }
    SampledWaveform x = scm_waveform(cfg.scm, sent, cfg.analog_rate);
    // Per-channel amplitude is fixed by the all-active loading, so muting leaves it unchanged.
    const double scale = cfg.scm_rms * cfg.dac.full_scale / std::sqrt(static_cast<double>(cfg.scm.n_channels));
    std::vector<double> v(x.samples());
    for (double& s : v) s *= scale;
    x = dac_model(SampledWaveform(std::move(v), x.rate()), cfg.dac, derive_seed(cfg.master_seed, "dac"));
    return apply_tilt(x, cfg.electrical_rolloff_db, 0.1e9, 10e9);
}

double scm_signal_mean_square(const ScenarioConfig& cfg) {
    // Gaussian composite of rms sigma: E[sin^2(a v)] = (1 - exp(-2 a^2 sigma^2)) / 2
    const double a = kPi * cfg.link.drive_scale / 2.0;
    const double sigma = cfg.scm_rms * cfg.dac.full_scale;
    return 0.5 * (1.0 - std::exp(-2.0 * a * a * sigma * sigma));
}

ScenarioConfig with_nominal_drive(const ScenarioConfig& cfg) {
    ScenarioConfig c = cfg;
    if (c.link.signal_mean_square <= 0.0) c.link.signal_mean_square = scm_signal_mean_square(cfg);
    return c;
}

SubbandCapture capture_from_field(const ScenarioConfig& cfg, const SampledWaveform& mu, int n, std::uint64_t beat_seed,
                                  std::uint64_t adc_seed, std::size_t n_samples) {
    const auto beat = subband_beat(mu, n, cfg.build_combs(), cfg.link, beat_seed);
    auto cap = adc_capture(beat, n, cfg.adc, adc_seed, n_samples);
    cap.seeds["beat"] = beat_seed;
    return cap;
}

SubbandCapture capture_subband(const ScenarioConfig& cfg, const SampledWaveform& drive, int n, std::uint64_t beat_seed,
                               std::uint64_t adc_seed, std::size_t n_samples) {
    return capture_from_field(cfg, mzm_field(drive, cfg.link.vpi, cfg.link.drive_scale), n, beat_seed, adc_seed, n_samples);
}

SweepPoint sweep_point(const ScenarioConfig& cfg, std::size_t index, double f) {
    const auto t0 = Clock::now();
    SweepPoint p;
    p.requested_hz = f;
    try {
        p.route = route_frequency(f, cfg);
        const std::uint64_t seed = derive_seed(cfg.master_seed, "sweep", index);
        const auto drive = sine_drive(cfg, p.route.tested_hz, seed);
        const auto cap = capture_subband(with_nominal_drive(cfg), drive, p.route.subband,
                                         derive_seed(seed, "beat"), derive_seed(seed, "adc"), cfg.sweep.adc_samples);
        p.metrics = sine_metrics(cap, std::abs(p.route.baseband_hz), cfg.metrics);
        p.ok = true;
    } catch (const std::exception& e) {
        p.error = e.what();
    }
    p.seconds = seconds_since(t0);
    return p;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, jobs));
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    for (auto& t : pool) t.join();
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepPoint>& pts) {
    os << "freq_ghz,sfdr_db,sinad_db,enob_bits\n";
    char buf[128];
    for (const auto& p : pts) {
        const double f = (p.ok ? p.route.tested_hz : p.requested_hz) / 1e9;
        if (p.ok)
            std::snprintf(buf, sizeof buf, "%.6f,%.3f,%.3f,%.4f\n", f, p.metrics.sfdr_db, p.metrics.sinad_db, p.metrics.enob_bits);
        else
            std::snprintf(buf, sizeof buf, "%.6f,nan,nan,nan\n", f);
        os << buf;
    }
}

void write_scm_csv(std::ostream& os, const std::vector<ChannelResult>& res) {
    os << "channel,snr_db\n";
    char buf[64];
    for (const auto& r : res) {
        if (r.ok) std::snprintf(buf, sizeof buf, "%d,%.3f\n", r.channel, r.demod.snr_db);
        else std::snprintf(buf, sizeof buf, "%d,nan\n", r.channel);
        os << buf;
    }
}

std::uint64_t file_checksum(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read '" + path + "'");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (f.read(buf, sizeof buf) || f.gcount() > 0) {
        for (std::streamsize i = 0; i < f.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

void write_manifest(const std::string& path, const ScenarioConfig& cfg, const RunLog& log, const std::string& out_dir) {
    std::ostringstream os;
    os << "# dcadc run manifest; reload with --config to reproduce every artifact\n";
    os << "# command = " << log.command << "\n\n";
    os << dump_config(cfg) << "\n";
    for (const auto& [name, s] : log.seeds) os << "# seed." << name << " = " << s << "\n";
    char buf[160];
    for (const auto& a : log.artifacts) {
        const std::string full = join(out_dir, a);
        std::snprintf(buf, sizeof buf, "# artifact = %s bytes=%llu fnv1a64=%016llx\n", a.c_str(),
                      static_cast<unsigned long long>(std::filesystem::file_size(full)),
                      static_cast<unsigned long long>(file_checksum(full)));
        os << buf;
    }
    for (const auto& [task, s] : log.timings) {
        std::snprintf(buf, sizeof buf, "# timing.%s_s = %.3f\n", task.c_str(), s);
        os << buf;
    }
    for (const auto& [task, e] : log.errors) os << "# error." << task << " = " << e << "\n";
    write_file(path, os.str());
}

std::vector<SweepPoint> run_sweep(const ScenarioConfig& cfg, const std::string& out_dir, RunLog* log) {
    cfg.validate();
    const auto t0 = Clock::now();
    const auto freqs = sweep_frequencies(cfg.sweep);
    std::vector<SweepPoint> pts(freqs.size());
    parallel_for(freqs.size(), cfg.jobs, [&](std::size_t i) { pts[i] = sweep_point(cfg, i, freqs[i]); });

    RunLog local;
    RunLog& L = log ? *log : local;
    L.command = "sweep-sine";
    char name[64];
    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::snprintf(name, sizeof name, "sweep[%zu]", i);
        L.seeds[name] = derive_seed(cfg.master_seed, "sweep", i);
        L.timings.emplace_back(name, pts[i].seconds);
        if (!pts[i].ok) L.errors.emplace_back(name, pts[i].error);
    }
    L.timings.emplace_back("total", seconds_since(t0));
    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        std::ostringstream os;
        write_sweep_csv(os, pts);
        write_file(join(out_dir, "sweep.csv"), os.str());
        L.artifacts.push_back("sweep.csv");
        write_manifest(join(out_dir, "manifest.txt"), cfg, L, out_dir);
    }
    return pts;
}

std::vector<ChannelResult> run_scm(const ScenarioConfig& scenario, const std::string& out_dir,
                                   const std::vector<int>& channels, RunLog* log) {
    scenario.validate();
    const ScenarioConfig cfg = with_nominal_drive(scenario);
    const auto t0 = Clock::now();
    std::vector<int> chans = channels;
    if (chans.empty())
        for (int k = 1; k <= cfg.scm.n_channels; ++k)
            if (cfg.channel_active(k)) chans.push_back(k);
    for (int k : chans)
        if (k < 1 || k > cfg.scm.n_channels) throw std::invalid_argument("run_scm: channel " + std::to_string(k) + " is not configured");

    std::vector<std::vector<double>> symbols;
    const auto drive = scm_drive(cfg, symbols);
    // Bank mode: every sub-band reads the one modulated burst at once. Sequential mode
    // re-modulates the repeated burst for each sub-band, as a single tuned receiver would.
    std::optional<SampledWaveform> shared_mu;
    if (cfg.parallel_bank) shared_mu = mzm_field(drive, cfg.link.vpi, cfg.link.drive_scale);
    const double drive_s = seconds_since(t0);

    std::vector<ChannelResult> res(chans.size());
    parallel_for(chans.size(), cfg.jobs, [&](std::size_t i) {
        const auto t1 = Clock::now();
        auto& r = res[i];
        r.channel = chans[i];
        try {
            const auto k = static_cast<std::uint64_t>(r.channel);
            const auto beat_seed = derive_seed(cfg.master_seed, "beat", k);
            const SampledWaveform mu = shared_mu ? *shared_mu : mzm_field(drive, cfg.link.vpi, cfg.link.drive_scale);
            const auto cap = capture_from_field(cfg, mu, r.channel, beat_seed, derive_seed(cfg.master_seed, "adc", k));
            r.demod = demod_pam4(cap, demod_for(cfg, r.channel), symbols[static_cast<std::size_t>(r.channel - 1)]);
            r.ok = true;
            // Longer periodic capture of the same sub-band for the spectrum view.
            const auto long_cap = capture_from_field(cfg, mu, r.channel, beat_seed, derive_seed(cfg.master_seed, "adc-spectrum", k),
                                                     cfg.metrics.n_fft * cfg.metrics.n_avg);
            r.spectrum = periodogram(long_cap.to_waveform(), cfg.metrics.n_fft, cfg.metrics.n_avg, cfg.metrics.window);
        } catch (const std::exception& e) {
            r.error = e.what();
        }
        r.seconds = seconds_since(t1);
    });

    RunLog local;
    RunLog& L = log ? *log : local;
    L.command = "run-scm";
    L.seeds["dac"] = derive_seed(cfg.master_seed, "dac");
    L.timings.emplace_back("drive", drive_s);
    for (const auto& r : res) {
        const auto k = static_cast<std::uint64_t>(r.channel);
        const std::string tag = "ch" + std::to_string(r.channel);
        L.seeds[tag + ".symbols"] = derive_seed(cfg.master_seed, "scm-symbols", k);
        L.seeds[tag + ".beat"] = derive_seed(cfg.master_seed, "beat", k);
        L.seeds[tag + ".adc"] = derive_seed(cfg.master_seed, "adc", k);
        L.timings.emplace_back(tag, r.seconds);
        if (!r.ok) L.errors.emplace_back(tag, r.error);
    }
    L.timings.emplace_back("total", seconds_since(t0));
    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        std::ostringstream os;
        write_scm_csv(os, res);
        write_file(join(out_dir, "scm_snr.csv"), os.str());
        L.artifacts.push_back("scm_snr.csv");
        for (const auto& r : res) {
            if (r.spectrum.power_db.empty()) continue;
            const std::string name = "spectrum_ch" + std::to_string(r.channel) + ".csv";
            write_spectrum_file(join(out_dir, name), r.spectrum, r.channel, cfg.adc.rate, "scm");
            L.artifacts.push_back(name);
        }
        write_manifest(join(out_dir, "manifest.txt"), cfg, L, out_dir);
    }
    return res;
}

SpectrumEstimate run_spectrum(const ScenarioConfig& cfg, int channel, const std::string& out_dir, RunLog* log) {
    cfg.validate();
    const auto t0 = Clock::now();
    RunLog local;
    RunLog& L = log ? *log : local;
    L.command = "spectrum";
    SpectrumEstimate s;
    int n = channel;
    double rate = cfg.adc.rate;
    const char* source = "scm";
    if (cfg.source == SourceKind::sweep) {
        const auto route = route_frequency(cfg.sweep.probe, cfg);
        n = route.subband;
        const std::uint64_t seed = derive_seed(cfg.master_seed, "probe");
        const auto cap = capture_subband(with_nominal_drive(cfg), sine_drive(cfg, route.tested_hz, seed), n,
                                         derive_seed(seed, "beat"), derive_seed(seed, "adc"), cfg.sweep.adc_samples);
        const auto m = sine_metrics(cap, std::abs(route.baseband_hz), cfg.metrics);
        s = m.spectrum;
        rate = cfg.metrics.analysis_rate > 0.0 ? cfg.metrics.analysis_rate : cfg.adc.rate;
        source = "sine";
        L.seeds["probe"] = seed;
    } else {
        if (n < 1 || n > cfg.scm.n_channels) throw std::invalid_argument("spectrum: channel " + std::to_string(n) + " is not configured");
        std::vector<std::vector<double>> symbols;
        const auto drive = scm_drive(cfg, symbols);
        const auto k = static_cast<std::uint64_t>(n);
        const auto cap = capture_subband(with_nominal_drive(cfg), drive, n, derive_seed(cfg.master_seed, "beat", k),
                                         derive_seed(cfg.master_seed, "adc-spectrum", k), cfg.metrics.n_fft * cfg.metrics.n_avg);
        s = periodogram(cap.to_waveform(), cfg.metrics.n_fft, cfg.metrics.n_avg, cfg.metrics.window);
        L.seeds["ch" + std::to_string(n) + ".beat"] = derive_seed(cfg.master_seed, "beat", k);
    }
    L.timings.emplace_back("total", seconds_since(t0));
    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        const std::string name = "spectrum_ch" + std::to_string(n) + ".csv";
        write_spectrum_file(join(out_dir, name), s, n, rate, source);
        L.artifacts.push_back(name);
        write_manifest(join(out_dir, "manifest.txt"), cfg, L, out_dir);
    }
    return s;
}

}  // namespace dcadc
