/** @file acceptance.cpp
 *  @brief End-to-end acceptance run: one PASS/FAIL line per criterion, exit 1 if any fail.
 *
 *  Oracles here are built from first principles (constructed signals, closed-form laws,
 *  a direct Wiener solve) and never call back into the quantity under test.
 */
#include "dcadc/demod.hpp"
#include "dcadc/harness.hpp"

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace dcadc;

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

bool within(double v, double target, double tol) { return std::abs(v - target) <= tol; }

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

fs::path work_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("dcadc_acceptance_" + name);
    fs::remove_all(p);
    return p;
}

/// Shared SCM run at the default scenario, reused by criteria 6 and 10.
struct ScmBaseline {
    std::vector<ChannelResult> res;
    double seconds = 0.0;
    fs::path dir;
};

const ScmBaseline& scm_baseline() {
    static const ScmBaseline b = [] {
        ScmBaseline s;
        auto cfg = load_config("");
        cfg.jobs = 1;
        s.dir = work_dir("scm_jobs1");
        const auto t0 = Clock::now();
        s.res = run_scm(cfg, s.dir.string());
        s.seconds = seconds_since(t0);
        return s;
    }();
    return b;
}

struct SweepBaseline {
    std::vector<SweepPoint> pts;
    double seconds = 0.0;
    fs::path dir;
};

const SweepBaseline& sweep_baseline() {
    static const SweepBaseline b = [] {
        SweepBaseline s;
        auto cfg = load_config("source.kind = sweep\n");
        cfg.jobs = 1;
        s.dir = work_dir("sweep_jobs1");
        const auto t0 = Clock::now();
        s.pts = run_sweep(cfg, s.dir.string());
        s.seconds = seconds_since(t0);
        return s;
    }();
    return b;
}

// ---------------------------------------------------------------------------------------

Outcome c1_folding() {
    auto cfg = load_config("source.kind = sweep\n");
    const double bin = cfg.metrics.analysis_rate / static_cast<double>(cfg.metrics.n_fft);
    double worst_s = 0.0;
    std::size_t peak_bin[2] = {0, 0};
    double peak_hz[2] = {0, 0};
    int subband[2] = {0, 0};
    const double probes[2] = {5.25e9, 4.75e9};
    for (int i = 0; i < 2; ++i) {
        cfg.sweep.probe = probes[i];
        const auto t0 = Clock::now();
        const auto s = run_spectrum(cfg, 0, "");
        worst_s = std::max(worst_s, seconds_since(t0));
        std::size_t k = 1;
        for (std::size_t j = 1; j < s.power_db.size(); ++j)
            if (s.power_db[j] > s.power_db[k]) k = j;
        peak_bin[i] = k;
        peak_hz[i] = s.bin_freqs[k];
        subband[i] = route_frequency(probes[i], cfg).subband;
    }
    const bool pass = subband[0] == 5 && subband[1] == 5 && within(peak_hz[0], 250e6, bin) && peak_bin[0] == peak_bin[1] &&
                      worst_s < 10.0;
    return {pass, fmt("sub-bands %d/%d, peaks %.4f / %.4f MHz (bin %.1f kHz), slowest %.2f s", subband[0], subband[1],
                      peak_hz[0] / 1e6, peak_hz[1] / 1e6, bin / 1e3, worst_s)};
}

Outcome c2_metrics_oracle() {
    // Tone + spur at -45 dBc + white noise sized so that noise plus spur sit 40 dB down.
    const double rate = 1e9, bin = rate / 16384;
    const double f = 4099 * bin, fs = 1311 * bin;
    const double ps = 0.5, spur = ps * std::pow(10.0, -4.5), noise = ps * 1e-4 - spur;
    std::mt19937_64 g(2024);
    std::normal_distribution<double> nd(0.0, std::sqrt(noise));
    std::vector<double> v(4 * 16384);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double t = static_cast<double>(i) / rate;
        v[i] = std::sin(2 * kPi * f * t + 0.4) + std::sqrt(2 * spur) * std::sin(2 * kPi * fs * t + 1.1) + nd(g);
    }
    SineTestOptions o;
    o.analysis_rate = 0;
    o.sinad_from_dc = true;
    const auto r = analyze_sine(SampledWaveform(v, rate), f, o);
    const double enob = (r.sinad_db - 1.76) / 6.02;
    const bool pass = within(r.sinad_db, 40.0, 0.5) && within(r.sfdr_db, 45.0, 0.5) && r.enob_bits == enob;
    return {pass, fmt("SINAD %.3f dB, SFDR %.3f dB, ENOB %.4f (law %.4f)", r.sinad_db, r.sfdr_db, r.enob_bits, enob)};
}

Outcome c3_quantization() {
    // 14-bit converter alone: 20.48 us periodic analog record, tone on an odd analysis bin.
    AdcConfig adc;
    adc.full_scale = 1.0;
    const std::size_t n_adc = 3 * 16384;
    const double in_rate = 32e9;
    const auto n_in = n_adc * 40 / 3;
    const double f_adc = 1707 * adc.rate / 16384;  // about 250 MHz
    const auto x = sine_waveform(f_adc, 0.999, static_cast<double>(n_in) / in_rate, in_rate);
    SineTestOptions o;
    o.analysis_rate = 0;
    o.n_avg = 3;
    o.sinad_from_dc = true;
    const double adc_sinad = sine_metrics(adc_capture(x, 1, adc, 1), f_adc, o).sinad_db;

    // 6-bit DAC alone at 32 GSa/s, quantizer only.
    DacConfig dac;
    dac.add_noise = false;
    dac.lowpass = false;
    const double f_dac = 513 * in_rate / 16384;  // about 1 GHz
    const auto y = dac_model(sine_waveform(f_dac, 1.0, 4 * 16384 / in_rate, in_rate), dac, 1);
    SineTestOptions od;
    od.analysis_rate = 0;
    od.sinad_from_dc = true;
    od.band_lo = 0.0;
    const double dac_sinad = analyze_sine(y, f_dac, od).sinad_db;
    const bool pass = within(adc_sinad, 86.0, 1.0) && within(dac_sinad, 37.9, 1.0);
    return {pass, fmt("14-bit ADC %.2f dB (target 86), 6-bit DAC %.2f dB (target 37.9)", adc_sinad, dac_sinad)};
}

Outcome c4_rbw_floor() {
    const auto cfg = load_config("");
    // White noise of known variance through the analysis periodogram: the per-bin floor
    // sits 10 log10(n_fft / 2) below the integrated power.
    const double rate = cfg.metrics.analysis_rate;
    std::mt19937_64 g(4);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> v(cfg.metrics.n_fft * 64);
    double var = 0.0;
    for (double& s : v) {
        s = nd(g);
        var += s * s;
    }
    var /= static_cast<double>(v.size());
    const auto s = periodogram(SampledWaveform(v, rate), cfg.metrics.n_fft, 64, cfg.metrics.window);
    double mean_bin = 0.0;
    for (std::size_t k = 1; k + 1 < s.power_db.size(); ++k) mean_bin += s.linear_power(k);
    mean_bin /= static_cast<double>(s.power_db.size() - 2);
    const double below = 10 * std::log10(var / mean_bin);
    // RBW as reported by the production sine test.
    auto sweep = load_config("source.kind = sweep\n");
    const auto pt = sweep_point(sweep, 0, 5.25e9);
    const double rbw = pt.ok ? pt.metrics.spectrum.rbw : 0.0;
    const bool pass = pt.ok && within(rbw, 61.0e3, 0.05e3) && within(below, 39.1, 0.3) && within(pt.metrics.process_gain_db, 39.1, 0.3);
    return {pass, fmt("RBW %.3f kHz, floor %.2f dB below integrated power, reported process gain %.2f dB", rbw / 1e3, below,
                      pt.metrics.process_gain_db)};
}

Outcome c5_sweep() {
    const auto& b = sweep_baseline();
    if (b.pts.size() != 41) return {false, fmt("%zu points instead of 41", b.pts.size())};
    double min_sfdr = 1e9, lo = 1e9, hi = -1e9, worst_rise = -1e9;
    int failed = 0;
    for (std::size_t i = 0; i < b.pts.size(); ++i) {
        const auto& p = b.pts[i];
        if (!p.ok) {
            ++failed;
            continue;
        }
        min_sfdr = std::min(min_sfdr, p.metrics.sfdr_db);
        lo = std::min(lo, p.metrics.sinad_db);
        hi = std::max(hi, p.metrics.sinad_db);
        for (std::size_t j = 0; j < i; ++j)
            if (b.pts[j].ok) worst_rise = std::max(worst_rise, p.metrics.sinad_db - b.pts[j].metrics.sinad_db);
    }
    if (failed) return {false, fmt("%d sweep points failed", failed)};
    const double decline = b.pts.front().metrics.sinad_db - b.pts.back().metrics.sinad_db;
    // Monotone up to 0.1 dB of run-to-run scatter; the endpoints carry the 3 dB slope.
    const bool pass = min_sfdr > 45.0 && lo >= 17.0 && hi <= 23.0 && worst_rise <= 0.1 && within(decline, 3.0, 1.0) && b.seconds < 300.0;
    return {pass, fmt("SFDR min %.2f dB, SINAD %.2f..%.2f dB, decline %.2f dB, largest rise %.3f dB, %.1f s", min_sfdr, lo, hi,
                      decline, worst_rise, b.seconds)};
}

Outcome c6_scm() {
    const auto& b = scm_baseline();
    double snr1 = NAN, snr10 = NAN;
    for (const auto& r : b.res) {
        if (!r.ok) return {false, fmt("channel %d failed: %s", r.channel, r.error.c_str())};
        if (r.channel == 1) snr1 = r.demod.snr_db;
        if (r.channel == 10) snr10 = r.demod.snr_db;
    }
    auto cfg = load_config("scm.active = 1\n");
    const auto t0 = Clock::now();
    const auto alone = run_scm(cfg, "");
    const double alone_s = seconds_since(t0);
    if (alone.size() != 1 || !alone[0].ok) return {false, "single-channel run failed"};
    const double gain = alone[0].demod.snr_db - snr1;
    const bool pass = within(snr1, 20.1, 1.5) && within(snr10 - snr1, -2.5, 1.0) && within(gain, 3.0, 1.0) && b.seconds < 300.0 &&
                      alone_s < 300.0;
    return {pass, fmt("ch1 %.2f dB, ch10 %.2f dB (%+.2f), ch1 alone %+.2f dB, %.1f s", snr1, snr10, snr10 - snr1, gain, b.seconds)};
}

// Solve A w = b by Gaussian elimination with partial pivoting.
std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        std::swap(a[c], a[p]);
        std::swap(b[c], b[p]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> w(n);
    for (std::size_t c = n; c-- > 0;) {
        double s = b[c];
        for (std::size_t k = c + 1; k < n; ++k) s -= a[c][k] * w[k];
        w[c] = s / a[c][c];
    }
    return w;
}

Outcome c7_equalizer() {
    const ScmConfig sc;
    const DemodConfig dc;
    const std::size_t n_sym = 1636;
    const double rate = 2.4e9;
    const auto a = gen_pam4_symbols(n_sym, 77);
    const double edge = sc.baud * (1.0 + sc.rolloff) / 2.0;

    // Part 1: demodulator on a capture with 8 dB of roll-off across the channel, 30 dB matched SNR.
    auto x = apply_tilt(shaped_baseband(sc, a, rate), 8.0, 1e6, edge);
    x = awgn(x, rate / (dc.baud * 1e3), 78);
    AdcConfig adc;
    adc.bits = 24;
    adc.full_scale = 8.0;
    adc.ac_coupling = false;
    const auto cap = quantize_capture(x, 1, adc);
    DemodConfig plain = dc;
    plain.ffe_taps = 0;
    const double eq = demod_pam4(cap, dc, a).snr_db;
    const double raw = demod_pam4(cap, plain, a).snr_db;

    // Part 2: LMS against the Wiener solution on the same matched-filtered 2-sps stream.
    const std::size_t big = 20000;
    const auto b = gen_pam4_symbols(big, 79);
    auto z = apply_tilt(shaped_baseband(sc, b, 2 * sc.baud), 8.0, 1e6, edge);
    z = awgn(z, 2.0 / std::pow(10.0, 2.5), 80);
    z = apply_fir(z, rrc_taps(dc.rolloff, 2, dc.rrc_span));
    std::vector<double> y(z.samples());
    const double rms = std::sqrt(z.mean_square());
    for (double& s : y) s /= rms;
    const std::size_t L = dc.ffe_taps, c = L / 2;
    const auto ny = static_cast<std::ptrdiff_t>(y.size());
    auto reg = [&](std::size_t k, std::size_t j) {
        const auto i = static_cast<std::ptrdiff_t>(2 * k + c) - static_cast<std::ptrdiff_t>(j);
        return y[static_cast<std::size_t>((i % ny + ny) % ny)];
    };
    std::vector<std::vector<double>> R(L, std::vector<double>(L, 0.0));
    std::vector<double> p(L, 0.0);
    for (std::size_t k = 0; k < big; ++k)
        for (std::size_t i = 0; i < L; ++i) {
            p[i] += reg(k, i) * b[k];
            for (std::size_t j = 0; j < L; ++j) R[i][j] += reg(k, i) * reg(k, j);
        }
    const auto w = solve(R, p);
    auto mse = [&](const std::vector<double>& out) {
        double s = 0;
        for (std::size_t k = 0; k < big; ++k) s += (out[k] - b[k]) * (out[k] - b[k]);
        return s / static_cast<double>(big);
    };
    const double mse_w = mse(ffe_apply(y, 2, w));
    const auto lms = ffe_lms(y, 2, b, L, dc.ffe_step, dc.training_passes);
    const double mse_l = mse(lms.output);
    const double gap = 10 * std::log10(mse_l / mse_w);
    const bool pass = eq >= raw + 3.0 && gap <= 1.0;
    return {pass, fmt("FFE %.2f dB vs unequalized %.2f dB (%+.2f), LMS MSE %.2f dB above Wiener", eq, raw, eq - raw, gap)};
}

Outcome c8_jitter() {
    AdcConfig adc;
    adc.full_scale = 1.0;
    adc.bits = 24;
    const double in_rate = 32e9;
    const std::size_t n_in = 3 * 16384 * 40 / 3;
    const double bin = adc.rate / 16384;
    SineTestOptions o;
    o.analysis_rate = 0;
    o.n_avg = 3;
    o.sinad_from_dc = true;
    auto tone = [&](double f) { return sine_waveform(f, 0.9, static_cast<double>(n_in) / in_rate, in_rate); };

    const double f400 = 2731 * bin;  // 400.0 MHz
    adc.jitter_rms = 0.01 / (2 * kPi * 400e6);
    const double jit = sine_metrics(adc_capture(tone(f400), 1, adc, 5), f400, o).sinad_db;

    // Jitter off: a fixed analog noise floor stands in for every frequency-independent
    // limit, so any spread comes from the sampling process itself.
    adc.jitter_rms = 0.0;
    double lo = 1e9, hi = -1e9;
    for (double k : {341.0, 1025.0, 1707.0, 2389.0, 3073.0}) {
        const double f = k * bin;
        const auto x = awgn(tone(f), 0.405 * 1e-6, 6);
        const double s = sine_metrics(adc_capture(x, 1, adc, 6), f, o).sinad_db;
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    const bool pass = within(jit, 40.0, 1.0) && hi - lo <= 0.2;
    return {pass, fmt("jittered SINAD at 400 MHz %.2f dB; jitter-free spread over 50-450 MHz %.3f dB", jit, hi - lo)};
}

Outcome c9_seed_linewidth() {
    auto with_lw = load_config("");
    auto without = with_lw;
    without.combs.seed_linewidth = 0.0;
    // Sine path: raw codes of one sub-band capture.
    auto sw = with_lw;
    sw.source = SourceKind::sweep;
    auto sw0 = without;
    sw0.source = SourceKind::sweep;
    const auto p = sweep_point(sw, 3, 5.25e9);
    const auto p0 = sweep_point(sw0, 3, 5.25e9);
    const auto route = route_frequency(5.25e9, sw);
    const auto drive = sine_drive(sw, route.tested_hz, 11);
    const auto ca = capture_subband(with_nominal_drive(sw), drive, route.subband, 12, 13, sw.sweep.adc_samples);
    const auto cb = capture_subband(with_nominal_drive(sw0), drive, route.subband, 12, 13, sw.sweep.adc_samples);
    // SCM path: written artifacts.
    const auto da = work_dir("lw5k"), db = work_dir("lw0");
    run_scm(with_lw, da.string(), {1, 10});
    run_scm(without, db.string(), {1, 10});
    bool files = true;
    for (const char* n : {"scm_snr.csv", "spectrum_ch1.csv", "spectrum_ch10.csv"}) files = files && slurp(da / n) == slurp(db / n);
    const bool codes = ca.codes == cb.codes;
    const bool metrics = p.ok && p0.ok && p.metrics.sinad_db == p0.metrics.sinad_db && p.metrics.sfdr_db == p0.metrics.sfdr_db;
    fs::remove_all(da);
    fs::remove_all(db);
    return {codes && metrics && files, fmt("capture codes %s, sine metrics %s, SCM artifacts %s", codes ? "identical" : "differ",
                                           metrics ? "identical" : "differ", files ? "identical" : "differ")};
}

Outcome c10_jobs() {
    const auto& scm = scm_baseline();
    const auto& sweep = sweep_baseline();
    auto cfg = load_config("");
    cfg.jobs = 4;
    const auto ds = work_dir("scm_jobs4");
    run_scm(cfg, ds.string());
    auto scfg = load_config("source.kind = sweep\n");
    scfg.jobs = 3;
    const auto dw = work_dir("sweep_jobs3");
    run_sweep(scfg, dw.string());
    int compared = 0, differ = 0;
    for (const auto& e : fs::directory_iterator(scm.dir)) {
        const auto name = e.path().filename();
        if (name.extension() != ".csv") continue;
        ++compared;
        if (slurp(e.path()) != slurp(ds / name)) ++differ;
    }
    ++compared;
    if (slurp(sweep.dir / "sweep.csv") != slurp(dw / "sweep.csv")) ++differ;
    fs::remove_all(ds);
    fs::remove_all(dw);
    return {compared >= 12 && differ == 0, fmt("%d CSV files compared across job counts, %d differ", compared, differ)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"1 sub-band folding", c1_folding},
        {"2 metrics oracle", c2_metrics_oracle},
        {"3 quantization laws", c3_quantization},
        {"4 RBW and noise floor", c4_rbw_floor},
        {"5 sine sweep", c5_sweep},
        {"6 SCM SNR", c6_scm},
        {"7 equalizer", c7_equalizer},
        {"8 aperture jitter", c8_jitter},
        {"9 seed linewidth", c9_seed_linewidth},
        {"10 job-count determinism", c10_jobs},
    };
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("%s criterion %-26s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
    }
    fs::remove_all(scm_baseline().dir);
    fs::remove_all(sweep_baseline().dir);
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
