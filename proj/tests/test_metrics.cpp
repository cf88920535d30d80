#include <doctest.h>

#include "dcadc/metrics.hpp"

#include <cmath>
#include <random>

using namespace dcadc;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Tone on bin k of the n_fft grid plus independent Gaussian noise of the given power.
SampledWaveform tone_plus_noise(double rate, std::size_t n, double f, double amp, double noise_power, unsigned seed) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> nd(0.0, std::sqrt(noise_power));
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = amp * std::sin(2 * kPi * f * static_cast<double>(i) / rate + 0.3) + (noise_power > 0 ? nd(g) : 0.0);
    return SampledWaveform(std::move(v), rate);
}

constexpr double kBin = 1e9 / 16384;

}  // namespace

TEST_CASE("sine test on a constructed tone plus noise") {
    SineTestOptions o;
    o.analysis_rate = 0;
    const double f = 4096 * kBin;  // 250 MHz
    // SNR 40 dB over 0-500 MHz; SINAD integrates 10-500 MHz so 2% of the noise is excluded.
    const double amp = 1.0, ps = 0.5, pn = ps * 1e-4;
    const double expect = 40.0 - 10 * std::log10((500e6 - 10e6) / 500e6);
    for (Window w : {Window::blackman_harris4, Window::rectangular}) {
        o.window = w;
        const auto r = analyze_sine(tone_plus_noise(1e9, 4 * 16384, f, amp, pn, 1), f, o);
        CHECK(r.sinad_db == doctest::Approx(expect).epsilon(0.5 / 40));
        CHECK(r.fundamental_hz == doctest::Approx(f));
        CHECK(r.fundamental_power_db == doctest::Approx(10 * std::log10(ps)).epsilon(0.01));
        CHECK(r.enob_bits == (r.sinad_db - 1.76) / 6.02);
    }
}

TEST_CASE("sinad from dc flag counts the whole band") {
    SineTestOptions o;
    o.analysis_rate = 0;
    o.sinad_from_dc = true;
    const double f = 4096 * kBin;
    const auto r = analyze_sine(tone_plus_noise(1e9, 4 * 16384, f, 1.0, 0.5e-4, 2), f, o);
    CHECK(r.sinad_db == doctest::Approx(40.0).epsilon(0.5 / 40));
    CHECK(r.analysis_band.first == 0.0);
    CHECK(r.analysis_band.second == 500e6);
}

TEST_CASE("sfdr reads a constructed spur") {
    SineTestOptions o;
    o.analysis_rate = 0;
    const double f = 4096 * kBin, fs = 1311 * kBin;
    std::vector<double> v(4 * 16384);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double t = static_cast<double>(i) / 1e9;
        v[i] = std::sin(2 * kPi * f * t) + std::pow(10.0, -45.0 / 20) * std::sin(2 * kPi * fs * t + 1.0);
    }
    for (Window w : {Window::blackman_harris4, Window::rectangular}) {
        o.window = w;
        const auto r = analyze_sine(SampledWaveform(v, 1e9), f, o);
        CHECK(r.sfdr_db == doctest::Approx(45.0).epsilon(0.5 / 45));
        CHECK(r.spur_hz == doctest::Approx(fs));
        CHECK(r.sinad_db == doctest::Approx(45.0).epsilon(0.5 / 45));
    }
}

TEST_CASE("resampled path: 2.4 GSa/s record analyzed at 1 GSa/s") {
    // White noise at 2.4 GSa/s has density pn/1.2 GHz; the expected SINAD integrates
    // it over 10-450 MHz, safely inside the resampler passband.
    SineTestOptions o;
    o.band_hi = 450e6;
    const double f = 3001 * kBin;
    const double pn = 1e-3;
    const auto x = tone_plus_noise(2.4e9, 160000, f, 1.0, pn, 3);
    const auto r = analyze_sine(x, f, o);
    const double expect = 10 * std::log10(0.5 / (pn / 1.2e9 * (450e6 - 10e6)));
    CHECK(r.sinad_db == doctest::Approx(expect).epsilon(0.3 / expect));
    CHECK(r.spectrum.rbw == doctest::Approx(61035.15625));
    CHECK(r.spectrum.n_fft == 16384);
    CHECK(r.spectrum.n_avg == 4);
    CHECK(r.process_gain_db == doctest::Approx(39.1).epsilon(0.05 / 39.1));
}

TEST_CASE("metrics are invariant to capture gain") {
    SineTestOptions o;
    const double f = 2001 * kBin;
    const auto x = tone_plus_noise(2.4e9, 160000, f, 0.7, 1e-5, 4);
    std::vector<double> big(x.samples());
    for (double& v : big) v *= 1234.5;
    const auto a = analyze_sine(x, f, o);
    const auto b = analyze_sine(SampledWaveform(big, 2.4e9), f, o);
    CHECK(std::abs(a.sinad_db - b.sinad_db) <= 0.01);
    CHECK(std::abs(a.sfdr_db - b.sfdr_db) <= 0.01);
}

TEST_CASE("sine metrics of an ADC capture") {
    AdcConfig cfg;
    cfg.full_scale = 1.0;
    cfg.bits = 8;
    cfg.rate = 1e9;
    cfg.aa_cutoff = 0.5e9;
    const double f = 1001 * kBin;
    const auto x = tone_plus_noise(1e9, 4 * 16384, f, 0.999, 0.0, 0);
    const auto cap = quantize_capture(x, 0, cfg);
    SineTestOptions o;
    o.sinad_from_dc = true;
    const auto r = sine_metrics(cap, f, o);
    CHECK(r.sinad_db == doctest::Approx(6.02 * 8 + 1.76).epsilon(1.0 / 50));
}

TEST_CASE("sine test errors") {
    SineTestOptions o;
    o.analysis_rate = 0;
    CHECK_THROWS_AS(analyze_sine(tone_plus_noise(1e9, 16384, 1e8, 1, 0, 0), 1e8, o), std::invalid_argument);
    CHECK_THROWS_AS(analyze_sine(tone_plus_noise(2.4e9, 60000, 1e8, 1, 0, 0), 1e8, SineTestOptions{}), std::invalid_argument);
    // noise only: nothing stands above the floor
    CHECK_THROWS_AS(analyze_sine(tone_plus_noise(1e9, 4 * 16384, 1e8, 0, 1.0, 5), 1e8, o), std::runtime_error);
    CHECK_THROWS_AS(analyze_sine(tone_plus_noise(1e9, 4 * 16384, 1e8, 1, 0, 0), 6e8, o), std::invalid_argument);
}

TEST_CASE("fold frequency") {
    CHECK(fold_frequency(5.25e9, 5, 1e9) == doctest::Approx(250e6));
    CHECK(fold_frequency(4.75e9, 5, 1e9) == doctest::Approx(250e6));
    CHECK(fold_frequency(7e9, 7, 1e9) == 0.0);
    CHECK_THROWS_AS(fold_frequency(5.6e9, 5, 1e9), std::invalid_argument);
    CHECK_THROWS_AS(fold_frequency(1e9, 1, 0.0), std::invalid_argument);
    // both halves of a sub-band land on the same baseband frequency
    std::mt19937_64 g(9);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int i = 0; i < 200; ++i) {
        const int n = 1 + i % 10;
        const double f = (n + u(g)) * 1e9;
        CHECK(fold_frequency(f, n, 1e9) == doctest::Approx(fold_frequency(2 * n * 1e9 - f, n, 1e9)).epsilon(1e-9));
    }
}
