/** @file metrics.cpp
 *  @brief Sine-test metrics on the averaged spectrum. */
#include "dcadc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dcadc {

namespace {

// Bins on each side of the peak that belong to the tone. Wide enough for the
// BH4 main lobe (zeros at +-4) plus scalloping of a slightly off-grid line.
std::size_t lobe_halfwidth(Window w) { return w == Window::blackman_harris4 ? 5 : 1; }

SampledWaveform prepare(const SampledWaveform& x, const SineTestOptions& o) {
    const std::size_t need = o.n_fft * o.n_avg;
    if (o.analysis_rate <= 0.0 || o.analysis_rate == x.rate()) {
        if (x.size() < need) throw std::invalid_argument("sine test: capture too short for n_fft * n_avg samples");
        const std::size_t off = (x.size() - need) / 2;
        return SampledWaveform(std::vector<double>(x.samples().begin() + static_cast<std::ptrdiff_t>(off),
                                                   x.samples().begin() + static_cast<std::ptrdiff_t>(off + need)),
                               x.rate());
    }
    // Trim to a length the rational resampler maps exactly, then keep the middle so the
    // circular wrap of a non-periodic record falls in the discarded margins.
    const double ratio = o.analysis_rate / x.rate();
    std::size_t q = 1;
    while (q <= 4096 && std::abs(ratio * static_cast<double>(q) - std::round(ratio * static_cast<double>(q))) > 1e-9 * ratio * q) ++q;
    if (q > 4096) throw std::invalid_argument("sine test: analysis rate is not a small rational of the capture rate");
    const std::size_t n_in = x.size() - x.size() % q;
    if (n_in == 0 || static_cast<double>(n_in) * ratio < static_cast<double>(need) - 0.5)
        throw std::invalid_argument("sine test: capture too short for n_fft * n_avg samples after resampling");
    const SampledWaveform trimmed(std::vector<double>(x.samples().begin(), x.samples().begin() + static_cast<std::ptrdiff_t>(n_in)), x.rate());
    return prepare(resample(trimmed, o.analysis_rate), SineTestOptions{0.0, o.n_fft, o.n_avg});
}

}  // namespace

MetricsReport analyze_sine(const SampledWaveform& x, double expected_hz, const SineTestOptions& opts) {
    if (opts.n_avg < 1) throw std::invalid_argument("sine test: n_avg must be >= 1");
    const SampledWaveform y = prepare(x, opts);
    const double nyq = y.rate() / 2.0;
    if (!(expected_hz > 0.0 && expected_hz < nyq)) throw std::invalid_argument("sine test: expected frequency outside (0, Nyquist)");
    const double hi = opts.band_hi > 0.0 ? std::min(opts.band_hi, nyq) : nyq;
    if (!(opts.band_lo >= 0.0 && opts.band_lo < hi)) throw std::invalid_argument("sine test: empty analysis band");

    MetricsReport r;
    r.spectrum = periodogram(y, opts.n_fft, opts.n_avg, opts.window);
    const auto& s = r.spectrum;
    const std::size_t nb = s.power_db.size();
    const std::size_t b_lo = static_cast<std::size_t>(std::ceil(opts.band_lo / s.rbw - 1e-9));
    const std::size_t b_hi = std::min(nb - 1, static_cast<std::size_t>(std::floor(hi / s.rbw + 1e-9)));
    const std::size_t s_lo = opts.sinad_from_dc ? 0 : b_lo;

    // Fundamental: largest bin within +-search_bins of the expected bin.
    const std::size_t e = s.bin_of(expected_hz);
    std::size_t peak = e;
    for (std::size_t k = e > opts.search_bins ? e - opts.search_bins : 0; k <= std::min(nb - 1, e + opts.search_bins); ++k)
        if (s.power_db[k] > s.power_db[peak]) peak = k;

    std::vector<double> band;
    for (std::size_t k = b_lo; k <= b_hi; ++k) band.push_back(s.power_db[k]);
    std::nth_element(band.begin(), band.begin() + static_cast<std::ptrdiff_t>(band.size() / 2), band.end());
    const double median = band[band.size() / 2];
    if (s.power_db[peak] < median + 10.0)
        throw std::runtime_error("sine test: fundamental not found 10 dB above the noise floor near " +
                                 std::to_string(expected_hz) + " Hz");

    const std::size_t hw = lobe_halfwidth(opts.window);
    const std::size_t f_lo = peak > hw ? peak - hw : 0;
    const std::size_t f_hi = std::min(nb - 1, peak + hw);
    double p_fund = 0.0;
    for (std::size_t k = f_lo; k <= f_hi; ++k) p_fund += s.linear_power(k);

    double p_rest = 0.0;
    for (std::size_t k = s_lo; k <= b_hi; ++k)
        if (k < f_lo || k > f_hi) p_rest += s.linear_power(k);

    double spur_db = kPowerFloorDb;
    std::size_t spur = b_lo;
    for (std::size_t k = b_lo; k <= b_hi; ++k)
        if ((k < f_lo || k > f_hi) && s.power_db[k] > spur_db) {
            spur_db = s.power_db[k];
            spur = k;
        }

    r.fundamental_hz = s.bin_freqs[peak];
    r.fundamental_power_db = 10.0 * std::log10(p_fund);
    r.spur_hz = s.bin_freqs[spur];
    // SFDR reads both lines off the displayed spectrum (peak bin against peak bin).
    r.sfdr_db = s.power_db[peak] - spur_db;
    r.sinad_db = p_rest > 0.0 ? 10.0 * std::log10(p_fund / p_rest) : -kPowerFloorDb;
    r.enob_bits = enob_from_sinad(r.sinad_db);
    r.process_gain_db = 10.0 * std::log10(static_cast<double>(opts.n_fft) / 2.0);
    r.analysis_band = {s.bin_freqs[s_lo], s.bin_freqs[b_hi]};
    return r;
}

MetricsReport sine_metrics(const SubbandCapture& cap, double expected_baseband_hz, const SineTestOptions& opts) {
    return analyze_sine(cap.to_waveform(), expected_baseband_hz, opts);
}

double fold_frequency(double f, int n, double delta_f) {
    if (!(delta_f > 0.0)) throw std::invalid_argument("fold_frequency: delta_f must be > 0");
    const double d = std::abs(f - n * delta_f);
    if (d > delta_f / 2.0 * (1.0 + 1e-12))
        throw std::invalid_argument("fold_frequency: " + std::to_string(f) + " Hz lies outside sub-band " + std::to_string(n));
    return d;
}

}  // namespace dcadc
