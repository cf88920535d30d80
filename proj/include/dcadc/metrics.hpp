/**
 * @file metrics.hpp
 * @brief Single-tone converter metrics (SFDR, SINAD, ENOB) and sub-band frequency folding.
 */
#pragma once

#include "dcadc/adc.hpp"
#include "dcadc/waveform.hpp"

#include <utility>

namespace dcadc {

struct SineTestOptions {
    double analysis_rate = 1e9;  ///< 0 analyzes at the native capture rate
    std::size_t n_fft = 16384;
    std::size_t n_avg = 4;
    Window window = Window::blackman_harris4;
    double band_lo = 10e6;  ///< lower edge of both the SINAD and the SFDR band
    double band_hi = 0.0;   ///< 0 means Nyquist of the analysis stream
    std::size_t search_bins = 2;
    /// Integrate SINAD from DC instead of band_lo (the AC-coupled region is then counted).
    bool sinad_from_dc = false;
};

struct MetricsReport {
    double sfdr_db = 0.0;
    double sinad_db = 0.0;
    double enob_bits = 0.0;
    double fundamental_hz = 0.0;
    double fundamental_power_db = 0.0;  ///< integrated over the window main lobe
    double spur_hz = 0.0;               ///< location of the largest non-fundamental bin
    double process_gain_db = 0.0;       ///< 10 log10(n_fft / 2)
    SpectrumEstimate spectrum;
    std::pair<double, double> analysis_band{0.0, 0.0};
};

/// ENOB from SINAD by the usual full-scale sine relation.
inline double enob_from_sinad(double sinad_db) { return (sinad_db - 1.76) / 6.02; }

/**
 * Analyze a single-tone record. The record is resampled to opts.analysis_rate (the
 * digital Nyquist filter), its central n_fft * n_avg samples are kept and averaged.
 * Throws std::invalid_argument when the record is too short and std::runtime_error
 * when no tone stands 10 dB above the median floor near expected_hz.
 */
MetricsReport analyze_sine(const SampledWaveform& x, double expected_hz, const SineTestOptions& opts = {});

MetricsReport sine_metrics(const SubbandCapture& cap, double expected_baseband_hz, const SineTestOptions& opts = {});

/// |f - n * delta_f|; throws std::invalid_argument when f lies outside sub-band n.
double fold_frequency(double f, int n, double delta_f);

}  // namespace dcadc
