/**
 * @file adc.hpp
 * @brief Low-speed high-resolution sub-band ADC: AC coupling, anti-alias filter,
 *        jittered band-limited sampling, clipping and mid-rise quantization.
 */
#pragma once

#include "dcadc/waveform.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace dcadc {

struct AdcConfig {
    int bits = 14;
    double rate = 2.4e9;
    double full_scale = 32e-6;  ///< amperes of balanced photocurrent at code full scale
    double jitter_rms = 0.0;   ///< seconds
    double aa_cutoff = 1.2e9;
    double ac_couple_hz = 10e6;
    bool ac_coupling = true;
    bool aa_filter = true;

    void validate() const;
    /// First-order highpass response used for AC coupling (1 when disabled).
    cplx ac_response(double f) const;
};

struct SubbandCapture {
    std::vector<std::int32_t> codes;
    AdcConfig cfg;
    int subband_index = 0;
    std::map<std::string, std::uint64_t> seeds;
    double duration = 0.0;

    /// Reconstruction levels in input units.
    SampledWaveform to_waveform() const;
};

/**
 * Digitize x for sub-band n. `n_samples` = 0 takes one period of x; larger counts
 * extend x periodically (the source records are periodic).
 */
SubbandCapture adc_capture(const SampledWaveform& x, int n, const AdcConfig& cfg, std::uint64_t seed,
                           std::size_t n_samples = 0);

/// Quantize an already sampled waveform (x.rate taken as the ADC rate); no filtering.
SubbandCapture quantize_capture(const SampledWaveform& x, int n, const AdcConfig& cfg);

void write_capture_csv(std::ostream& os, const SubbandCapture& cap);
SubbandCapture read_capture_csv(std::istream& is);

}  // namespace dcadc
