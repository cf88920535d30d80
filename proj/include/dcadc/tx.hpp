/**
 * @file tx.hpp
 * @brief Signal-under-test generation: SCM-PAM4 bursts, synthesizer sines, DAC front end.
 */
#pragma once

#include "dcadc/waveform.hpp"

#include <cstdint>
#include <vector>

namespace dcadc {

struct ScmConfig {
    int n_channels = 10;
    double channel_spacing = 1e9;
    double baud = 800e6;
    /// Offset added to every subcarrier. Kept at 0 by default: with real-valued
    /// sub-band detection a non-zero offset folds the two sidebands misaligned.
    double baseband_offset = 0.0;
    double rolloff = 0.1;
    double duration = 2.048e-6;
    int levels = 4;
    std::size_t rrc_span = 32;

    /// Throws std::invalid_argument naming the violated rule.
    void validate() const;
};

struct DacConfig {
    int bits = 6;
    double rate = 32e9;
    double lpf_cutoff = 11e9;
    double full_scale = 1.0;
    /// Residual noise power in dB relative to a full-scale sine, integrated over noise_reference_bw.
    double residual_noise_db = -33.5;
    double noise_reference_bw = 10.5e9;
    bool quantize = true;
    bool add_noise = true;
    bool lowpass = true;

    void validate() const;
    /// Per-sample variance of the residual noise (white over rate/2).
    double residual_noise_variance() const;
};

/// floor(duration * baud): 1638 for the default burst.
std::size_t symbols_for_duration(const ScmConfig& cfg);

/**
 * Largest symbol count not exceeding symbols_for_duration() whose period holds an
 * integer number of samples at `rate` and of cycles of every subcarrier, so the
 * burst can be replayed periodically. Throws if none exists above half the burst.
 */
std::size_t periodic_burst_symbols(const ScmConfig& cfg, double rate);

/// Uniform PAM-4 symbols in {-3,-1,1,3}/sqrt(5).
std::vector<double> gen_pam4_symbols(std::size_t count, std::uint64_t seed);

/**
 * Sum over channels k = 1..n of b_k(t) cos(2 pi (k spacing + offset) t), where b_k
 * is the RRC-shaped symbol stream scaled to unit mean power. An empty symbol
 * vector mutes that channel. Rate must be an integer multiple of the baud.
 */
SampledWaveform scm_waveform(const ScmConfig& cfg, const std::vector<std::vector<double>>& per_channel_symbols,
                             double rate);

/// Baseband envelope b_k(t) of one channel (unit mean power), as used by scm_waveform.
SampledWaveform shaped_baseband(const ScmConfig& cfg, const std::vector<double>& symbols, double rate);

SampledWaveform sine_waveform(double freq, double amplitude, double duration, double rate);

/// Clip, quantize, add residual noise, lowpass; each stage switchable in cfg.
SampledWaveform dac_model(const SampledWaveform& x, const DacConfig& cfg, std::uint64_t seed);

/**
 * Linear-in-dB electrical tilt: 0 dB below f_lo, -rolloff_db at f_hi, extrapolated
 * beyond. Zero phase, applied circularly.
 */
SampledWaveform apply_tilt(const SampledWaveform& x, double rolloff_db, double f_lo = 0.1e9, double f_hi = 10e9);

}  // namespace dcadc
