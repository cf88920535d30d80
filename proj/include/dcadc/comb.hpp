/**
 * @file comb.hpp
 * @brief Mutually coherent comb pair, null-biased MZM and per-sub-band balanced beat.
 *
 * Sub-band n is simulated in equivalent baseband: every signal-comb tone carries
 * the same field modulation mu(t), so the beat between signal tone n and LO tone n
 * is mu(t) shifted down by n*delta_f. Tone orders are counted from the shared seed
 * line (order 0).
 */
#pragma once

#include "dcadc/waveform.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace dcadc {

struct CombSpec {
    double spacing = 26e9;
    int n_tones = 1;
    int first_order = 0;             ///< order of tone_amps[0] relative to the seed line
    std::vector<cplx> tone_amps;     ///< field amplitudes, max magnitude 1
    std::vector<double> tone_powers_dbm;
    double drive_linewidth = 0.0;    ///< RF synthesizer Wiener linewidth, Hz

    bool has_order(int k) const { return k >= first_order && k < first_order + n_tones; }
    cplx amp(int order) const;
    /// |a_k|^2 / max |a|^2
    double relative_power(int order) const;
    /// max/min tone power ratio, dB
    double flatness_db() const;
    double span() const { return spacing * (n_tones - 1); }
};

void write_comb_csv(std::ostream& os, const CombSpec& c);

/// Raw tone coefficients c_k, k = -kmax..kmax, of the cascaded PM + IM field
/// exp(j m sin t) * sqrt(2) cos(pi/4 - (d/2) sin t). sum |c_k|^2 = 1 for any m, d.
std::vector<cplx> cascade_coefficients(double pm_index, double im_depth, int kmax);

/**
 * Comb from cascaded phase and intensity modulators: picks the n_tones consecutive
 * orders with the smallest power variation and normalizes the strongest to 0 dB.
 * Throws if the window contains a tone more than 40 dB below the strongest.
 */
CombSpec comb_from_cascade(double pm_index, double im_depth, int n_tones, double spacing = 26e9,
                           double peak_power_dbm = 8.0);

/// Ideal comb, orders 0..n_tones-1, equal 0 dBm tones.
CombSpec flat_comb(int n_tones, double spacing);

struct ScenarioCombs {
    CombSpec signal;
    CombSpec lo;
    double seed_linewidth = 5e3;
    double differential_phase_drift = 0.0;  ///< rad/s
    double static_phase = 0.0;              ///< rad
    bool mutually_coherent = true;

    double delta_f() const { return lo.spacing - signal.spacing; }
    void validate() const;
};

/// 24-tone cascade combs at 26 and 27 GHz.
ScenarioCombs reference_combs();

struct ScalingReport {
    bool delta_f_ok = true;
    bool fsig_ok = true;
    bool tones_ok = true;
    double delta_f_margin = 0.0;  ///< delta_f - B/N, Hz
    double fsig_margin = 0.0;     ///< f_sig/2 - B, Hz
    bool pass() const { return delta_f_ok && fsig_ok && tones_ok; }
};

/// Checks delta_f >= B/N and f_sig/2 > B for N sub-bands. Report only, never throws.
ScalingReport validate_scaling(double bandwidth_b, const ScenarioCombs& combs, int n_subbands);

struct LinkConfig {
    double vpi = 4.0;
    double drive_scale = 0.3;
    double sig_power_per_ch_dbm = -5.0;  ///< per comb line: ten SCM channels at about -15 dBm each
    double lo_power_per_tone_dbm = 8.0 - 12.0;
    double osnr_db = 55.0;
    double pd_bandwidth = 1.2e9;
    double tia_sat_dbm = -13.0;
    double cmrr_db = 6.0;  ///< two PD/TIA/ADC chains subtracted digitally
    double responsivity = 0.8;
    double thermal_noise_density = 2.0e-12;  ///< A/sqrt(Hz)
    double rx_loss_db = 14.0;                ///< optical loss ahead of the photodiodes
    double detector_rolloff_db = 0.0;        ///< post-TIA tilt reaching this loss at delta_f/2

    bool shot_noise = true;
    bool thermal_noise = true;
    bool osnr_noise = true;
    bool common_mode = true;
    bool tia_saturation = true;
    bool pd_filter = true;
    bool phase_noise = true;
    bool drift = true;
    /// Mean square of mu at the drive where sig_power_per_ch was measured; 0 refers
    /// the power to a full-scale sine drive instead.
    double signal_mean_square = 0.0;

    void validate(double delta_f) const;
    double tia_sat_current() const;
};

/// mu(t) = sin(pi * v(t) * drive_scale / 2) for v normalized to unit peak.
SampledWaveform mzm_field(const SampledWaveform& v, double vpi, double drive_scale);

/// Mean square of mu for a full-scale (unit peak) sine drive: (1 - J0(pi*drive_scale)) / 2.
double mzm_reference_power(double drive_scale);

/// Beat gain G_n in amperes per unit of mu, and the noise budget for sub-band n.
struct BeatBudget {
    double gain = 0.0;
    double p_lo = 0.0;  ///< W at the photodiodes
    double p_sig = 0.0;
    double mu_ref = 0.0;  ///< mean square of mu that carries p_sig
    double shot_psd = 0.0;  ///< one-sided, A^2/Hz
    double thermal_psd = 0.0;
    double osnr_psd = 0.0;
    double total_psd() const { return shot_psd + thermal_psd + osnr_psd; }
};

BeatBudget beat_budget(int n, const ScenarioCombs& combs, const LinkConfig& link);

/// Differential phase of tone pair n: n * (phi_lo - phi_sig) drive noise + static + drift.
std::vector<double> seed_coherence_check(const ScenarioCombs& combs, int n, double duration, double rate,
                                         const LinkConfig& link, std::uint64_t seed);

/// Balanced photocurrent of sub-band n (amperes), same rate as mu.
SampledWaveform subband_beat(const SampledWaveform& mu, int n, const ScenarioCombs& combs, const LinkConfig& link,
                             std::uint64_t seed);

}  // namespace dcadc
