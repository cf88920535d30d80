/**
 * @file demod.hpp
 * @brief Data-aided SCM-PAM4 sub-band demodulation: band selection, matched filter,
 *        fractionally spaced LMS equalizer and SNR estimation.
 */
#pragma once

#include "dcadc/adc.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace dcadc {

struct DemodConfig {
    int channel_index = 1;
    double baseband_offset = 0.0;
    double baud = 800e6;
    double rolloff = 0.1;
    std::size_t rrc_span = 32;
    std::size_t ffe_taps = 17;  ///< 0 bypasses the equalizer (symbol-centre sampling only)
    std::size_t sps = 2;
    double ffe_step = 0.004;
    double training_fraction = 0.5;
    int training_passes = 8;
    bool ac_compensation = true;
    bool require_convergence = true;

    void validate() const;
};

struct DemodReport {
    double snr_db = 0.0;
    double pre_eq_snr_db = 0.0;
    std::vector<double> equalized_symbols;  ///< gain-normalized, all symbols
    std::array<std::size_t, 4> level_histogram{};  ///< decisions on the evaluated symbols
    std::vector<double> ffe_taps;
    bool converged = true;
};

struct FfeResult {
    std::vector<double> taps;
    double bias = 0.0;  ///< adapted DC term (restores the level lost to AC coupling)
    std::vector<double> output;  ///< one value per symbol
};

/**
 * Fractionally spaced FFE adapted by LMS. y holds sps samples per symbol (sample
 * sps*k is the centre of symbol k, circular indexing); the first training.size()
 * symbols drive the adaptation for `passes` passes, then the taps are frozen and
 * applied to every symbol. Throws std::runtime_error on divergence.
 */
FfeResult ffe_lms(const std::vector<double>& y, std::size_t sps, const std::vector<double>& training, std::size_t taps,
                  double step, int passes = 1);

/// Output of a fixed FFE at every symbol centre.
std::vector<double> ffe_apply(const std::vector<double>& y, std::size_t sps, const std::vector<double>& taps,
                              double bias = 0.0);

/**
 * Demodulate the capture against the known transmitted symbols. SNR is measured on
 * the symbols after the training block (all symbols when training covers the burst).
 */
DemodReport demod_pam4(const SubbandCapture& cap, const DemodConfig& cfg, const std::vector<double>& tx_symbols);

/// 10 log10(E[a^2] / E[((y - c)/g - a)^2]) with the least-squares level fit y ~ g a + c.
double data_aided_snr_db(const std::vector<double>& y, const std::vector<double>& a, std::size_t from = 0);

}  // namespace dcadc
