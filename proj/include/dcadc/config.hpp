/**
 * @file config.hpp
 * @brief Scenario description and its line-oriented `section.key = value` file format.
 *
 * Values take unit suffixes according to the key's kind: frequencies accept
 * hz/khz/mhz/ghz, times s/ms/us/ns/ps, levels db or dbm. A bare number is in SI
 * units (Hz, s, dB). `#` starts a comment. Unknown keys and repeated keys are errors.
 */
#pragma once

#include "dcadc/adc.hpp"
#include "dcadc/comb.hpp"
#include "dcadc/demod.hpp"
#include "dcadc/metrics.hpp"
#include "dcadc/tx.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcadc {

class ConfigError : public std::runtime_error {
public:
    /// line = 0 for validation errors that are not tied to one line.
    ConfigError(const std::string& msg, int line = 0, std::string rule = {});
    int line() const { return line_; }
    const std::string& rule() const { return rule_; }

private:
    int line_;
    std::string rule_;
};

enum class SourceKind { sweep, scm };
enum class CombShape { cascade, flat };

struct SweepSpec {
    double start = 0.5e9;
    double stop = 10.5e9;
    double step = 0.25e9;
    double amplitude = 0.014;  ///< peak of the synthesizer drive, fraction of unit-peak MZM drive
    bool snap = true;         ///< move each point onto the analysis FFT grid
    bool via_dac = false;     ///< route the synthesizer through the DAC model
    std::size_t record = std::size_t{1} << 21;  ///< analog samples per (periodic) record
    std::size_t adc_samples = 160000;
    double probe = 5.25e9;    ///< frequency used by the spectrum subcommand
};

struct CombParams {
    CombShape shape = CombShape::flat;
    double pm_index = 15.5;
    double im_depth = 1.7;
    int n_tones = 24;
    double f_sig = 26e9;
    double delta_f = 1e9;
    double peak_power_dbm = 8.0;
    double seed_linewidth = 5e3;
    double drive_linewidth = 0.0;
    double drift_rate = 0.0;  ///< rad/s
    double static_phase = 0.0;
};

struct ScenarioConfig {
    SourceKind source = SourceKind::scm;
    std::uint64_t master_seed = 1;
    int jobs = 1;
    bool parallel_bank = false;  ///< all sub-bands from one modulated burst instead of one at a time
    double analog_rate = 32e9;
    double bandwidth = 10e9;  ///< B, the signal bandwidth to be covered
    int n_subbands = 10;      ///< N
    double electrical_rolloff_db = 3.0;

    SweepSpec sweep;
    ScmConfig scm;
    double scm_rms = 0.25;          ///< composite rms with every channel active, fraction of DAC full scale
    std::vector<int> scm_active;    ///< empty = all channels
    DacConfig dac;
    CombParams combs;
    LinkConfig link;
    AdcConfig adc;
    DemodConfig demod;
    SineTestOptions metrics;

    /// Throws ConfigError naming the violated rule.
    void validate() const;
    ScenarioCombs build_combs() const;
    bool channel_active(int k) const;
};

/// Parse and validate; missing keys keep their defaults.
ScenarioConfig load_config(const std::string& text);
ScenarioConfig load_config_file(const std::string& path);

/// Every key with its value, in a form load_config reproduces exactly.
std::string dump_config(const ScenarioConfig& cfg);

/// Names of all accepted keys, in file order.
std::vector<std::string> config_keys();

}  // namespace dcadc
