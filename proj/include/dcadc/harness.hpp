/**
 * @file harness.hpp
 * @brief Scenario runner: sine sweeps, SCM runs and single-capture spectra, with
 *        CSV artifacts and a reloadable run manifest.
 */
#pragma once

#include "dcadc/config.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace dcadc {

/// Where a requested sweep frequency is actually tested.
struct SweepRoute {
    int subband = 1;
    double baseband_hz = 0.0;  ///< signed offset from subband * delta_f
    double tested_hz = 0.0;
};

SweepRoute route_frequency(double f, const ScenarioConfig& cfg);
std::vector<double> sweep_frequencies(const SweepSpec& s);

struct SweepPoint {
    double requested_hz = 0.0;
    SweepRoute route;
    MetricsReport metrics;
    bool ok = false;
    std::string error;
    double seconds = 0.0;
};

struct ChannelResult {
    int channel = 0;
    DemodReport demod;
    SpectrumEstimate spectrum;
    bool ok = false;
    std::string error;
    double seconds = 0.0;
};

/// Seeds, artifacts and timings collected for the manifest.
struct RunLog {
    std::string command;
    std::map<std::string, std::uint64_t> seeds;
    std::vector<std::string> artifacts;
    std::vector<std::pair<std::string, double>> timings;
    std::vector<std::pair<std::string, std::string>> errors;
};

/// Analog drive for the sine source at f (unit-peak units, tilt applied).
SampledWaveform sine_drive(const ScenarioConfig& cfg, double f, std::uint64_t seed);
/// Full SCM burst after DAC and tilt, one period, with the per-channel symbols.
SampledWaveform scm_drive(const ScenarioConfig& cfg, std::vector<std::vector<double>>& symbols);
/// Mean square of mu at the all-channels SCM loading (Gaussian composite).
double scm_signal_mean_square(const ScenarioConfig& cfg);
/**
 * Copy with link.signal_mean_square pinned to the all-channels SCM loading (unless
 * already set): the configured signal power is the one measured at that drive, so
 * muting channels, the electrical roll-off or a weaker sine lower the optical power.
 */
ScenarioConfig with_nominal_drive(const ScenarioConfig& cfg);
/// Sub-band beat -> ADC for sub-band n from an already modulated field mu.
SubbandCapture capture_from_field(const ScenarioConfig& cfg, const SampledWaveform& mu, int n, std::uint64_t beat_seed,
                                  std::uint64_t adc_seed, std::size_t n_samples = 0);
/// MZM -> sub-band beat -> ADC for sub-band n.
SubbandCapture capture_subband(const ScenarioConfig& cfg, const SampledWaveform& drive, int n, std::uint64_t beat_seed,
                               std::uint64_t adc_seed, std::size_t n_samples = 0);

SweepPoint sweep_point(const ScenarioConfig& cfg, std::size_t index, double f);

/// out_dir empty: compute only. Otherwise writes sweep.csv and manifest.txt.
std::vector<SweepPoint> run_sweep(const ScenarioConfig& cfg, const std::string& out_dir, RunLog* log = nullptr);

/// channels empty: every configured channel. Writes scm_snr.csv, spectrum_chN.csv, manifest.txt.
std::vector<ChannelResult> run_scm(const ScenarioConfig& cfg, const std::string& out_dir,
                                   const std::vector<int>& channels = {}, RunLog* log = nullptr);

/// One capture of sub-band `channel` (SCM source) or of sweep.probe (sine source).
SpectrumEstimate run_spectrum(const ScenarioConfig& cfg, int channel, const std::string& out_dir,
                              RunLog* log = nullptr);

void write_sweep_csv(std::ostream& os, const std::vector<SweepPoint>& pts);
void write_scm_csv(std::ostream& os, const std::vector<ChannelResult>& res);
void write_manifest(const std::string& path, const ScenarioConfig& cfg, const RunLog& log, const std::string& out_dir);

/// FNV-1a 64 of a file's bytes.
std::uint64_t file_checksum(const std::string& path);

/// Run fn(0..n-1) on up to `jobs` threads; fn must not throw.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace dcadc
