/**
 * @file waveform.hpp
 * @brief Sampled-signal primitives: waveforms, spectra, filters, resampling, noise.
 *
 * Every record is treated as one period of a periodic signal. Filters, responses
 * and resampling are circular, so a linear-phase filter centered on tap 0 has
 * zero group delay and no edge transients.
 */
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace dcadc {

using cplx = std::complex<double>;

/// Power floor used in place of -inf for zero-power bins.
inline constexpr double kPowerFloorDb = -400.0;

class SampledWaveform {
public:
    SampledWaveform(std::vector<double> samples, double rate);

    const std::vector<double>& samples() const { return samples_; }
    double rate() const { return rate_; }
    std::size_t size() const { return samples_.size(); }
    double duration() const { return static_cast<double>(samples_.size()) / rate_; }
    double operator[](std::size_t i) const { return samples_[i]; }

    double mean_square() const;

private:
    std::vector<double> samples_;
    double rate_;
};

class ComplexWaveform {
public:
    ComplexWaveform(std::vector<cplx> samples, double rate);

    const std::vector<cplx>& samples() const { return samples_; }
    double rate() const { return rate_; }
    std::size_t size() const { return samples_.size(); }
    cplx operator[](std::size_t i) const { return samples_[i]; }

    SampledWaveform real() const;

private:
    std::vector<cplx> samples_;
    double rate_;
};

enum class Window { rectangular, blackman_harris4 };

std::string to_string(Window w);
Window window_from_string(const std::string& name);
std::vector<double> window_coefficients(Window w, std::size_t n);

struct SpectrumEstimate {
    std::vector<double> bin_freqs;  ///< Hz, n_fft/2 + 1 entries
    std::vector<double> power_db;   ///< dB re `reference`
    double rbw = 0.0;
    std::size_t n_fft = 0;
    std::size_t n_avg = 0;
    Window window = Window::rectangular;
    std::string reference = "1 unit^2";

    double linear_power(std::size_t bin) const;
    std::size_t bin_of(double freq_hz) const;
};

/**
 * Averaged one-sided periodogram over n_avg consecutive segments.
 *
 * Normalized so that sum over bins of the linear power equals the mean square
 * of the input: P_k = c_k |X_k|^2 / (n_fft * sum w^2), c_k = 2 except DC and
 * Nyquist. For a window this is the power-preserving (ENBW) normalization, so
 * noise bins read correctly and a tone spreads over its main lobe.
 */
SpectrumEstimate periodogram(const SampledWaveform& x, std::size_t n_fft, std::size_t n_avg = 1,
                             Window window = Window::rectangular);

void write_spectrum_csv(std::ostream& os, const SpectrumEstimate& s);

ComplexWaveform analytic(const SampledWaveform& x);

std::vector<double> rrc_taps(double rolloff, std::size_t sps, std::size_t span);

/// Kaiser-windowed sinc lowpass, odd length, DC gain exactly 1.
/// length = 0 picks the shortest filter meeting 60 dB stopband from 1.4*cutoff.
std::vector<double> fir_lowpass(double cutoff, double rate, std::size_t length = 0);

/// Circular convolution with a kernel centered on its middle tap.
SampledWaveform apply_fir(const SampledWaveform& x, const std::vector<double>& taps);
ComplexWaveform apply_fir(const ComplexWaveform& x, const std::vector<double>& taps);

/// Multiply the spectrum by H(f), f in Hz over [0, rate/2]; conjugate symmetry is kept.
SampledWaveform apply_response(const SampledWaveform& x, const std::function<cplx(double)>& h);

/// Maximum numerator/denominator accepted by resample().
inline constexpr std::int64_t kMaxResampleFactor = 4096;

SampledWaveform resample(const SampledWaveform& x, double new_rate);

/// Band-limited evaluation of the periodic waveform at arbitrary times (seconds).
std::vector<double> bandlimited_sample(const SampledWaveform& x, const std::vector<double>& times);

SampledWaveform awgn(const SampledWaveform& x, double noise_power, std::uint64_t seed);

std::vector<double> wiener_phase(double linewidth, std::size_t n, double rate, std::uint64_t seed);

void write_waveform_csv(std::ostream& os, const SampledWaveform& x);

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace dcadc
