/** @file tx.cpp
 *  @brief tx-frontend implementation. */
#include "dcadc/tx.hpp"

#include "dcadc/quantizer.hpp"
#include "dcadc/rng.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace dcadc {
namespace {

constexpr double kPi = 3.14159265358979323846;

bool near_integer(double v, double tol = 1e-6) { return std::abs(v - std::round(v)) <= tol * std::max(1.0, std::abs(v)); }

std::size_t integer_sps(double rate, double baud) {
    const double sps = rate / baud;
    if (!near_integer(sps, 1e-9) || std::round(sps) < 2)
        throw std::invalid_argument("scm: rate must be an integer multiple (>= 2) of the baud");
    return static_cast<std::size_t>(std::llround(sps));
}

}  // namespace

void ScmConfig::validate() const {
    if (n_channels < 1) throw std::invalid_argument("scm.n_channels must be >= 1");
    if (!(channel_spacing > 0.0)) throw std::invalid_argument("scm.channel_spacing must be > 0");
    if (!(baud > 0.0)) throw std::invalid_argument("scm.baud must be > 0");
    if (!(rolloff >= 0.0 && rolloff <= 1.0)) throw std::invalid_argument("scm.rolloff must be in [0, 1]");
    if (baud * (1.0 + rolloff) > channel_spacing * (1.0 + 1e-12))
        throw std::invalid_argument("scm slot rule violated: baud*(1+rolloff) must be <= channel_spacing");
    if (!(std::abs(baseband_offset) < channel_spacing / 2.0))
        throw std::invalid_argument("scm offset rule violated: |baseband_offset| must be < channel_spacing/2");
    if (!(duration > 0.0) || duration * baud < 1.0) throw std::invalid_argument("scm.duration must hold at least one symbol");
    if (levels != 4) throw std::invalid_argument("scm.levels: only PAM-4 is supported");
    if (rrc_span < 8 || rrc_span % 2 != 0) throw std::invalid_argument("scm.rrc_span must be even and >= 8");
}

void DacConfig::validate() const {
    if (bits < 1 || bits > 30) throw std::invalid_argument("dac.bits must be in [1, 30]");
    if (!(rate > 0.0)) throw std::invalid_argument("dac.rate must be > 0");
    if (!(lpf_cutoff > 0.0 && lpf_cutoff < rate / 2.0)) throw std::invalid_argument("dac lpf rule violated: lpf_cutoff must be < rate/2");
    if (!(full_scale > 0.0)) throw std::invalid_argument("dac.full_scale must be > 0");
    if (!(noise_reference_bw > 0.0 && noise_reference_bw <= rate / 2.0))
        throw std::invalid_argument("dac.noise_reference_bw must be in (0, rate/2]");
}

double DacConfig::residual_noise_variance() const {
    // white over [0, rate/2]: the reference band carries the stated fraction
    return 0.5 * full_scale * full_scale * std::pow(10.0, residual_noise_db / 10.0) * (rate / 2.0) / noise_reference_bw;
}

std::size_t symbols_for_duration(const ScmConfig& cfg) {
    return static_cast<std::size_t>(std::floor(cfg.duration * cfg.baud + 1e-9));
}

std::size_t periodic_burst_symbols(const ScmConfig& cfg, double rate) {
    const std::size_t full = symbols_for_duration(cfg);
    for (std::size_t count = full; count >= std::max<std::size_t>(1, full / 2); --count) {
        const double period = static_cast<double>(count) / cfg.baud;
        bool ok = near_integer(period * rate);
        for (int k = 1; ok && k <= cfg.n_channels; ++k)
            ok = near_integer(period * (k * cfg.channel_spacing + cfg.baseband_offset));
        if (ok) return count;
        if (count == 1) break;
    }
    throw std::invalid_argument("scm: no periodic burst length found for this rate/spacing/offset");
}

std::vector<double> gen_pam4_symbols(std::size_t count, std::uint64_t seed) {
    static const double kLevels[4] = {-3.0, -1.0, 1.0, 3.0};
    const double scale = 1.0 / std::sqrt(5.0);
    Rng rng(seed);
    std::vector<double> s(count);
    for (auto& v : s) v = kLevels[rng() >> 62] * scale;  // top two bits: uniform over 4 levels
    return s;
}

SampledWaveform shaped_baseband(const ScmConfig& cfg, const std::vector<double>& symbols, double rate) {
    if (symbols.empty()) throw std::invalid_argument("shaped_baseband: no symbols");
    const std::size_t sps = integer_sps(rate, cfg.baud);
    std::vector<double> up(symbols.size() * sps, 0.0);
    const double gain = std::sqrt(static_cast<double>(sps));  // unit-energy taps -> unit mean power
    for (std::size_t i = 0; i < symbols.size(); ++i) up[i * sps] = symbols[i] * gain;
    return apply_fir(SampledWaveform(std::move(up), rate), rrc_taps(cfg.rolloff, sps, cfg.rrc_span));
}

SampledWaveform scm_waveform(const ScmConfig& cfg, const std::vector<std::vector<double>>& per_channel_symbols,
                             double rate) {
    cfg.validate();
    if (rate < 2.2 * cfg.n_channels * cfg.channel_spacing)
        throw std::invalid_argument("scm_waveform: rate must be >= 2.2 * n_channels * channel_spacing");
    if (per_channel_symbols.size() != static_cast<std::size_t>(cfg.n_channels))
        throw std::invalid_argument("scm_waveform: need one symbol vector per channel");
    std::size_t count = 0;
    for (const auto& s : per_channel_symbols) {
        if (s.empty()) continue;
        if (count != 0 && s.size() != count) throw std::invalid_argument("scm_waveform: symbol-count mismatch between channels");
        count = s.size();
    }
    if (count == 0) throw std::invalid_argument("scm_waveform: all channels muted");
    if (count > symbols_for_duration(cfg))
        throw std::invalid_argument("scm_waveform: symbol-count mismatch (more symbols than duration*baud)");

    const std::size_t n = count * integer_sps(rate, cfg.baud);
    std::vector<double> out(n, 0.0);
    for (int k = 1; k <= cfg.n_channels; ++k) {
        const auto& syms = per_channel_symbols[static_cast<std::size_t>(k - 1)];
        if (syms.empty()) continue;
        const auto b = shaped_baseband(cfg, syms, rate);
        const double fc = k * cfg.channel_spacing + cfg.baseband_offset;
        for (std::size_t i = 0; i < n; ++i)
            out[i] += b[i] * std::cos(2.0 * kPi * fc * static_cast<double>(i) / rate);
    }
    return SampledWaveform(std::move(out), rate);
}

SampledWaveform sine_waveform(double freq, double amplitude, double duration, double rate) {
    if (!(freq >= 0.0 && freq < rate / 2.0)) throw std::invalid_argument("sine_waveform: freq must be in [0, rate/2)");
    const auto n = static_cast<std::size_t>(std::llround(duration * rate));
    if (n == 0) throw std::invalid_argument("sine_waveform: duration shorter than one sample");
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = amplitude * std::sin(2.0 * kPi * freq * static_cast<double>(i) / rate);
    return SampledWaveform(std::move(v), rate);
}

SampledWaveform dac_model(const SampledWaveform& x, const DacConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (std::abs(x.rate() - cfg.rate) > 1e-9 * cfg.rate) throw std::invalid_argument("dac_model: input rate must equal dac.rate");
    std::vector<double> v = x.samples();
    const double fs = cfg.full_scale;
    if (cfg.quantize) {
        const MidRiseQuantizer q(cfg.bits, fs);
        for (double& s : v) s = q.quantize(s);
    } else {
        for (double& s : v) s = std::clamp(s, -fs, fs);
    }
    SampledWaveform y(std::move(v), x.rate());
    if (cfg.add_noise) y = awgn(y, cfg.residual_noise_variance(), seed);
    if (cfg.lowpass) y = apply_fir(y, fir_lowpass(cfg.lpf_cutoff, cfg.rate));
    return y;
}

SampledWaveform apply_tilt(const SampledWaveform& x, double rolloff_db, double f_lo, double f_hi) {
    if (!(f_hi > f_lo)) throw std::invalid_argument("apply_tilt: f_hi must exceed f_lo");
    if (rolloff_db == 0.0) return x;
    return apply_response(x, [=](double f) {
        const double db = f <= f_lo ? 0.0 : -rolloff_db * (f - f_lo) / (f_hi - f_lo);
        return cplx(std::pow(10.0, db / 20.0), 0.0);
    });
}

}  // namespace dcadc
