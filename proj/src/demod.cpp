/** @file demod.cpp
 *  @brief SCM-PAM4 demodulation chain. */
#include "dcadc/demod.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dcadc {

namespace {

constexpr double kPi = 3.14159265358979323846;
// Regularization of the AC-coupling inverse. The lowest non-zero bin of a 2 us burst
// (~0.5 MHz) is restored exactly; DC itself is left to the equalizer bias term.
constexpr double kAcInverseEps = 1e-6;
constexpr double kTapNormLimit = 1e6;
// LMS misadjustment (step * tr(R) / 2, ~3% at the default step) is not a failure to converge.
constexpr double kConvergenceMarginDb = 0.5;

struct LevelFit {
    double gain;
    double offset;
};

// Least-squares y ~ gain * a + offset over symbols [from, end).
LevelFit fit_levels(const std::vector<double>& y, const std::vector<double>& a, std::size_t from) {
    const auto n = static_cast<double>(a.size() - from);
    double my = 0.0, ma = 0.0;
    for (std::size_t k = from; k < a.size(); ++k) {
        my += y[k];
        ma += a[k];
    }
    my /= n;
    ma /= n;
    double ya = 0.0, aa = 0.0;
    for (std::size_t k = from; k < a.size(); ++k) {
        ya += (y[k] - my) * (a[k] - ma);
        aa += (a[k] - ma) * (a[k] - ma);
    }
    if (aa == 0.0) throw std::invalid_argument("demod: reference symbols carry no power");
    const double g = ya / aa;
    return {g, my - g * ma};
}

}  // namespace

void DemodConfig::validate() const {
    if (channel_index < 1) throw std::invalid_argument("demod.channel must be >= 1");
    if (!(baud > 0.0)) throw std::invalid_argument("demod.baud must be > 0");
    if (!(rolloff >= 0.0 && rolloff <= 1.0)) throw std::invalid_argument("demod.rolloff must be in [0, 1]");
    if (ffe_taps != 0 && ffe_taps % 2 == 0) throw std::invalid_argument("ffe taps rule violated: ffe_taps must be odd");
    if (sps < 2) throw std::invalid_argument("demod sps rule violated: sps must be >= 2");
    if (!(ffe_step > 0.0)) throw std::invalid_argument("demod.ffe_step must be > 0");
    if (!(training_fraction > 0.0 && training_fraction <= 1.0))
        throw std::invalid_argument("demod.training_fraction must be in (0, 1]");
    if (training_passes < 1) throw std::invalid_argument("demod.training_passes must be >= 1");
}

std::vector<double> ffe_apply(const std::vector<double>& y, std::size_t sps, const std::vector<double>& taps, double bias) {
    const std::size_t n = y.size() / sps;
    const auto ny = static_cast<std::int64_t>(y.size());
    const auto c = static_cast<std::int64_t>(taps.size() / 2);
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        double acc = bias;
        for (std::size_t j = 0; j < taps.size(); ++j) {
            std::int64_t i = static_cast<std::int64_t>(sps * k) + c - static_cast<std::int64_t>(j);
            i %= ny;
            if (i < 0) i += ny;
            acc += taps[j] * y[static_cast<std::size_t>(i)];
        }
        out[k] = acc;
    }
    return out;
}

FfeResult ffe_lms(const std::vector<double>& y, std::size_t sps, const std::vector<double>& training, std::size_t taps,
                  double step, int passes) {
    if (taps == 0 || taps % 2 == 0) throw std::invalid_argument("ffe_lms: tap count must be odd");
    if (sps < 1 || y.size() % sps != 0) throw std::invalid_argument("ffe_lms: input length is not a whole number of symbols");
    if (training.size() < 10 * taps) throw std::invalid_argument("ffe_lms: training must hold at least 10 * taps symbols");
    if (training.size() > y.size() / sps) throw std::invalid_argument("ffe_lms: more training symbols than input symbols");
    if (!(step > 0.0) || passes < 1) throw std::invalid_argument("ffe_lms: step must be > 0 and passes >= 1");

    FfeResult r;
    r.taps.assign(taps, 0.0);
    r.taps[taps / 2] = 1.0;
    const auto ny = static_cast<std::int64_t>(y.size());
    const auto c = static_cast<std::int64_t>(taps / 2);
    std::vector<double> reg(taps);
    for (int p = 0; p < passes; ++p) {
        for (std::size_t k = 0; k < training.size(); ++k) {
            double out = r.bias;
            for (std::size_t j = 0; j < taps; ++j) {
                std::int64_t i = static_cast<std::int64_t>(sps * k) + c - static_cast<std::int64_t>(j);
                i %= ny;
                if (i < 0) i += ny;
                reg[j] = y[static_cast<std::size_t>(i)];
                out += r.taps[j] * reg[j];
            }
            const double e = training[k] - out;
            for (std::size_t j = 0; j < taps; ++j) r.taps[j] += step * e * reg[j];
            r.bias += step * e;
        }
        const double norm = std::sqrt(std::inner_product(r.taps.begin(), r.taps.end(), r.taps.begin(), 0.0));
        if (!std::isfinite(norm) || norm > kTapNormLimit)
            throw std::runtime_error("ffe_lms: adaptation diverged (tap norm " + std::to_string(norm) +
                                     "); reduce the step size");
    }
    r.output = ffe_apply(y, sps, r.taps, r.bias);
    return r;
}

double data_aided_snr_db(const std::vector<double>& y, const std::vector<double>& a, std::size_t from) {
    if (y.size() != a.size()) throw std::invalid_argument("demod: length mismatch between output and reference symbols");
    if (from >= a.size()) throw std::invalid_argument("demod: no symbols left to evaluate");
    const auto [g, c] = fit_levels(y, a, from);
    if (g == 0.0) return -std::numeric_limits<double>::infinity();
    double ps = 0.0, pe = 0.0;
    for (std::size_t k = from; k < a.size(); ++k) {
        const double e = (y[k] - c) / g - a[k];
        ps += a[k] * a[k];
        pe += e * e;
    }
    return pe > 0.0 ? 10.0 * std::log10(ps / pe) : std::numeric_limits<double>::infinity();
}

DemodReport demod_pam4(const SubbandCapture& cap, const DemodConfig& cfg, const std::vector<double>& tx_symbols) {
    cfg.validate();
    if (tx_symbols.empty()) throw std::invalid_argument("demod: no reference symbols");
    SampledWaveform x = cap.to_waveform();

    if (cfg.ac_compensation && cap.cfg.ac_coupling) {
        const AdcConfig& ac = cap.cfg;
        x = apply_response(x, [&ac](double f) {
            const cplx h = ac.ac_response(f);
            return std::conj(h) / (std::norm(h) + kAcInverseEps);
        });
    }
    // Sub-band selection: keep the channel's occupied band, reject neighbours folded above.
    const double occupied = cfg.baud * (1.0 + cfg.rolloff) / 2.0;
    const double sel = occupied / 0.8 + cfg.baseband_offset;
    if (sel < x.rate() / 2.0) x = apply_fir(x, fir_lowpass(sel, x.rate()));
    if (cfg.baseband_offset != 0.0) {
        std::vector<double> v(x.samples());
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] *= 2.0 * std::cos(2.0 * kPi * cfg.baseband_offset * static_cast<double>(i) / x.rate());
        x = SampledWaveform(std::move(v), x.rate());
    }

    const double target = cfg.baud * static_cast<double>(cfg.sps);
    const std::size_t n_sym = tx_symbols.size();
    if (std::abs(x.duration() * target - static_cast<double>(cfg.sps * n_sym)) > 1e-6)
        throw std::invalid_argument("demod: length mismatch, capture spans " + std::to_string(x.duration() * cfg.baud) +
                                    " symbols but " + std::to_string(n_sym) + " were transmitted");
    x = resample(x, target);
    x = apply_fir(x, rrc_taps(cfg.rolloff, cfg.sps, cfg.rrc_span));

    std::vector<double> y(x.samples());
    const double rms = std::sqrt(x.mean_square());
    if (rms == 0.0) throw std::runtime_error("demod: capture is silent");
    for (double& v : y) v /= rms;

    DemodReport rep;
    std::vector<double> centre(n_sym);
    for (std::size_t k = 0; k < n_sym; ++k) centre[k] = y[cfg.sps * k];
    rep.pre_eq_snr_db = data_aided_snr_db(centre, tx_symbols, 0);

    std::vector<double> out = centre;
    std::size_t from = 0;
    if (cfg.ffe_taps > 0) {
        const auto n_train = static_cast<std::size_t>(std::llround(cfg.training_fraction * static_cast<double>(n_sym)));
        const std::vector<double> train(tx_symbols.begin(), tx_symbols.begin() + static_cast<std::ptrdiff_t>(n_train));
        auto f = ffe_lms(y, cfg.sps, train, cfg.ffe_taps, cfg.ffe_step, cfg.training_passes);
        out = std::move(f.output);
        rep.ffe_taps = std::move(f.taps);
        from = n_train < n_sym ? n_train : 0;
    }
    rep.snr_db = data_aided_snr_db(out, tx_symbols, from);
    const double pre_eval = data_aided_snr_db(centre, tx_symbols, from);
    rep.converged = rep.snr_db >= pre_eval - kConvergenceMarginDb;
    if (!rep.converged && cfg.require_convergence)
        throw std::runtime_error("demod: equalizer did not converge (output SNR " + std::to_string(rep.snr_db) +
                                 " dB below the unequalized " + std::to_string(pre_eval) + " dB)");

    const auto [g, c] = fit_levels(out, tx_symbols, from);
    rep.equalized_symbols.resize(n_sym);
    const double t = 2.0 / std::sqrt(5.0);
    for (std::size_t k = 0; k < n_sym; ++k) {
        const double v = (out[k] - c) / g;
        rep.equalized_symbols[k] = v;
        if (k >= from) ++rep.level_histogram[v < -t ? 0 : v < 0.0 ? 1 : v < t ? 2 : 3];
    }
    return rep;
}

}  // namespace dcadc
