/** @file comb.cpp
 *  @brief comb-optics implementation. */
#include "dcadc/comb.hpp"

#include "dcadc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <stdexcept>

namespace dcadc {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kQ = 1.602176634e-19;
constexpr double kAseRefBw = 12.5e9;  // 0.1 nm at 1550 nm

double dbm_to_w(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

/// J_k(x) for any integer order and real argument.
double bessel_j(int k, double x) {
    double sign = 1.0;
    if (k < 0) {
        k = -k;
        if (k % 2) sign = -sign;
    }
    if (x < 0.0) {
        x = -x;
        if (k % 2) sign = -sign;
    }
    return sign * std::cyl_bessel_j(static_cast<double>(k), x);
}

std::vector<double> differential_phase(const ScenarioCombs& combs, int n, std::size_t count, double rate,
                                       const LinkConfig& link, std::uint64_t seed) {
    std::vector<double> theta(count, combs.static_phase);
    if (link.phase_noise) {
        const auto ps = wiener_phase(combs.signal.drive_linewidth, count, rate, derive_seed(seed, "drive-signal"));
        const auto pl = wiener_phase(combs.lo.drive_linewidth, count, rate, derive_seed(seed, "drive-lo"));
        for (std::size_t i = 0; i < count; ++i) theta[i] += n * (pl[i] - ps[i]);
    }
    if (link.drift && combs.differential_phase_drift != 0.0)
        for (std::size_t i = 0; i < count; ++i) theta[i] += combs.differential_phase_drift * static_cast<double>(i) / rate;
    // Both combs are cut from the same seed laser: its phase enters both arms of the beat
    // with the same path delay and cancels identically.
    const auto seed_phase = wiener_phase(combs.seed_linewidth, count, rate, derive_seed(seed, "seed-laser"));
    for (std::size_t i = 0; i < count; ++i) theta[i] += seed_phase[i] - seed_phase[i];
    return theta;
}

}  // namespace

cplx CombSpec::amp(int order) const {
    if (!has_order(order)) throw std::out_of_range("comb: tone order not present");
    return tone_amps[static_cast<std::size_t>(order - first_order)];
}

double CombSpec::relative_power(int order) const {
    double mx = 0.0;
    for (const auto& a : tone_amps) mx = std::max(mx, std::norm(a));
    return std::norm(amp(order)) / mx;
}

double CombSpec::flatness_db() const {
    double mx = 0.0, mn = INFINITY;
    for (const auto& a : tone_amps) {
        mx = std::max(mx, std::norm(a));
        mn = std::min(mn, std::norm(a));
    }
    return mn > 0.0 ? 10.0 * std::log10(mx / mn) : INFINITY;
}

void write_comb_csv(std::ostream& os, const CombSpec& c) {
    os << "# spacing_hz = " << c.spacing << "\ntone_index,power_dbm,phase_rad\n";
    char buf[96];
    for (int i = 0; i < c.n_tones; ++i) {
        std::snprintf(buf, sizeof buf, "%d,%.6f,%.9f\n", c.first_order + i, c.tone_powers_dbm[static_cast<std::size_t>(i)],
                      std::arg(c.tone_amps[static_cast<std::size_t>(i)]));
        os << buf;
    }
}

std::vector<cplx> cascade_coefficients(double pm_index, double im_depth, int kmax) {
    // cos(pi/4 - u) = (e^{j pi/4} e^{-ju} + e^{-j pi/4} e^{ju}) / 2 turns the IM gate into two PM terms
    const cplx p = std::polar(1.0, kPi / 4.0);
    const double a1 = pm_index - im_depth / 2.0, a2 = pm_index + im_depth / 2.0;
    std::vector<cplx> c(static_cast<std::size_t>(2 * kmax + 1));
    for (int k = -kmax; k <= kmax; ++k)
        c[static_cast<std::size_t>(k + kmax)] =
            (std::sqrt(2.0) / 2.0) * (p * bessel_j(k, a1) + std::conj(p) * bessel_j(k, a2));
    return c;
}

CombSpec comb_from_cascade(double pm_index, double im_depth, int n_tones, double spacing, double peak_power_dbm) {
    if (!(pm_index > 0.0)) throw std::invalid_argument("comb_from_cascade: pm_index must be > 0");
    if (im_depth < 0.0) throw std::invalid_argument("comb_from_cascade: im_depth must be >= 0");
    if (n_tones < 1) throw std::invalid_argument("comb_from_cascade: n_tones must be >= 1");
    if (!(spacing > 0.0)) throw std::invalid_argument("comb_from_cascade: spacing must be > 0");

    const int kmax = static_cast<int>(std::ceil(pm_index + im_depth)) + 20 + n_tones;
    const auto c = cascade_coefficients(pm_index, im_depth, kmax);
    const int total = 2 * kmax + 1;
    if (n_tones > total) throw std::invalid_argument("comb_from_cascade: fewer usable lines than n_tones");

    int best = -1;
    double best_ratio = INFINITY, best_power = 0.0;
    for (int s = 0; s + n_tones <= total; ++s) {
        double mx = 0.0, mn = INFINITY, sum = 0.0;
        for (int i = s; i < s + n_tones; ++i) {
            const double p = std::norm(c[static_cast<std::size_t>(i)]);
            mx = std::max(mx, p);
            mn = std::min(mn, p);
            sum += p;
        }
        const double ratio = mn > 0.0 ? mx / mn : INFINITY;
        // flattest window wins; among equally flat windows, the strongest
        if (ratio < best_ratio * (1.0 - 1e-9) || (ratio <= best_ratio * (1.0 + 1e-9) && sum > best_power)) {
            best_ratio = ratio;
            best_power = sum;
            best = s;
        }
    }
    if (best < 0 || !(best_ratio <= 1e4))
        throw std::invalid_argument("comb_from_cascade: parameters yield fewer than n_tones lines above -40 dBc");

    CombSpec spec;
    spec.spacing = spacing;
    spec.n_tones = n_tones;
    spec.first_order = best - kmax;
    double mx = 0.0;
    for (int i = best; i < best + n_tones; ++i) mx = std::max(mx, std::abs(c[static_cast<std::size_t>(i)]));
    for (int i = best; i < best + n_tones; ++i) {
        const cplx a = c[static_cast<std::size_t>(i)] / mx;
        spec.tone_amps.push_back(a);
        spec.tone_powers_dbm.push_back(peak_power_dbm + 10.0 * std::log10(std::norm(a)));
    }
    return spec;
}

CombSpec flat_comb(int n_tones, double spacing) {
    if (n_tones < 1) throw std::invalid_argument("flat_comb: n_tones must be >= 1");
    if (!(spacing > 0.0)) throw std::invalid_argument("flat_comb: spacing must be > 0");
    CombSpec c;
    c.spacing = spacing;
    c.n_tones = n_tones;
    c.first_order = 0;
    c.tone_amps.assign(static_cast<std::size_t>(n_tones), cplx(1.0, 0.0));
    c.tone_powers_dbm.assign(static_cast<std::size_t>(n_tones), 0.0);
    return c;
}

void ScenarioCombs::validate() const {
    if (!(delta_f() > 0.0)) throw std::invalid_argument("combs rule violated: delta_f = lo.spacing - signal.spacing must be > 0");
    if (!mutually_coherent) throw std::invalid_argument("combs rule violated: combs must share the seed (mutual coherence)");
    if (seed_linewidth < 0.0) throw std::invalid_argument("combs.seed_linewidth must be >= 0");
    if (signal.drive_linewidth < 0.0 || lo.drive_linewidth < 0.0) throw std::invalid_argument("combs.drive_linewidth must be >= 0");
}

ScenarioCombs reference_combs() {
    ScenarioCombs sc;
    sc.signal = comb_from_cascade(15.5, 1.7, 24, 26e9);
    sc.lo = comb_from_cascade(15.5, 1.7, 24, 27e9);
    return sc;
}

ScalingReport validate_scaling(double bandwidth_b, const ScenarioCombs& combs, int n_subbands) {
    ScalingReport r;
    const double df = combs.delta_f();
    const double fsig = combs.signal.spacing;
    if (bandwidth_b <= 0.0) {
        r.delta_f_margin = df;
        r.fsig_margin = fsig / 2.0;
        return r;
    }
    const double needed = n_subbands > 0 ? bandwidth_b / n_subbands : INFINITY;
    r.delta_f_margin = df - needed;
    r.delta_f_ok = n_subbands > 0 && df >= needed * (1.0 - 1e-12);
    r.fsig_margin = fsig / 2.0 - bandwidth_b;
    r.fsig_ok = fsig / 2.0 > bandwidth_b;
    r.tones_ok = n_subbands >= 1 && combs.signal.has_order(n_subbands) && combs.lo.has_order(n_subbands);
    return r;
}

void LinkConfig::validate(double delta_f) const {
    if (!(drive_scale > 0.0 && drive_scale <= 1.0)) throw std::invalid_argument("link drive rule violated: drive_scale must be in (0, 1]");
    if (!(vpi > 0.0)) throw std::invalid_argument("link.vpi must be > 0");
    if (!(pd_bandwidth > delta_f / 2.0)) throw std::invalid_argument("link bandwidth rule violated: pd_bandwidth must exceed delta_f/2");
    if (!(responsivity > 0.0)) throw std::invalid_argument("link.responsivity must be > 0");
    if (thermal_noise_density < 0.0) throw std::invalid_argument("link.thermal_noise_density must be >= 0");
    if (rx_loss_db < 0.0) throw std::invalid_argument("link.rx_loss must be >= 0 dB");
}

double LinkConfig::tia_sat_current() const { return responsivity * dbm_to_w(tia_sat_dbm); }

SampledWaveform mzm_field(const SampledWaveform& v, double vpi, double drive_scale) {
    if (!(vpi > 0.0)) throw std::invalid_argument("mzm_field: vpi must be > 0");
    std::vector<double> mu(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) mu[i] = std::sin(kPi * v[i] * drive_scale / 2.0);
    return SampledWaveform(std::move(mu), v.rate());
}

double mzm_reference_power(double drive_scale) {
    return 0.5 * (1.0 - std::cyl_bessel_j(0.0, kPi * drive_scale));
}

BeatBudget beat_budget(int n, const ScenarioCombs& combs, const LinkConfig& link) {
    if (!combs.signal.has_order(n) || !combs.lo.has_order(n))
        throw std::out_of_range("subband_beat: sub-band index has no tone pair in the combs");
    BeatBudget b;
    const double loss = std::pow(10.0, -link.rx_loss_db / 10.0);
    b.p_lo = dbm_to_w(link.lo_power_per_tone_dbm) * combs.lo.relative_power(n) * loss;
    b.p_sig = dbm_to_w(link.sig_power_per_ch_dbm) * combs.signal.relative_power(n) * loss;
    const double r = link.responsivity;
    b.mu_ref = link.signal_mean_square > 0.0 ? link.signal_mean_square : mzm_reference_power(link.drive_scale);
    b.gain = 2.0 * r * std::sqrt(b.p_lo * b.p_sig / b.mu_ref);
    if (link.shot_noise) b.shot_psd = 2.0 * kQ * r * (b.p_lo + b.p_sig);
    if (link.thermal_noise) b.thermal_psd = link.thermal_noise_density * link.thermal_noise_density;
    if (link.osnr_noise) {
        const double osnr = std::pow(10.0, link.osnr_db / 10.0);
        // LO x ASE(signal), LO x ASE(LO), signal x ASE(LO); ASE white, referenced to 0.1 nm
        b.osnr_psd = 4.0 * r * r * b.p_lo * (2.0 * b.p_sig + b.p_lo) / (osnr * kAseRefBw);
    }
    return b;
}

std::vector<double> seed_coherence_check(const ScenarioCombs& combs, int n, double duration, double rate,
                                         const LinkConfig& link, std::uint64_t seed) {
    const auto count = static_cast<std::size_t>(std::llround(duration * rate));
    return differential_phase(combs, n, count, rate, link, seed);
}

SampledWaveform subband_beat(const SampledWaveform& mu, int n, const ScenarioCombs& combs, const LinkConfig& link,
                             std::uint64_t seed) {
    combs.validate();
    const double df = combs.delta_f();
    if (n < 1) throw std::out_of_range("subband_beat: n must be >= 1");
    link.validate(df);
    const BeatBudget b = beat_budget(n, combs, link);
    const double rate = mu.rate();
    if (rate <= 2.0 * (n * df + link.pd_bandwidth)) throw std::invalid_argument("subband_beat: mu rate too low for this sub-band");

    const std::size_t count = mu.size();
    const auto z = analytic(mu);
    const auto theta = differential_phase(combs, n, count, rate, link, seed);
    const double cycles_per_sample = n * df / rate;
    const double eps = link.common_mode ? std::pow(10.0, -link.cmrr_db / 20.0) : 0.0;
    const double cm_gain = eps * link.responsivity * b.p_sig / b.mu_ref;
    const double sigma = std::sqrt(b.total_psd() * rate / 2.0);

    Rng rng(derive_seed(seed, "receiver-noise"));
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> i_out(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double turns = cycles_per_sample * static_cast<double>(i);
        const double ph = -2.0 * kPi * (turns - std::floor(turns)) + theta[i];
        const double beat = z[i].real() * std::cos(ph) - z[i].imag() * std::sin(ph);
        double v = b.gain * beat + cm_gain * mu[i] * mu[i];
        if (sigma > 0.0) v += sigma * nd(rng);
        i_out[i] = v;
    }
    SampledWaveform out(std::move(i_out), rate);
    if (link.pd_filter) out = apply_fir(out, fir_lowpass(link.pd_bandwidth, rate));
    if (link.tia_saturation) {
        const double s = link.tia_sat_current();
        std::vector<double> v = out.samples();
        for (double& x : v) x = s * std::tanh(x / s);
        out = SampledWaveform(std::move(v), rate);
    }
    if (link.detector_rolloff_db != 0.0) {
        const double slope = link.detector_rolloff_db / (df / 2.0);
        out = apply_response(out, [slope](double f) { return cplx(std::pow(10.0, -slope * f / 20.0), 0.0); });
    }
    return out;
}

}  // namespace dcadc
