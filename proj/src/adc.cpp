/** @file adc.cpp
 *  @brief adc-model implementation. */
#include "dcadc/adc.hpp"

#include "dcadc/quantizer.hpp"
#include "dcadc/rng.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace dcadc {

void AdcConfig::validate() const {
    if (bits < 1 || bits > 24) throw std::invalid_argument("adc bits rule violated: bits must be in [1, 24]");
    if (!(rate > 0.0)) throw std::invalid_argument("adc.rate must be > 0");
    if (!(full_scale > 0.0)) throw std::invalid_argument("adc.full_scale must be > 0");
    if (!(jitter_rms >= 0.0)) throw std::invalid_argument("adc.jitter_rms must be >= 0");
    if (!(aa_cutoff > 0.0 && aa_cutoff <= rate / 2.0 * (1.0 + 1e-12)))
        throw std::invalid_argument("adc anti-alias rule violated: aa_cutoff must be in (0, rate/2]");
    if (!(ac_couple_hz > 0.0)) throw std::invalid_argument("adc.ac_couple must be > 0");
}

cplx AdcConfig::ac_response(double f) const {
    if (!ac_coupling) return cplx(1.0, 0.0);
    const cplx jw(0.0, f / ac_couple_hz);
    return jw / (1.0 + jw);
}

SampledWaveform SubbandCapture::to_waveform() const {
    const MidRiseQuantizer q(cfg.bits, cfg.full_scale);
    std::vector<double> v(codes.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = q.value(codes[i]);
    return SampledWaveform(std::move(v), cfg.rate);
}

SubbandCapture adc_capture(const SampledWaveform& x, int n, const AdcConfig& cfg, std::uint64_t seed,
                           std::size_t n_samples) {
    cfg.validate();
    if (x.rate() < 4.0 * cfg.rate * (1.0 - 1e-12)) throw std::invalid_argument("adc_capture: input rate must be >= 4 * adc rate");
    if (n_samples == 0) n_samples = static_cast<std::size_t>(std::floor(x.duration() * cfg.rate + 1e-9));
    if (n_samples == 0) throw std::invalid_argument("adc_capture: input shorter than one output sample");

    SampledWaveform y = x;
    if (cfg.ac_coupling) y = apply_response(y, [&cfg](double f) { return cfg.ac_response(f); });
    if (cfg.aa_filter) y = apply_fir(y, fir_lowpass(cfg.aa_cutoff, y.rate()));

    const std::uint64_t jitter_seed = derive_seed(seed, "adc-jitter");
    std::vector<double> t(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) t[k] = static_cast<double>(k) / cfg.rate;
    if (cfg.jitter_rms > 0.0) {
        Rng rng(jitter_seed);
        std::normal_distribution<double> nd(0.0, cfg.jitter_rms);
        for (double& v : t) v += nd(rng);
    }
    const auto samples = bandlimited_sample(y, t);

    SubbandCapture cap;
    cap.cfg = cfg;
    cap.subband_index = n;
    cap.duration = static_cast<double>(n_samples) / cfg.rate;
    cap.seeds["adc"] = seed;
    cap.seeds["adc-jitter"] = jitter_seed;
    const MidRiseQuantizer q(cfg.bits, cfg.full_scale);
    cap.codes.resize(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) cap.codes[k] = q.code(samples[k]);
    return cap;
}

SubbandCapture quantize_capture(const SampledWaveform& x, int n, const AdcConfig& cfg) {
    AdcConfig c = cfg;
    c.rate = x.rate();
    c.aa_cutoff = std::min(c.aa_cutoff, c.rate / 2.0);
    c.validate();
    SubbandCapture cap;
    cap.cfg = c;
    cap.subband_index = n;
    cap.duration = x.duration();
    const MidRiseQuantizer q(c.bits, c.full_scale);
    cap.codes.resize(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) cap.codes[k] = q.code(x[k]);
    return cap;
}

void write_capture_csv(std::ostream& os, const SubbandCapture& cap) {
    char buf[128];
    auto line = [&](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "# %s = %.17g\n", key, v);
        os << buf;
    };
    line("bits", cap.cfg.bits);
    line("rate_hz", cap.cfg.rate);
    line("full_scale", cap.cfg.full_scale);
    line("jitter_rms_s", cap.cfg.jitter_rms);
    line("aa_cutoff_hz", cap.cfg.aa_cutoff);
    line("ac_couple_hz", cap.cfg.ac_couple_hz);
    line("ac_coupling", cap.cfg.ac_coupling ? 1 : 0);
    line("aa_filter", cap.cfg.aa_filter ? 1 : 0);
    line("subband_index", cap.subband_index);
    line("duration_s", cap.duration);
    for (const auto& [name, s] : cap.seeds) os << "# seed." << name << " = " << s << "\n";
    os << "index,code\n";
    for (std::size_t i = 0; i < cap.codes.size(); ++i) os << i << ',' << cap.codes[i] << '\n';
}

SubbandCapture read_capture_csv(std::istream& is) {
    SubbandCapture cap;
    std::string ln;
    bool header = false;
    while (std::getline(is, ln)) {
        if (ln.empty()) continue;
        if (ln[0] == '#') {
            const auto eq = ln.find('=');
            if (eq == std::string::npos) continue;
            std::string key = ln.substr(1, eq - 1);
            key.erase(0, key.find_first_not_of(' '));
            key.erase(key.find_last_not_of(' ') + 1);
            const std::string val = ln.substr(eq + 1);
            if (key.rfind("seed.", 0) == 0) {
                cap.seeds[key.substr(5)] = std::stoull(val);
                continue;
            }
            const double v = std::stod(val);
            if (key == "bits") cap.cfg.bits = static_cast<int>(v);
            else if (key == "rate_hz") cap.cfg.rate = v;
            else if (key == "full_scale") cap.cfg.full_scale = v;
            else if (key == "jitter_rms_s") cap.cfg.jitter_rms = v;
            else if (key == "aa_cutoff_hz") cap.cfg.aa_cutoff = v;
            else if (key == "ac_couple_hz") cap.cfg.ac_couple_hz = v;
            else if (key == "ac_coupling") cap.cfg.ac_coupling = v != 0.0;
            else if (key == "aa_filter") cap.cfg.aa_filter = v != 0.0;
            else if (key == "subband_index") cap.subband_index = static_cast<int>(v);
            else if (key == "duration_s") cap.duration = v;
            continue;
        }
        if (!header) {
            if (ln != "index,code") throw std::runtime_error("capture csv: expected 'index,code' header");
            header = true;
            continue;
        }
        const auto comma = ln.find(',');
        if (comma == std::string::npos) throw std::runtime_error("capture csv: malformed row '" + ln + "'");
        const auto idx = std::stoull(ln.substr(0, comma));
        if (idx != cap.codes.size()) throw std::runtime_error("capture csv: non-consecutive index");
        cap.codes.push_back(static_cast<std::int32_t>(std::stol(ln.substr(comma + 1))));
    }
    if (!header) throw std::runtime_error("capture csv: missing header");
    cap.cfg.validate();
    return cap;
}

}  // namespace dcadc
