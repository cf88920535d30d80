/** @file config.cpp
 *  @brief Scenario file parsing, validation and round-trip dumping. */
#include "dcadc/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace dcadc {

ConfigError::ConfigError(const std::string& msg, int line, std::string rule)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line), rule_(std::move(rule)) {}

namespace {

enum class Kind { hz, time, db, dbm, number, integer, count, seed, boolean, source, shape, window, channels };

struct Field {
    std::string key;
    Kind kind;
    void* ptr;
};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

const std::map<std::string, double>& suffixes(Kind k) {
    static const std::map<std::string, double> hz{{"", 1.0}, {"hz", 1.0}, {"khz", 1e3}, {"mhz", 1e6}, {"ghz", 1e9}};
    static const std::map<std::string, double> time{{"", 1.0},     {"s", 1.0},     {"ms", 1e-3},
                                                    {"us", 1e-6},  {"ns", 1e-9},   {"ps", 1e-12}, {"fs", 1e-15}};
    static const std::map<std::string, double> db{{"", 1.0}, {"db", 1.0}};
    static const std::map<std::string, double> dbm{{"", 1.0}, {"dbm", 1.0}};
    static const std::map<std::string, double> bare{{"", 1.0}};
    switch (k) {
        case Kind::hz: return hz;
        case Kind::time: return time;
        case Kind::db: return db;
        case Kind::dbm: return dbm;
        default: return bare;
    }
}

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::hz: return "a frequency (hz, khz, mhz, ghz)";
        case Kind::time: return "a time (s, ms, us, ns, ps, fs)";
        case Kind::db: return "a level in db";
        case Kind::dbm: return "a power in dbm";
        case Kind::number: return "a plain number";
        case Kind::integer: return "an integer";
        case Kind::count: return "a non-negative integer";
        case Kind::seed: return "an unsigned 64-bit integer";
        case Kind::boolean: return "true or false";
        case Kind::source: return "sweep or scm";
        case Kind::shape: return "cascade or flat";
        case Kind::window: return "rectangular or blackman-harris-4term";
        case Kind::channels: return "'all' or a comma-separated channel list";
    }
    return "";
}

std::vector<Field> fields(ScenarioConfig& c) {
    return {
        {"source.kind", Kind::source, &c.source},
        {"run.seed", Kind::seed, &c.master_seed},
        {"run.jobs", Kind::integer, &c.jobs},
        {"run.parallel_bank", Kind::boolean, &c.parallel_bank},
        {"run.analog_rate", Kind::hz, &c.analog_rate},
        {"run.bandwidth", Kind::hz, &c.bandwidth},
        {"run.n_subbands", Kind::integer, &c.n_subbands},
        {"run.electrical_rolloff", Kind::db, &c.electrical_rolloff_db},
        {"sweep.start", Kind::hz, &c.sweep.start},
        {"sweep.stop", Kind::hz, &c.sweep.stop},
        {"sweep.step", Kind::hz, &c.sweep.step},
        {"sweep.amplitude", Kind::number, &c.sweep.amplitude},
        {"sweep.snap", Kind::boolean, &c.sweep.snap},
        {"sweep.via_dac", Kind::boolean, &c.sweep.via_dac},
        {"sweep.record", Kind::count, &c.sweep.record},
        {"sweep.adc_samples", Kind::count, &c.sweep.adc_samples},
        {"sweep.probe", Kind::hz, &c.sweep.probe},
        {"scm.n_channels", Kind::integer, &c.scm.n_channels},
        {"scm.spacing", Kind::hz, &c.scm.channel_spacing},
        {"scm.baud", Kind::hz, &c.scm.baud},
        {"scm.baseband_offset", Kind::hz, &c.scm.baseband_offset},
        {"scm.rolloff", Kind::number, &c.scm.rolloff},
        {"scm.duration", Kind::time, &c.scm.duration},
        {"scm.levels", Kind::integer, &c.scm.levels},
        {"scm.rrc_span", Kind::count, &c.scm.rrc_span},
        {"scm.rms", Kind::number, &c.scm_rms},
        {"scm.active", Kind::channels, &c.scm_active},
        {"dac.bits", Kind::integer, &c.dac.bits},
        {"dac.rate", Kind::hz, &c.dac.rate},
        {"dac.lpf_cutoff", Kind::hz, &c.dac.lpf_cutoff},
        {"dac.full_scale", Kind::number, &c.dac.full_scale},
        {"dac.residual_noise", Kind::db, &c.dac.residual_noise_db},
        {"dac.noise_bandwidth", Kind::hz, &c.dac.noise_reference_bw},
        {"dac.quantize", Kind::boolean, &c.dac.quantize},
        {"dac.add_noise", Kind::boolean, &c.dac.add_noise},
        {"dac.lowpass", Kind::boolean, &c.dac.lowpass},
        {"combs.shape", Kind::shape, &c.combs.shape},
        {"combs.pm_index", Kind::number, &c.combs.pm_index},
        {"combs.im_depth", Kind::number, &c.combs.im_depth},
        {"combs.n_tones", Kind::integer, &c.combs.n_tones},
        {"combs.f_sig", Kind::hz, &c.combs.f_sig},
        {"combs.delta_f", Kind::hz, &c.combs.delta_f},
        {"combs.peak_power", Kind::dbm, &c.combs.peak_power_dbm},
        {"combs.seed_linewidth", Kind::hz, &c.combs.seed_linewidth},
        {"combs.drive_linewidth", Kind::hz, &c.combs.drive_linewidth},
        {"combs.drift_rate", Kind::number, &c.combs.drift_rate},
        {"combs.static_phase", Kind::number, &c.combs.static_phase},
        {"link.vpi", Kind::number, &c.link.vpi},
        {"link.drive_scale", Kind::number, &c.link.drive_scale},
        {"link.sig_power", Kind::dbm, &c.link.sig_power_per_ch_dbm},
        {"link.lo_power", Kind::dbm, &c.link.lo_power_per_tone_dbm},
        {"link.osnr", Kind::db, &c.link.osnr_db},
        {"link.pd_bandwidth", Kind::hz, &c.link.pd_bandwidth},
        {"link.tia_sat", Kind::dbm, &c.link.tia_sat_dbm},
        {"link.cmrr", Kind::db, &c.link.cmrr_db},
        {"link.responsivity", Kind::number, &c.link.responsivity},
        {"link.thermal_density", Kind::number, &c.link.thermal_noise_density},
        {"link.rx_loss", Kind::db, &c.link.rx_loss_db},
        {"link.detector_rolloff", Kind::db, &c.link.detector_rolloff_db},
        {"link.shot_noise", Kind::boolean, &c.link.shot_noise},
        {"link.thermal_noise", Kind::boolean, &c.link.thermal_noise},
        {"link.osnr_noise", Kind::boolean, &c.link.osnr_noise},
        {"link.common_mode", Kind::boolean, &c.link.common_mode},
        {"link.tia_saturation", Kind::boolean, &c.link.tia_saturation},
        {"link.pd_filter", Kind::boolean, &c.link.pd_filter},
        {"link.phase_noise", Kind::boolean, &c.link.phase_noise},
        {"link.drift", Kind::boolean, &c.link.drift},
        {"link.signal_mean_square", Kind::number, &c.link.signal_mean_square},
        {"adc.bits", Kind::integer, &c.adc.bits},
        {"adc.rate", Kind::hz, &c.adc.rate},
        {"adc.full_scale", Kind::number, &c.adc.full_scale},
        {"adc.jitter", Kind::time, &c.adc.jitter_rms},
        {"adc.aa_cutoff", Kind::hz, &c.adc.aa_cutoff},
        {"adc.ac_couple", Kind::hz, &c.adc.ac_couple_hz},
        {"adc.ac_coupling", Kind::boolean, &c.adc.ac_coupling},
        {"adc.aa_filter", Kind::boolean, &c.adc.aa_filter},
        {"demod.ffe_taps", Kind::count, &c.demod.ffe_taps},
        {"demod.sps", Kind::count, &c.demod.sps},
        {"demod.ffe_step", Kind::number, &c.demod.ffe_step},
        {"demod.training_fraction", Kind::number, &c.demod.training_fraction},
        {"demod.training_passes", Kind::integer, &c.demod.training_passes},
        {"demod.ac_compensation", Kind::boolean, &c.demod.ac_compensation},
        {"demod.rrc_span", Kind::count, &c.demod.rrc_span},
        {"metrics.analysis_rate", Kind::hz, &c.metrics.analysis_rate},
        {"metrics.n_fft", Kind::count, &c.metrics.n_fft},
        {"metrics.n_avg", Kind::count, &c.metrics.n_avg},
        {"metrics.window", Kind::window, &c.metrics.window},
        {"metrics.band_lo", Kind::hz, &c.metrics.band_lo},
        {"metrics.band_hi", Kind::hz, &c.metrics.band_hi},
        {"metrics.search_bins", Kind::count, &c.metrics.search_bins},
        {"metrics.sinad_from_dc", Kind::boolean, &c.metrics.sinad_from_dc},
    };
}

[[noreturn]] void bad_value(const Field& f, const std::string& v, int line) {
    throw ConfigError("bad value '" + v + "' for " + f.key + ": expected " + kind_name(f.kind), line, "syntax");
}

double parse_scaled(const Field& f, const std::string& v, int line) {
    const char* b = v.c_str();
    char* end = nullptr;
    const double x = std::strtod(b, &end);
    if (end == b || !std::isfinite(x)) bad_value(f, v, line);
    const auto& tab = suffixes(f.kind);
    const auto it = tab.find(lower(trim(end)));
    if (it == tab.end()) bad_value(f, v, line);
    return x * it->second;
}

long long parse_integer(const Field& f, const std::string& v, int line) {
    const char* b = v.c_str();
    char* end = nullptr;
    const long long x = std::strtoll(b, &end, 10);
    if (end == b || !trim(end).empty()) bad_value(f, v, line);
    return x;
}

void assign(const Field& f, const std::string& raw, int line) {
    const std::string v = lower(raw);
    switch (f.kind) {
        case Kind::hz:
        case Kind::time:
        case Kind::db:
        case Kind::dbm:
        case Kind::number: *static_cast<double*>(f.ptr) = parse_scaled(f, v, line); break;
        case Kind::integer: {
            const long long x = parse_integer(f, v, line);
            if (x < -2147483647LL || x > 2147483647LL) bad_value(f, v, line);
            *static_cast<int*>(f.ptr) = static_cast<int>(x);
            break;
        }
        case Kind::count: {
            const long long x = parse_integer(f, v, line);
            if (x < 0) bad_value(f, v, line);
            *static_cast<std::size_t*>(f.ptr) = static_cast<std::size_t>(x);
            break;
        }
        case Kind::seed: {
            const char* b = v.c_str();
            char* end = nullptr;
            if (v.empty() || v[0] == '-') bad_value(f, v, line);
            const unsigned long long x = std::strtoull(b, &end, 0);
            if (end == b || !trim(end).empty()) bad_value(f, v, line);
            *static_cast<std::uint64_t*>(f.ptr) = x;
            break;
        }
        case Kind::boolean: {
            bool x;
            if (v == "true" || v == "on" || v == "yes" || v == "1") x = true;
            else if (v == "false" || v == "off" || v == "no" || v == "0") x = false;
            else bad_value(f, v, line);
            *static_cast<bool*>(f.ptr) = x;
            break;
        }
        case Kind::source:
            if (v == "sweep") *static_cast<SourceKind*>(f.ptr) = SourceKind::sweep;
            else if (v == "scm") *static_cast<SourceKind*>(f.ptr) = SourceKind::scm;
            else bad_value(f, v, line);
            break;
        case Kind::shape:
            if (v == "cascade") *static_cast<CombShape*>(f.ptr) = CombShape::cascade;
            else if (v == "flat") *static_cast<CombShape*>(f.ptr) = CombShape::flat;
            else bad_value(f, v, line);
            break;
        case Kind::window:
            try {
                *static_cast<Window*>(f.ptr) = window_from_string(v);
            } catch (const std::invalid_argument&) {
                bad_value(f, v, line);
            }
            break;
        case Kind::channels: {
            auto& out = *static_cast<std::vector<int>*>(f.ptr);
            out.clear();
            if (v == "all") break;
            std::stringstream ss(v);
            std::string item;
            while (std::getline(ss, item, ',')) {
                const auto t = trim(item);
                const char* b = t.c_str();
                char* end = nullptr;
                const long x = std::strtol(b, &end, 10);
                if (t.empty() || *end != '\0') bad_value(f, v, line);
                out.push_back(static_cast<int>(x));
            }
            if (out.empty()) bad_value(f, v, line);
            break;
        }
    }
}

std::string render(const Field& f) {
    char buf[64];
    switch (f.kind) {
        case Kind::hz:
        case Kind::time:
        case Kind::db:
        case Kind::dbm:
        case Kind::number: std::snprintf(buf, sizeof buf, "%.17g", *static_cast<const double*>(f.ptr)); return buf;
        case Kind::integer: return std::to_string(*static_cast<const int*>(f.ptr));
        case Kind::count: return std::to_string(*static_cast<const std::size_t*>(f.ptr));
        case Kind::seed: return std::to_string(*static_cast<const std::uint64_t*>(f.ptr));
        case Kind::boolean: return *static_cast<const bool*>(f.ptr) ? "true" : "false";
        case Kind::source: return *static_cast<const SourceKind*>(f.ptr) == SourceKind::sweep ? "sweep" : "scm";
        case Kind::shape: return *static_cast<const CombShape*>(f.ptr) == CombShape::cascade ? "cascade" : "flat";
        case Kind::window: return to_string(*static_cast<const Window*>(f.ptr));
        case Kind::channels: {
            const auto& v = *static_cast<const std::vector<int>*>(f.ptr);
            if (v.empty()) return "all";
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
            return s;
        }
    }
    return {};
}

// Library validators report "<name> rule violated: ..."; carry the rule name through.
template <class F>
void checked(F&& fn, const char* fallback_rule) {
    try {
        fn();
    } catch (const std::invalid_argument& e) {
        const std::string m = e.what();
        const auto p = m.find(" rule violated");
        throw ConfigError(m, 0, p != std::string::npos ? m.substr(0, p) : fallback_rule);
    }
}

void require(bool ok, const std::string& rule, const std::string& detail) {
    if (!ok) throw ConfigError(rule + " rule violated: " + detail, 0, rule);
}

}  // namespace

bool ScenarioConfig::channel_active(int k) const {
    return scm_active.empty() || std::find(scm_active.begin(), scm_active.end(), k) != scm_active.end();
}

ScenarioCombs ScenarioConfig::build_combs() const {
    ScenarioCombs sc;
    const double f_ref = combs.f_sig + combs.delta_f;
    if (combs.shape == CombShape::cascade) {
        sc.signal = comb_from_cascade(combs.pm_index, combs.im_depth, combs.n_tones, combs.f_sig, combs.peak_power_dbm);
        sc.lo = comb_from_cascade(combs.pm_index, combs.im_depth, combs.n_tones, f_ref, combs.peak_power_dbm);
    } else {
        sc.signal = flat_comb(combs.n_tones, combs.f_sig);
        sc.lo = flat_comb(combs.n_tones, f_ref);
    }
    sc.signal.drive_linewidth = combs.drive_linewidth;
    sc.lo.drive_linewidth = combs.drive_linewidth;
    sc.seed_linewidth = combs.seed_linewidth;
    sc.differential_phase_drift = combs.drift_rate;
    sc.static_phase = combs.static_phase;
    return sc;
}

void ScenarioConfig::validate() const {
    require(jobs >= 1, "jobs", "run.jobs must be >= 1");
    require(combs.delta_f > 0.0 && combs.f_sig > 0.0 && combs.n_tones >= 1, "comb",
            "combs.f_sig and combs.delta_f must be > 0 and combs.n_tones >= 1");
    require(n_subbands >= 1, "scaling", "run.n_subbands must be >= 1");

    checked([&] { scm.validate(); }, "scm");
    checked([&] { dac.validate(); }, "dac");
    checked([&] { adc.validate(); }, "adc");
    checked([&] { link.validate(combs.delta_f); }, "link");
    checked([&] {
        DemodConfig d = demod;
        d.baud = scm.baud;
        d.rolloff = scm.rolloff;
        d.validate();
    }, "demod");

    ScenarioCombs sc;
    checked([&] { sc = build_combs(); }, "comb");
    checked([&] { sc.validate(); }, "comb");
    const auto rep = validate_scaling(bandwidth, sc, n_subbands);
    require(rep.delta_f_ok, "scaling",
            "delta_f = " + std::to_string(combs.delta_f) + " Hz is below B/N = " + std::to_string(bandwidth / n_subbands) + " Hz");
    require(rep.fsig_ok, "scaling", "f_sig/2 must exceed the bandwidth B");
    require(rep.tones_ok, "scaling", "both combs need a tone at every order 1..N");

    require(analog_rate >= 4.0 * adc.rate * (1.0 - 1e-12), "rate", "run.analog_rate must be >= 4 * adc.rate");
    require(dac.rate == analog_rate, "rate", "dac.rate must equal run.analog_rate");
    require(std::abs(analog_rate / scm.baud - std::round(analog_rate / scm.baud)) < 1e-9, "rate",
            "run.analog_rate must be an integer multiple of scm.baud");
    require(std::abs(scm.channel_spacing - combs.delta_f) <= 1e-9 * combs.delta_f, "channel",
            "scm.spacing must equal combs.delta_f so channel k lands in sub-band k");
    require(scm.n_channels <= n_subbands, "channel", "scm.n_channels must not exceed run.n_subbands");
    for (int k : scm_active) require(k >= 1 && k <= scm.n_channels, "channel", "scm.active lists channel " + std::to_string(k));
    require(scm_rms > 0.0 && scm_rms <= 1.0, "drive", "scm.rms must be in (0, 1]");

    require(sweep.start > 0.0 && sweep.step > 0.0 && sweep.stop >= sweep.start, "sweep",
            "need 0 < sweep.start <= sweep.stop and sweep.step > 0");
    require(sweep.stop <= (n_subbands + 0.5) * combs.delta_f, "sweep", "sweep.stop lies above the last sub-band");
    require(sweep.amplitude > 0.0 && sweep.amplitude <= 1.0, "drive", "sweep.amplitude must be in (0, 1]");
    require(sweep.record >= 1024 && sweep.adc_samples >= 1, "sweep", "sweep.record must be >= 1024 samples");

    require(is_power_of_two(metrics.n_fft) && metrics.n_fft >= 64 && metrics.n_avg >= 1, "metrics",
            "metrics.n_fft must be a power of two >= 64 and metrics.n_avg >= 1");
    require(metrics.analysis_rate >= 0.0 && metrics.analysis_rate <= adc.rate, "metrics",
            "metrics.analysis_rate must be in [0, adc.rate]");
}

ScenarioConfig load_config(const std::string& text) {
    ScenarioConfig cfg;
    const auto table = fields(cfg);
    std::map<std::string, const Field*> by_key;
    for (const auto& f : table) by_key[f.key] = &f;
    std::set<std::string> seen;

    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string ln = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (ln.empty()) continue;
        const auto eq = ln.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'section.key = value'", line, "syntax");
        const std::string key = lower(trim(ln.substr(0, eq)));
        const std::string val = trim(ln.substr(eq + 1));
        const auto it = by_key.find(key);
        if (it == by_key.end()) throw ConfigError("unknown key '" + key + "'", line, "unknown-key");
        if (!seen.insert(key).second) throw ConfigError("key '" + key + "' given twice", line, "duplicate-key");
        if (val.empty()) throw ConfigError("missing value for " + key, line, "syntax");
        assign(*it->second, val, line);
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file '" + path + "'", 0, "io");
    std::stringstream ss;
    ss << f.rdbuf();
    return load_config(ss.str());
}

std::string dump_config(const ScenarioConfig& cfg) {
    ScenarioConfig copy = cfg;
    std::string out;
    std::string section;
    for (const auto& f : fields(copy)) {
        const std::string sec = f.key.substr(0, f.key.find('.'));
        if (sec != section) {
            if (!section.empty()) out += "\n";
            section = sec;
        }
        out += f.key + " = " + render(f) + "\n";
    }
    return out;
}

std::vector<std::string> config_keys() {
    ScenarioConfig c;
    std::vector<std::string> k;
    for (const auto& f : fields(c)) k.push_back(f.key);
    return k;
}

}  // namespace dcadc
