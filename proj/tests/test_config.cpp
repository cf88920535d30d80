#include <doctest.h>

#include "dcadc/config.hpp"

using namespace dcadc;

TEST_CASE("empty config gives the reference defaults") {
    const auto c = load_config("");
    CHECK(c.scm.n_channels == 10);
    CHECK(c.combs.delta_f == 1e9);
    CHECK(c.adc.bits == 14);
    CHECK(c.adc.rate == 2.4e9);
    CHECK(c.scm.baud == 800e6);
    CHECK(c.demod.ffe_taps == 17);
    CHECK(c.link.tia_sat_dbm == -13.0);
    CHECK(c.link.lo_power_per_tone_dbm == -4.0);
    CHECK(c.electrical_rolloff_db == 3.0);
    CHECK(c.metrics.n_fft == 16384);
    CHECK(c.metrics.n_avg == 4);
    CHECK(c.source == SourceKind::scm);
    CHECK(c.scm_active.empty());
}

TEST_CASE("units and value kinds") {
    const auto c = load_config(R"(
# comment line
combs.delta_f = 1ghz
scm.n_channels = 10
run.bandwidth = 10 GHz     # trailing comment
scm.duration = 2.048 us
adc.jitter = 150 fs
adc.ac_couple = 10 MHz
link.tia_sat = -13 dBm
run.electrical_rolloff = 2.5 db
link.osnr = 50
metrics.window = rectangular
scm.active = 1, 3,10
source.kind = SWEEP
link.drift = off
run.seed = 0xFFFFFFFFFFFFFFFF
)");
    CHECK(c.combs.delta_f == 1e9);
    CHECK(c.bandwidth == 10e9);
    CHECK(c.scm.duration == doctest::Approx(2.048e-6));
    CHECK(c.adc.jitter_rms == doctest::Approx(150e-15));
    CHECK(c.adc.ac_couple_hz == 10e6);
    CHECK(c.link.tia_sat_dbm == -13.0);
    CHECK(c.electrical_rolloff_db == 2.5);
    CHECK(c.link.osnr_db == 50.0);
    CHECK(c.metrics.window == Window::rectangular);
    CHECK(c.scm_active == std::vector<int>{1, 3, 10});
    CHECK(c.channel_active(3));
    CHECK_FALSE(c.channel_active(2));
    CHECK(c.source == SourceKind::sweep);
    CHECK_FALSE(c.link.drift);
    CHECK(c.master_seed == 0xFFFFFFFFFFFFFFFFULL);
}

namespace {

ConfigError error_of(const std::string& text) {
    try {
        load_config(text);
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("no ConfigError for: " << text);
    return ConfigError("");
}

}  // namespace

TEST_CASE("parse errors carry line numbers") {
    auto e = error_of("adc.bits = 12\n\nadc.foo = 1\n");
    CHECK(e.line() == 3);
    CHECK(e.rule() == "unknown-key");
    CHECK(std::string(e.what()).find("line 3") == 0);

    e = error_of("\nadc.rate = 2.4 us\n");
    CHECK(e.line() == 2);
    CHECK(e.rule() == "syntax");

    e = error_of("link.cmrr = 20 dbm\n");
    CHECK(e.line() == 1);

    CHECK(error_of("adc.bits\n").line() == 1);
    CHECK(error_of("adc.bits = 12.5\n").line() == 1);
    CHECK(error_of("adc.bits = 12\nADC.BITS = 13\n").rule() == "duplicate-key");
    CHECK(error_of("link.drift = maybe\n").line() == 1);
    CHECK(error_of("scm.active = 1,,2\n").line() == 1);
    CHECK(error_of("run.seed = -4\n").line() == 1);
    CHECK(error_of("demod.ffe_taps = -1\n").line() == 1);
}

TEST_CASE("validation errors name the rule") {
    auto e = error_of("adc.bits = 30\n");
    CHECK(e.line() == 0);
    CHECK(e.rule() == "adc bits");
    CHECK(std::string(e.what()).find("bits") != std::string::npos);

    CHECK(error_of("combs.delta_f = 0.5 ghz\nscm.spacing = 0.5 ghz\nscm.baud = 400 mhz\n").rule() == "scaling");
    CHECK(error_of("run.n_subbands = 30\nscm.n_channels = 10\n").rule() == "scaling");
    CHECK(error_of("combs.f_sig = 16 ghz\n").rule() == "scaling");
    CHECK(error_of("scm.spacing = 1.1 ghz\n").rule() == "channel");
    CHECK(error_of("scm.active = 11\n").rule() == "channel");
    CHECK(error_of("adc.rate = 10 ghz\nadc.aa_cutoff = 5 ghz\n").rule() == "rate");
    CHECK(error_of("demod.ffe_taps = 16\n").rule() == "ffe taps");
    CHECK(error_of("sweep.stop = 12 ghz\n").rule() == "sweep");
    CHECK(error_of("metrics.n_fft = 1000\n").rule() == "metrics");
    CHECK(error_of("link.drive_scale = 1.5\n").rule() == "link drive");
    CHECK(error_of("scm.rolloff = 1.5\n").line() == 0);
}

TEST_CASE("dump round trip is exact") {
    const auto c = load_config(R"(
run.seed = 12345678901234
adc.full_scale = 3.3e-6
link.cmrr = 27.3
scm.active = 2,4
sweep.amplitude = 0.0731
metrics.window = rectangular
combs.shape = flat
link.osnr_noise = false
)");
    const auto text = dump_config(c);
    const auto back = load_config(text);
    CHECK(dump_config(back) == text);
    CHECK(back.adc.full_scale == c.adc.full_scale);
    CHECK(back.link.cmrr_db == c.link.cmrr_db);
    CHECK(back.master_seed == 12345678901234ULL);
    CHECK(back.scm_active == std::vector<int>{2, 4});
    CHECK(back.combs.shape == CombShape::flat);
    // every key appears exactly once
    for (const auto& k : config_keys()) {
        const bool present = text.find("\n" + k + " = ") != std::string::npos || text.find(k + " = ") == 0;
        CHECK(present);
    }
}

TEST_CASE("combs built from the config") {
    const auto c = load_config("");
    const auto sc = c.build_combs();
    CHECK(sc.delta_f() == doctest::Approx(1e9));
    CHECK(sc.signal.n_tones == 24);
    CHECK(sc.signal.flatness_db() < 3.0);
    CHECK(sc.seed_linewidth == 5e3);
}
