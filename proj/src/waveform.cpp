/** @file waveform.cpp
 *  @brief waveform-core implementation. */
#include "dcadc/waveform.hpp"

#include "dcadc/rng.hpp"
#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace dcadc {
namespace {

constexpr double kPi = 3.14159265358979323846;

double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    return std::sin(kPi * x) / (kPi * x);
}

double kaiser_beta(double atten_db) {
    if (atten_db > 50.0) return 0.1102 * (atten_db - 8.7);
    if (atten_db >= 21.0) return 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
    return 0.0;
}

/// Kaiser window value at normalized position r in [-1, 1].
double kaiser(double r, double beta) {
    if (std::abs(r) > 1.0) return 0.0;
    return std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - r * r)) / std::cyl_bessel_i(0.0, beta);
}

/// Odd-length Kaiser-windowed sinc with cutoff fc (as a fraction of the sample rate).
std::vector<double> kaiser_sinc(double fc, std::size_t length, double beta) {
    std::vector<double> h(length);
    const double c = 0.5 * static_cast<double>(length - 1);
    for (std::size_t i = 0; i < length; ++i) {
        const double d = static_cast<double>(i) - c;
        h[i] = 2.0 * fc * sinc(2.0 * fc * d) * kaiser(c > 0 ? d / c : 0.0, beta);
    }
    return h;
}

std::size_t kaiser_length(double atten_db, double transition_fraction) {
    const double dw = 2.0 * kPi * transition_fraction;
    auto n = static_cast<std::size_t>(std::ceil((atten_db - 7.95) / (2.285 * dw))) + 1;
    if (n % 2 == 0) ++n;
    return std::max<std::size_t>(n, 3);
}

void check_rate(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw std::invalid_argument("waveform: rate must be > 0");
}

/// Circular kernel of length n with the filter's middle tap at index 0.
std::vector<double> circular_kernel(const std::vector<double>& taps, std::size_t n) {
    std::vector<double> k(n, 0.0);
    const auto c = static_cast<long long>(taps.size() / 2);
    const auto nn = static_cast<long long>(n);
    for (std::size_t i = 0; i < taps.size(); ++i) {
        long long idx = (static_cast<long long>(i) - c) % nn;
        if (idx < 0) idx += nn;
        k[static_cast<std::size_t>(idx)] += taps[i];
    }
    return k;
}

std::vector<double> circular_convolve(const std::vector<double>& x, const std::vector<cplx>& kspec) {
    auto xs = fft::rfft(x);
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] *= kspec[i];
    return fft::irfft(xs, x.size());
}

}  // namespace

SampledWaveform::SampledWaveform(std::vector<double> samples, double rate)
    : samples_(std::move(samples)), rate_(rate) {
    check_rate(rate_);
    if (samples_.empty()) throw std::invalid_argument("SampledWaveform: no samples");
    for (double v : samples_)
        if (!std::isfinite(v)) throw std::invalid_argument("SampledWaveform: non-finite sample");
}

double SampledWaveform::mean_square() const {
    double acc = 0.0;
    for (double v : samples_) acc += v * v;
    return acc / static_cast<double>(samples_.size());
}

ComplexWaveform::ComplexWaveform(std::vector<cplx> samples, double rate)
    : samples_(std::move(samples)), rate_(rate) {
    check_rate(rate_);
    for (const auto& v : samples_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::invalid_argument("ComplexWaveform: non-finite sample");
}

SampledWaveform ComplexWaveform::real() const {
    std::vector<double> r(samples_.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = samples_[i].real();
    return SampledWaveform(std::move(r), rate_);
}

std::string to_string(Window w) {
    return w == Window::rectangular ? "rectangular" : "blackman-harris-4term";
}

Window window_from_string(const std::string& name) {
    if (name == "rectangular" || name == "rect") return Window::rectangular;
    if (name == "blackman-harris-4term" || name == "blackman-harris" || name == "bh4")
        return Window::blackman_harris4;
    throw std::invalid_argument("unknown window '" + name + "'");
}

std::vector<double> window_coefficients(Window w, std::size_t n) {
    std::vector<double> c(n, 1.0);
    if (w == Window::blackman_harris4) {
        // periodic form, suited to spectral analysis
        const double a0 = 0.35875, a1 = 0.48829, a2 = 0.14128, a3 = 0.01168;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
            c[i] = a0 - a1 * std::cos(x) + a2 * std::cos(2 * x) - a3 * std::cos(3 * x);
        }
    }
    return c;
}

double SpectrumEstimate::linear_power(std::size_t bin) const {
    const double db = power_db.at(bin);
    return db <= kPowerFloorDb ? 0.0 : std::pow(10.0, db / 10.0);
}

std::size_t SpectrumEstimate::bin_of(double freq_hz) const {
    const double b = std::round(freq_hz / rbw);
    if (b < 0.0) return 0;
    return std::min(static_cast<std::size_t>(b), power_db.size() - 1);
}

SpectrumEstimate periodogram(const SampledWaveform& x, std::size_t n_fft, std::size_t n_avg, Window window) {
    if (!is_power_of_two(n_fft) || n_fft < 2) throw std::invalid_argument("periodogram: n_fft must be a power of two");
    if (n_avg < 1) throw std::invalid_argument("periodogram: n_avg must be >= 1");
    if (x.size() < n_fft * n_avg) throw std::invalid_argument("periodogram: insufficient samples");

    const auto w = window_coefficients(window, n_fft);
    const double wpow = std::inner_product(w.begin(), w.end(), w.begin(), 0.0);
    const std::size_t nb = n_fft / 2 + 1;
    std::vector<double> acc(nb, 0.0);
    std::vector<double> seg(n_fft);
    for (std::size_t a = 0; a < n_avg; ++a) {
        const double* src = x.samples().data() + a * n_fft;
        for (std::size_t i = 0; i < n_fft; ++i) seg[i] = src[i] * w[i];
        const auto spec = fft::rfft(seg);
        for (std::size_t k = 0; k < nb; ++k) acc[k] += std::norm(spec[k]);
    }

    SpectrumEstimate s;
    s.n_fft = n_fft;
    s.n_avg = n_avg;
    s.window = window;
    s.rbw = x.rate() / static_cast<double>(n_fft);
    s.bin_freqs.resize(nb);
    s.power_db.resize(nb);
    const double norm = 1.0 / (static_cast<double>(n_fft) * wpow * static_cast<double>(n_avg));
    for (std::size_t k = 0; k < nb; ++k) {
        const double c = (k == 0 || k == n_fft / 2) ? 1.0 : 2.0;
        const double p = c * acc[k] * norm;
        s.bin_freqs[k] = static_cast<double>(k) * s.rbw;
        s.power_db[k] = p > 0.0 ? std::max(10.0 * std::log10(p), kPowerFloorDb) : kPowerFloorDb;
    }
    return s;
}

void write_spectrum_csv(std::ostream& os, const SpectrumEstimate& s) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "# rbw_hz = %.6f\n", s.rbw);
    os << buf;
    os << "# n_fft = " << s.n_fft << "\n# n_avg = " << s.n_avg << "\n# window = " << to_string(s.window)
       << "\n# reference = " << s.reference << "\nfreq_hz,power_db\n";
    for (std::size_t k = 0; k < s.power_db.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.3f,%.6f\n", s.bin_freqs[k], s.power_db[k]);
        os << buf;
    }
}

void write_waveform_csv(std::ostream& os, const SampledWaveform& x) {
    char buf[64];
    os << "# rate_hz = " << x.rate() << "\nindex,value\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, x[i]);
        os << buf;
    }
}

ComplexWaveform analytic(const SampledWaveform& x) {
    const std::size_t n = x.size();
    const auto half = fft::rfft(x.samples());
    std::vector<cplx> full(n, cplx(0.0, 0.0));
    full[0] = half[0];
    const std::size_t last = (n % 2 == 0) ? n / 2 : (n - 1) / 2 + 1;
    for (std::size_t k = 1; k < last; ++k) full[k] = 2.0 * half[k];
    if (n % 2 == 0 && n > 1) full[n / 2] = half[n / 2];
    return ComplexWaveform(fft::cfft(full, true), x.rate());
}

std::vector<double> rrc_taps(double rolloff, std::size_t sps, std::size_t span) {
    if (!(rolloff >= 0.0 && rolloff <= 1.0)) throw std::invalid_argument("rrc_taps: rolloff must be in [0, 1]");
    if (sps < 2) throw std::invalid_argument("rrc_taps: sps must be >= 2");
    if (span < 8 || span % 2 != 0) throw std::invalid_argument("rrc_taps: span must be even and >= 8");

    const std::size_t len = span * sps + 1;
    const double c = 0.5 * static_cast<double>(len - 1);
    const double b = rolloff;
    std::vector<double> h(len);
    for (std::size_t i = 0; i < len; ++i) {
        const double t = (static_cast<double>(i) - c) / static_cast<double>(sps);
        if (std::abs(t) < 1e-12) {
            h[i] = 1.0 - b + 4.0 * b / kPi;
        } else if (b > 0.0 && std::abs(std::abs(t) - 1.0 / (4.0 * b)) < 1e-9) {
            h[i] = (b / std::sqrt(2.0)) * ((1.0 + 2.0 / kPi) * std::sin(kPi / (4.0 * b)) +
                                           (1.0 - 2.0 / kPi) * std::cos(kPi / (4.0 * b)));
        } else {
            const double num = std::sin(kPi * t * (1.0 - b)) + 4.0 * b * t * std::cos(kPi * t * (1.0 + b));
            const double den = kPi * t * (1.0 - (4.0 * b * t) * (4.0 * b * t));
            h[i] = num / den;
        }
    }
    const double e = std::sqrt(std::inner_product(h.begin(), h.end(), h.begin(), 0.0));
    for (double& v : h) v /= e;
    return h;
}

std::vector<double> fir_lowpass(double cutoff, double rate, std::size_t length) {
    check_rate(rate);
    if (!(cutoff > 0.0 && cutoff < rate / 2.0)) throw std::invalid_argument("fir_lowpass: cutoff must be in (0, rate/2)");
    // passband edge 0.8*cutoff, stopband edge 1.4*cutoff, ideal edge halfway
    const double atten = 60.0;
    if (length == 0) length = kaiser_length(atten, 0.6 * cutoff / rate);
    if (length % 2 == 0) ++length;
    const double edge = std::min(1.1 * cutoff, 0.5 * rate);
    auto h = kaiser_sinc(edge / rate, length, kaiser_beta(atten));
    const double dc = std::accumulate(h.begin(), h.end(), 0.0);
    for (double& v : h) v /= dc;
    return h;
}

SampledWaveform apply_fir(const SampledWaveform& x, const std::vector<double>& taps) {
    if (taps.empty()) throw std::invalid_argument("apply_fir: no taps");
    const auto kspec = fft::rfft(circular_kernel(taps, x.size()));
    return SampledWaveform(circular_convolve(x.samples(), kspec), x.rate());
}

ComplexWaveform apply_fir(const ComplexWaveform& x, const std::vector<double>& taps) {
    if (taps.empty()) throw std::invalid_argument("apply_fir: no taps");
    const std::size_t n = x.size();
    const auto kspec = fft::rfft(circular_kernel(taps, n));
    std::vector<double> re(n), im(n);
    for (std::size_t i = 0; i < n; ++i) {
        re[i] = x[i].real();
        im[i] = x[i].imag();
    }
    re = circular_convolve(re, kspec);
    im = circular_convolve(im, kspec);
    std::vector<cplx> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = cplx(re[i], im[i]);
    return ComplexWaveform(std::move(out), x.rate());
}

SampledWaveform apply_response(const SampledWaveform& x, const std::function<cplx(double)>& h) {
    const std::size_t n = x.size();
    auto spec = fft::rfft(x.samples());
    const double df = x.rate() / static_cast<double>(n);
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= h(static_cast<double>(k) * df);
    return SampledWaveform(fft::irfft(spec, n), x.rate());
}

SampledWaveform resample(const SampledWaveform& x, double new_rate) {
    check_rate(new_rate);
    const double ratio = new_rate / x.rate();
    std::int64_t p = 0, q = 0;
    for (std::int64_t d = 1; d <= kMaxResampleFactor; ++d) {
        const double num = ratio * static_cast<double>(d);
        const double r = std::round(num);
        if (r >= 1.0 && std::abs(num - r) <= 1e-9 * r) {
            p = static_cast<std::int64_t>(r);
            q = d;
            break;
        }
    }
    if (p == 0 || p > kMaxResampleFactor)
        throw std::invalid_argument("resample: rate ratio is not a small rational (limit 4096/4096)");
    const std::int64_t g = std::gcd(p, q);
    p /= g;
    q /= g;
    if (p == 1 && q == 1) return x;

    const std::size_t n_in = x.size();
    if ((static_cast<std::int64_t>(n_in) * p) % q != 0)
        throw std::invalid_argument("resample: record length does not map to an integer output length");
    const auto n_out = static_cast<std::size_t>(static_cast<std::int64_t>(n_in) * p / q);

    // Prototype at p*rate: pass below 0.45*min(rate,new_rate), stop above 0.55*min, 100 dB.
    const double up_rate = x.rate() * static_cast<double>(p);
    const double fmin = std::min(x.rate(), new_rate);
    const double atten = 100.0;
    const std::size_t len = kaiser_length(atten, 0.1 * fmin / up_rate);
    const auto h = kaiser_sinc(0.5 * fmin / up_rate, len, kaiser_beta(atten));
    const auto c = static_cast<std::int64_t>(len / 2);
    const auto L = static_cast<std::int64_t>(len);

    // Split into p polyphase branches; normalize each so DC passes exactly.
    std::vector<std::vector<double>> branch(static_cast<std::size_t>(p));
    for (std::int64_t ph = 0; ph < p; ++ph) {
        auto& b = branch[static_cast<std::size_t>(ph)];
        for (std::int64_t j = ph; j < L; j += p) b.push_back(h[static_cast<std::size_t>(j)]);
        const double s = std::accumulate(b.begin(), b.end(), 0.0);
        for (double& v : b) v /= s;
    }

    // y[m] = sum_i x[i] h[c + m*q - i*p]; with j = c + m q - i p and j = ph + r p
    const auto nn = static_cast<std::int64_t>(n_in);
    std::vector<double> y(n_out);
    const double* xs = x.samples().data();
    for (std::size_t m = 0; m < n_out; ++m) {
        const std::int64_t t = c + static_cast<std::int64_t>(m) * q;
        const std::int64_t ph = t % p;
        const std::int64_t i_top = (t - ph) / p;  // input index paired with branch tap r = 0
        const auto& b = branch[static_cast<std::size_t>(ph)];
        double acc = 0.0;
        std::int64_t i = i_top % nn;
        if (i < 0) i += nn;
        for (std::size_t r = 0; r < b.size(); ++r) {
            acc += b[r] * xs[i];
            if (--i < 0) i += nn;
        }
        y[m] = acc;
    }
    return SampledWaveform(std::move(y), new_rate);
}

std::vector<double> bandlimited_sample(const SampledWaveform& x, const std::vector<double>& times) {
    constexpr int kHalf = 16;
    constexpr double kBeta = 18.0;
    constexpr double kQuant = 1099511627776.0;  // 2^40: fractional positions rounded for the weight cache
    const double i0b = std::cyl_bessel_i(0.0, kBeta);
    const auto n = static_cast<long long>(x.size());
    const double* xs = x.samples().data();

    std::unordered_map<long long, std::vector<double>> cache;
    std::vector<double> scratch(2 * kHalf);
    auto weights = [&](double frac) -> const std::vector<double>& {
        for (int k = -kHalf + 1; k <= kHalf; ++k) {
            const double d = frac - static_cast<double>(k);  // distance from sample i0+k
            const double r = d / static_cast<double>(kHalf);
            const double win = std::abs(r) >= 1.0 ? 0.0 : std::cyl_bessel_i(0.0, kBeta * std::sqrt(1.0 - r * r)) / i0b;
            scratch[static_cast<std::size_t>(k + kHalf - 1)] = sinc(d) * win;
        }
        const double s = std::accumulate(scratch.begin(), scratch.end(), 0.0);
        for (double& v : scratch) v /= s;
        return scratch;
    };

    std::vector<double> out(times.size());
    for (std::size_t m = 0; m < times.size(); ++m) {
        const double u = times[m] * x.rate();
        const double fl = std::floor(u);
        const auto key = static_cast<long long>(std::llround((u - fl) * kQuant));
        long long i0 = static_cast<long long>(fl);
        if (key >= static_cast<long long>(kQuant)) ++i0;
        const long long kq = key >= static_cast<long long>(kQuant) ? 0 : key;
        const double frac = static_cast<double>(kq) / kQuant;

        const std::vector<double>* w = nullptr;
        auto it = cache.find(kq);
        if (it != cache.end()) {
            w = &it->second;
        } else if (cache.size() < 4096) {
            w = &cache.emplace(kq, weights(frac)).first->second;
        } else {
            w = &weights(frac);
        }
        double acc = 0.0;
        long long idx = (i0 - kHalf + 1) % n;
        if (idx < 0) idx += n;
        for (int k = 0; k < 2 * kHalf; ++k) {
            acc += (*w)[static_cast<std::size_t>(k)] * xs[idx];
            if (++idx == n) idx = 0;
        }
        out[m] = acc;
    }
    return out;
}

SampledWaveform awgn(const SampledWaveform& x, double noise_power, std::uint64_t seed) {
    if (!(noise_power >= 0.0)) throw std::invalid_argument("awgn: noise_power must be >= 0");
    if (noise_power == 0.0) return x;
    Rng rng(seed);
    std::normal_distribution<double> nd(0.0, std::sqrt(noise_power));
    std::vector<double> y = x.samples();
    for (double& v : y) v += nd(rng);
    return SampledWaveform(std::move(y), x.rate());
}

std::vector<double> wiener_phase(double linewidth, std::size_t n, double rate, std::uint64_t seed) {
    if (!(linewidth >= 0.0)) throw std::invalid_argument("wiener_phase: linewidth must be >= 0");
    check_rate(rate);
    std::vector<double> phi(n, 0.0);
    if (linewidth == 0.0 || n == 0) return phi;
    Rng rng(seed);
    std::normal_distribution<double> nd(0.0, std::sqrt(2.0 * kPi * linewidth / rate));
    for (std::size_t i = 1; i < n; ++i) phi[i] = phi[i - 1] + nd(rng);
    return phi;
}

}  // namespace dcadc
