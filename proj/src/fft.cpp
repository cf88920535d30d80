#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace dcadc::fft {
namespace {

void init_planner() {
    static std::once_flag once;
    std::call_once(once, [] { fftw_make_planner_thread_safe(); });
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
std::unique_ptr<T, FftwFree> alloc(std::size_t n) {
    void* p = fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1));
    if (!p) throw std::bad_alloc();
    return std::unique_ptr<T, FftwFree>(static_cast<T*>(p));
}

struct Plan {
    fftw_plan p;
    explicit Plan(fftw_plan plan) : p(plan) {
        if (!p) throw std::runtime_error("fftw: plan creation failed");
    }
    ~Plan() { fftw_destroy_plan(p); }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
};

}  // namespace

std::vector<cplx> rfft(const std::vector<double>& x) {
    init_planner();
    const std::size_t n = x.size();
    if (n == 0) throw std::invalid_argument("rfft: empty input");
    auto in = alloc<double>(n);
    auto out = alloc<fftw_complex>(n / 2 + 1);
    Plan plan(fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
    std::memcpy(in.get(), x.data(), n * sizeof(double));
    fftw_execute(plan.p);
    std::vector<cplx> res(n / 2 + 1);
    std::memcpy(static_cast<void*>(res.data()), out.get(), res.size() * sizeof(fftw_complex));
    return res;
}

std::vector<double> irfft(const std::vector<cplx>& spec, std::size_t n) {
    init_planner();
    if (n == 0 || spec.size() != n / 2 + 1) throw std::invalid_argument("irfft: size mismatch");
    auto in = alloc<fftw_complex>(spec.size());
    auto out = alloc<double>(n);
    Plan plan(fftw_plan_dft_c2r_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
    std::memcpy(in.get(), spec.data(), spec.size() * sizeof(fftw_complex));
    fftw_execute(plan.p);  // c2r destroys its input; that is our private copy
    std::vector<double> res(out.get(), out.get() + n);
    const double scale = 1.0 / static_cast<double>(n);
    for (double& v : res) v *= scale;
    return res;
}

std::vector<cplx> cfft(const std::vector<cplx>& x, bool inverse) {
    init_planner();
    const std::size_t n = x.size();
    if (n == 0) throw std::invalid_argument("cfft: empty input");
    auto in = alloc<fftw_complex>(n);
    auto out = alloc<fftw_complex>(n);
    Plan plan(fftw_plan_dft_1d(static_cast<int>(n), in.get(), out.get(),
                               inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE));
    std::memcpy(in.get(), x.data(), n * sizeof(fftw_complex));
    fftw_execute(plan.p);
    std::vector<cplx> res(n);
    std::memcpy(static_cast<void*>(res.data()), out.get(), n * sizeof(fftw_complex));
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (auto& v : res) v *= scale;
    }
    return res;
}

}  // namespace dcadc::fft
