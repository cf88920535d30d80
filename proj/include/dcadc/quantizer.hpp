/** @file quantizer.hpp
 *  @brief Uniform mid-rise quantizer shared by the DAC and ADC models. */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace dcadc {

struct MidRiseQuantizer {
    int bits;
    double full_scale;

    MidRiseQuantizer(int b, double fs) : bits(b), full_scale(fs) {
        if (b < 1 || b > 30) throw std::invalid_argument("quantizer: bits must be in [1, 30]");
        if (!(fs > 0.0)) throw std::invalid_argument("quantizer: full_scale must be > 0");
    }

    double step() const { return 2.0 * full_scale / std::ldexp(1.0, bits); }
    std::int32_t min_code() const { return -(std::int32_t{1} << (bits - 1)); }
    std::int32_t max_code() const { return (std::int32_t{1} << (bits - 1)) - 1; }

    /// Code c covers [c*step, (c+1)*step); zero maps to code 0. Out-of-range input clips.
    std::int32_t code(double x) const {
        const double c = std::floor(x / step());
        return static_cast<std::int32_t>(std::clamp(c, static_cast<double>(min_code()), static_cast<double>(max_code())));
    }

    /// Reconstruction level at the centre of the code's interval.
    double value(std::int32_t c) const { return (static_cast<double>(c) + 0.5) * step(); }

    double quantize(double x) const { return value(code(x)); }
};

}  // namespace dcadc
