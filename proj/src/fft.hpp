// Thin FFTW wrappers. Buffers are fftw_malloc'ed so every call sees the same
// alignment and picks the same codelets: results are bit-reproducible across
// threads and runs.
#pragma once

#include <complex>
#include <vector>

namespace dcadc::fft {

using cplx = std::complex<double>;

/// Real-to-complex forward transform, n/2+1 outputs, unnormalized.
std::vector<cplx> rfft(const std::vector<double>& x);

/// Inverse of rfft for a length-n signal, normalized by 1/n.
std::vector<double> irfft(const std::vector<cplx>& spec, std::size_t n);

/// Complex forward (sign -1) or inverse (sign +1, normalized) transform.
std::vector<cplx> cfft(const std::vector<cplx>& x, bool inverse);

}  // namespace dcadc::fft
