#pragma once

// Discrete Fourier transform used everywhere in the simulator.
//
// Convention: forward  X[k] = sum_n x[n] e^{-j 2 pi k n / N}   (unnormalized)
//             inverse  x[n] = (1/N) sum_k X[k] e^{+j 2 pi k n / N}
// Bin k maps to frequency k*fs/N for k < N/2 and (k-N)*fs/N otherwise.

#include <span>

#include "pmcsh/common.hpp"

namespace pmcsh {

CVec fft(std::span<const cplx> x);
CVec ifft(std::span<const cplx> x);

/// Signed frequency of FFT bin k for an N-point transform at rate fs.
inline double bin_frequency(std::size_t k, std::size_t n, double fs) {
    const auto ki = static_cast<double>(k);
    const auto ni = static_cast<double>(n);
    return (2 * k < n ? ki : ki - ni) * fs / ni;
}

/// Circular convolution of x with a kernel whose sample `center` is time zero.
CVec circular_filter(std::span<const cplx> x, std::span<const double> taps, std::size_t center);

}  // namespace pmcsh
