#include "pmcsh/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <memory>

namespace pmcsh {
namespace {

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n)
        : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
        if (data == nullptr) throw Error("fft: allocation failed");
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    fftw_complex* data;
};

// Buffers always come from fftw_malloc so the chosen codelets (and hence the
// rounding) do not depend on where std::vector happened to allocate.
CVec transform(std::span<const cplx> x, int sign) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    FftwBuffer in(n);
    FftwBuffer out(n);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), in.data, out.data, sign, FFTW_ESTIMATE);
    if (plan == nullptr) throw Error("fft: plan creation failed");
    std::memcpy(in.data, x.data(), sizeof(fftw_complex) * n);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    CVec y(n);
    std::memcpy(static_cast<void*>(y.data()), out.data, sizeof(fftw_complex) * n);
    return y;
}

}  // namespace

CVec fft(std::span<const cplx> x) { return transform(x, FFTW_FORWARD); }

CVec ifft(std::span<const cplx> x) {
    CVec y = transform(x, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(y.size());
    for (auto& v : y) v *= scale;
    return y;
}

CVec circular_filter(std::span<const cplx> x, std::span<const double> taps, std::size_t center) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    // Wrap the kernel onto the frame so that taps[center] lands on lag 0.
    CVec h(n, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < taps.size(); ++i) {
        const auto lag = static_cast<long long>(i) - static_cast<long long>(center);
        const auto nn = static_cast<long long>(n);
        const auto idx = static_cast<std::size_t>(((lag % nn) + nn) % nn);
        h[idx] += taps[i];
    }
    CVec xf = fft(x);
    const CVec hf = fft(h);
    for (std::size_t k = 0; k < n; ++k) xf[k] *= hf[k];
    return ifft(xf);
}

}  // namespace pmcsh
