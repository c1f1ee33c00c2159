#include "pmcsh/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "pmcsh/fft.hpp"

namespace pmcsh {

DualPolSignal::DualPolSignal(CVec x, CVec y, double sample_rate, double center_wavelength)
    : x_(std::move(x)), y_(std::move(y)), sample_rate_(sample_rate), center_wavelength_(center_wavelength) {
    if (x_.empty()) throw Error("empty signal");
    if (x_.size() != y_.size()) throw Error("polarization components differ in length");
    if (!(sample_rate_ > 0.0)) throw Error("sample_rate must be positive");
    if (!(center_wavelength_ > 0.0)) throw Error("center_wavelength must be positive");
}

JonesMatrix JonesMatrix::rotation(double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c, -s, s, c};
}

JonesMatrix JonesMatrix::retarder(double axis, double retardance) {
    const JonesMatrix d = diag(std::polar(1.0, retardance / 2.0), std::polar(1.0, -retardance / 2.0));
    return rotation(axis) * d * rotation(-axis);
}

double JonesMatrix::unitarity_residual() const {
    const JonesMatrix p = adjoint() * *this;
    return std::max({std::abs(p.m00 - 1.0), std::abs(p.m01), std::abs(p.m10), std::abs(p.m11 - 1.0)});
}

JonesMatrix operator*(const JonesMatrix& a, const JonesMatrix& b) {
    return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
            a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
}

JonesMatrix operator*(cplx s, const JonesMatrix& a) { return {s * a.m00, s * a.m01, s * a.m10, s * a.m11}; }

double JonesOperator::unitarity_residual() const {
    if (frequency_flat()) return flat().unitarity_residual();
    double worst = 0.0;
    for (const auto& m : per_bin()) worst = std::max(worst, m.unitarity_residual());
    return worst;
}

double Coherency::x_power_after(const JonesMatrix& j) const {
    // [J S J^H]_00 with S = [[xx, xy], [conj(xy), yy]]
    const double a = std::norm(j.m00) * xx + std::norm(j.m01) * yy;
    const double cross = 2.0 * std::real(j.m00 * xy * std::conj(j.m01));
    return a + cross;
}

double Coherency::y_power_after(const JonesMatrix& j) const {
    const double a = std::norm(j.m10) * xx + std::norm(j.m11) * yy;
    const double cross = 2.0 * std::real(j.m10 * xy * std::conj(j.m11));
    return a + cross;
}

Coherency coherency(const DualPolSignal& sig) {
    Coherency c;
    const auto& x = sig.x();
    const auto& y = sig.y();
    for (std::size_t k = 0; k < x.size(); ++k) {
        c.xx += std::norm(x[k]);
        c.yy += std::norm(y[k]);
        c.xy += x[k] * std::conj(y[k]);
    }
    const double n = static_cast<double>(x.size());
    c.xx /= n;
    c.yy /= n;
    c.xy /= n;
    return c;
}

double mean_power(std::span<const cplx> s) {
    if (s.empty()) throw Error("empty signal");
    double acc = 0.0;
    for (const auto& v : s) acc += std::norm(v);
    return acc / static_cast<double>(s.size());
}

double total_power(const DualPolSignal& sig) { return mean_power(sig.x()) + mean_power(sig.y()); }

DualPolSignal apply_jones(const DualPolSignal& sig, const JonesOperator& j) {
    const std::size_t n = sig.size();
    CVec ox(n);
    CVec oy(n);
    if (j.frequency_flat()) {
        const JonesMatrix& m = j.flat();
        for (std::size_t k = 0; k < n; ++k) {
            const auto [a, b] = m.apply(sig.x()[k], sig.y()[k]);
            ox[k] = a;
            oy[k] = b;
        }
        return sig.with_samples(std::move(ox), std::move(oy));
    }
    const auto& bins = j.per_bin();
    if (bins.size() != n) throw Error("jones operator has " + std::to_string(bins.size()) +
                                      " bins, signal needs " + std::to_string(n));
    const CVec fx = fft(sig.x());
    const CVec fy = fft(sig.y());
    for (std::size_t k = 0; k < n; ++k) {
        const auto [a, b] = bins[k].apply(fx[k], fy[k]);
        ox[k] = a;
        oy[k] = b;
    }
    return sig.with_samples(ifft(ox), ifft(oy));
}

DualPolSignal apply_jones_via_fft(const DualPolSignal& sig, const JonesMatrix& j) {
    return apply_jones(sig, JonesOperator(std::vector<JonesMatrix>(sig.size(), j)));
}

std::vector<PsdPoint> psd(std::span<const cplx> samples, double sample_rate, std::size_t segment_len) {
    if (segment_len < 2 || !std::has_single_bit(segment_len)) throw Error("psd segment length must be a power of two");
    if (segment_len > samples.size()) throw Error("psd segment longer than signal");

    RVec window(segment_len);
    double win_energy = 0.0;
    for (std::size_t i = 0; i < segment_len; ++i) {
        // periodic Hann
        window[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(segment_len));
        win_energy += window[i] * window[i];
    }

    const std::size_t hop = segment_len / 2;
    const std::size_t segments = (samples.size() - segment_len) / hop + 1;
    RVec acc(segment_len, 0.0);
    CVec buf(segment_len);
    for (std::size_t s = 0; s < segments; ++s) {
        const std::size_t off = s * hop;
        for (std::size_t i = 0; i < segment_len; ++i) buf[i] = samples[off + i] * window[i];
        const CVec spec = fft(buf);
        for (std::size_t i = 0; i < segment_len; ++i) acc[i] += std::norm(spec[i]);
    }

    const double scale = 1.0 / (static_cast<double>(segments) * sample_rate * win_energy);
    std::vector<PsdPoint> out(segment_len);
    // Rotate so the table runs from -fs/2 upward.
    for (std::size_t i = 0; i < segment_len; ++i) {
        const std::size_t k = (i + segment_len / 2) % segment_len;
        out[i] = {bin_frequency(k, segment_len, sample_rate), acc[k] * scale};
    }
    return out;
}

std::vector<PsdPoint> psd(const DualPolSignal& sig, std::size_t segment_len, Pol which) {
    return psd(sig.component(which), sig.sample_rate(), segment_len);
}

std::optional<std::pair<int, int>> rational_approx(double ratio, int max_den) {
    if (!(ratio > 0.0) || !std::isfinite(ratio)) return std::nullopt;
    for (int q = 1; q <= max_den; ++q) {
        const double p = std::round(ratio * q);
        if (p < 1.0 || p > 1e6) continue;
        if (std::abs(p / q - ratio) <= 1e-9 * ratio) {
            const int pi = static_cast<int>(p);
            const int g = std::gcd(pi, q);
            return std::pair{pi / g, q / g};
        }
    }
    return std::nullopt;
}

namespace {

double bessel_i0(double x) {
    double sum = 1.0;
    double term = 1.0;
    const double q = x * x / 4.0;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<double>(k) * static_cast<double>(k));
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum;
}

// Kaiser-windowed sinc at the up-sampled rate. Passband 0.45, stopband 0.55
// of the lower of the two rates, ~90 dB rejection.
RVec design_resampler(int up, int down, std::size_t& half_len) {
    const int m = std::max(up, down);
    half_len = static_cast<std::size_t>(30 * m);
    const std::size_t n = 2 * half_len + 1;
    const double fc = 0.5 / m;  // cycles per up-rate sample
    const double beta = 0.1102 * (90.0 - 8.7);
    const double i0b = bessel_i0(beta);
    RVec h(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) - static_cast<double>(half_len);
        const double arg = kPi * 2.0 * fc * t;
        const double sinc = (t == 0.0) ? 1.0 : std::sin(arg) / arg;
        const double r = t / static_cast<double>(half_len);
        const double w = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0b;
        h[i] = up * 2.0 * fc * sinc * w;
    }
    return h;
}

}  // namespace

CVec resample(std::span<const cplx> s, int up, int down) {
    if (up < 1 || down < 1) throw Error("resample factors must be positive");
    if (s.empty()) throw Error("empty signal");
    if (up == 1 && down == 1) return CVec(s.begin(), s.end());

    std::size_t half = 0;
    const RVec h = design_resampler(up, down, half);
    const auto n_in = static_cast<long long>(s.size());
    const auto p = static_cast<long long>(up);
    const auto q = static_cast<long long>(down);
    const auto k_half = static_cast<long long>(half);
    const auto taps = static_cast<long long>(h.size());
    const auto n_out = static_cast<std::size_t>((n_in * p + q - 1) / q);

    CVec out(n_out);
    for (std::size_t m = 0; m < n_out; ++m) {
        // y[m] = sum_n h[m q + K - n p] x[n], frame treated as periodic
        const long long base = static_cast<long long>(m) * q + k_half;
        const long long n_hi = base / p;
        cplx acc{0.0, 0.0};
        for (long long n = n_hi; base - n * p < taps; --n) {
            const long long idx = ((n % n_in) + n_in) % n_in;
            acc += h[static_cast<std::size_t>(base - n * p)] * s[static_cast<std::size_t>(idx)];
        }
        out[m] = acc;
    }
    return out;
}

DualPolSignal resample(const DualPolSignal& sig, double new_rate) {
    if (!(new_rate > 0.0)) throw Error("resample rate must be positive");
    const auto frac = rational_approx(new_rate / sig.sample_rate());
    if (!frac) throw Error("resample ratio is not a rational with denominator <= 64");
    const auto [up, down] = *frac;
    return DualPolSignal(resample(sig.x(), up, down), resample(sig.y(), up, down), new_rate,
                         sig.center_wavelength());
}

}  // namespace pmcsh
