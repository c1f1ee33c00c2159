#pragma once

// Dual-polarization complex-baseband field and the linear operators acting on it.
//
// Amplitudes are in sqrt(mW): |a|^2 is instantaneous power in mW.

#include <array>
#include <optional>
#include <span>
#include <variant>

#include "pmcsh/common.hpp"

namespace pmcsh {

enum class Pol { X, Y };

class DualPolSignal {
public:
    DualPolSignal(CVec x, CVec y, double sample_rate, double center_wavelength);

    const CVec& x() const { return x_; }
    const CVec& y() const { return y_; }
    const CVec& component(Pol p) const { return p == Pol::X ? x_ : y_; }
    std::size_t size() const { return x_.size(); }
    double sample_rate() const { return sample_rate_; }
    double center_wavelength() const { return center_wavelength_; }

    /// Same metadata, new samples.
    DualPolSignal with_samples(CVec x, CVec y) const {
        return DualPolSignal(std::move(x), std::move(y), sample_rate_, center_wavelength_);
    }

private:
    CVec x_;
    CVec y_;
    double sample_rate_;
    double center_wavelength_;
};

/// Frequency-flat 2x2 Jones matrix, row-major.
struct JonesMatrix {
    cplx m00{1.0, 0.0};
    cplx m01{0.0, 0.0};
    cplx m10{0.0, 0.0};
    cplx m11{1.0, 0.0};

    static JonesMatrix identity() { return {}; }
    static JonesMatrix diag(cplx a, cplx b) { return {a, 0.0, 0.0, b}; }
    /// Real rotation of the polarization frame by `angle` rad.
    static JonesMatrix rotation(double angle);
    /// Linear retarder with fast axis at `axis` rad and retardance `retardance` rad,
    /// R(axis) diag(e^{j r/2}, e^{-j r/2}) R(-axis).
    static JonesMatrix retarder(double axis, double retardance);

    JonesMatrix adjoint() const { return {std::conj(m00), std::conj(m10), std::conj(m01), std::conj(m11)}; }
    std::array<cplx, 2> apply(cplx x, cplx y) const { return {m00 * x + m01 * y, m10 * x + m11 * y}; }
    /// max |(J^H J - I)_ij|
    double unitarity_residual() const;
};

JonesMatrix operator*(const JonesMatrix& a, const JonesMatrix& b);
JonesMatrix operator*(cplx s, const JonesMatrix& a);

/// Either a single matrix or one matrix per FFT bin (natural FFT order).
class JonesOperator {
public:
    JonesOperator(JonesMatrix flat) : rep_(flat) {}  // NOLINT(implicit)
    explicit JonesOperator(std::vector<JonesMatrix> per_bin) : rep_(std::move(per_bin)) {}

    bool frequency_flat() const { return std::holds_alternative<JonesMatrix>(rep_); }
    const JonesMatrix& flat() const { return std::get<JonesMatrix>(rep_); }
    const std::vector<JonesMatrix>& per_bin() const { return std::get<std::vector<JonesMatrix>>(rep_); }
    double unitarity_residual() const;

private:
    std::variant<JonesMatrix, std::vector<JonesMatrix>> rep_;
};

/// 2x2 Hermitian coherency matrix <E E^H> of a field, in mW.
struct Coherency {
    double xx = 0.0;
    double yy = 0.0;
    cplx xy{0.0, 0.0};  // <x conj(y)>

    /// Mean power of the x component after applying `j`.
    double x_power_after(const JonesMatrix& j) const;
    double y_power_after(const JonesMatrix& j) const;
    double total() const { return xx + yy; }
};

Coherency coherency(const DualPolSignal& sig);

double mean_power(std::span<const cplx> s);
double total_power(const DualPolSignal& sig);

DualPolSignal apply_jones(const DualPolSignal& sig, const JonesOperator& j);
/// The per-bin path for a flat matrix; used to cross-check the two routes.
DualPolSignal apply_jones_via_fft(const DualPolSignal& sig, const JonesMatrix& j);

struct PsdPoint {
    double frequency;  // Hz
    double density;    // mW/Hz
};

/// Welch periodogram: Hann window, 50% overlap, sorted by frequency.
std::vector<PsdPoint> psd(std::span<const cplx> samples, double sample_rate, std::size_t segment_len);
std::vector<PsdPoint> psd(const DualPolSignal& sig, std::size_t segment_len, Pol which);

/// Smallest p/q (q <= max_den) within 1e-9 relative of `ratio`.
std::optional<std::pair<int, int>> rational_approx(double ratio, int max_den = 64);

CVec resample(std::span<const cplx> s, int up, int down);
DualPolSignal resample(const DualPolSignal& sig, double new_rate);

}  // namespace pmcsh
