#include "pmcsh/rxfront.hpp"

#include <algorithm>
#include <cmath>

#include "pmcsh/fft.hpp"

namespace pmcsh::rx {

EpcState EpcState::alternating(std::size_t plates) {
    EpcState s;
    s.retardances.assign(plates, 0.0);
    s.axes.resize(plates);
    for (std::size_t i = 0; i < plates; ++i) s.axes[i] = (i % 2 == 0) ? 0.0 : kPi / 4.0;
    return s;
}

RVec EpcState::voltages() const {
    RVec v(retardances.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = retardances[i] * volts_per_rad;
    return v;
}

JonesMatrix epc_jones(const EpcState& state) {
    if (state.axes.size() != state.retardances.size()) throw Error("epc: axes and retardances differ in count");
    // Light meets plate 0 first, so it is the rightmost factor.
    JonesMatrix j = JonesMatrix::identity();
    for (std::size_t i = 0; i < state.plates(); ++i) {
        const double phi = std::remainder(state.retardances[i], kTwoPi);
        j = JonesMatrix::retarder(state.axes[i], phi) * j;
    }
    return j;
}

void validate(const ReceiverParams& p) {
    if (!(p.tap_ratio > 0.0 && p.tap_ratio < 1.0)) throw ConfigError("rx.tap_ratio must be in (0, 1)");
    if (!(p.responsivity > 0.0)) throw ConfigError("rx.responsivity must be > 0");
    if (!(p.thermal_noise_a_rthz >= 0.0)) throw ConfigError("rx.thermal_noise_a_rthz must be >= 0");
    if (!(p.monitor_bw_hz > 0.0)) throw ConfigError("rx.monitor_bw_hz must be > 0");
}

std::pair<CVec, CVec> pbs_split(const DualPolSignal& sig) { return {sig.x(), sig.y()}; }

TapOutput tap(std::span<const cplx> branch, double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw Error("tap ratio must be in (0, 1)");
    const double a_main = std::sqrt(1.0 - ratio);
    const double a_mon = std::sqrt(ratio);
    TapOutput out{CVec(branch.size()), CVec(branch.size())};
    for (std::size_t k = 0; k < branch.size(); ++k) {
        out.main[k] = a_main * branch[k];
        out.monitor[k] = a_mon * branch[k];
    }
    return out;
}

MonitorPd::MonitorPd(const ReceiverParams& p, RngStream rng) : params_(p), rng_(rng) {}

double monitor_noise_std_mw(const ReceiverParams& p) {
    const double amps = p.thermal_noise_a_rthz * std::sqrt(p.monitor_bw_hz);
    return amps / p.responsivity * 1e3;
}

double MonitorPd::noise_std_mw() const { return monitor_noise_std_mw(params_); }

double MonitorPd::read(double optical_power_mw, double interval_s) {
    if (!primed_) {
        filtered_ = optical_power_mw;
        primed_ = true;
    } else {
        const double alpha = 1.0 - std::exp(-kTwoPi * params_.monitor_bw_hz * interval_s);
        filtered_ += alpha * (optical_power_mw - filtered_);
    }
    last_raw_ = filtered_ + noise_std_mw() * rng_.gaussian();
    return std::max(0.0, last_raw_);
}

double monitor_pd(std::span<const cplx> monitor, const ReceiverParams& p, RngStream& rng) {
    return std::max(0.0, mean_power(monitor) + monitor_noise_std_mw(p) * rng.gaussian());
}

namespace {

RVec low_pass(const RVec& x, double rate, double bw) {
    if (bw <= 0.0) return x;
    CVec c(x.begin(), x.end());
    CVec f = fft(c);
    const std::size_t n = f.size();
    for (std::size_t k = 0; k < n; ++k) f[k] /= cplx{1.0, bin_frequency(k, n, rate) / bw};
    const CVec t = ifft(f);
    RVec out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = t[k].real();
    return out;
}

}  // namespace

IqWaveforms hybrid_bpd(std::span<const cplx> signal, std::span<const cplx> carrier, double rate,
                       const ReceiverParams& p, const Rng& rng) {
    if (signal.size() != carrier.size()) throw Error("hybrid: signal and carrier lengths differ");
    const std::size_t n = signal.size();
    const double r = p.responsivity;
    const double bw = rate / 2.0;
    const double thermal_var = p.thermal_noise_a_rthz * p.thermal_noise_a_rthz * bw;
    RngStream shot_rng = rng.stream("rx.shot");
    RngStream thermal_rng = rng.stream("rx.thermal");

    RVec i(n);
    RVec q(n);
    for (std::size_t k = 0; k < n; ++k) {
        const cplx beat = signal[k] * std::conj(carrier[k]) * 1e-3;  // mW -> W
        i[k] = r * beat.real();
        q[k] = r * beat.imag();
        if (p.shot_noise) {
            const double p_total_w = (std::norm(signal[k]) + std::norm(carrier[k])) * 1e-3;
            const double sd = std::sqrt(2.0 * kElectronCharge * r * p_total_w / 2.0 * bw);
            i[k] += sd * shot_rng.gaussian();
            q[k] += sd * shot_rng.gaussian();
        }
        if (thermal_var > 0.0) {
            const double sd = std::sqrt(thermal_var);
            i[k] += sd * thermal_rng.gaussian();
            q[k] += sd * thermal_rng.gaussian();
        }
    }
    return {low_pass(i, rate, p.pd_bw_hz), low_pass(q, rate, p.pd_bw_hz), rate};
}

}  // namespace pmcsh::rx
