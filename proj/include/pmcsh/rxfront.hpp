#pragma once

// Receiver optics: endless polarization controller, PBS, monitor tap and
// photodetector, 90-degree hybrid with balanced detection.

#include <span>
#include <utility>

#include "pmcsh/field.hpp"
#include "pmcsh/rng.hpp"

namespace pmcsh::rx {

/// Cascade of variable linear retarders with fixed axes. Retardances are
/// unbounded accumulators; the optics see them modulo 2pi.
struct EpcState {
    RVec retardances;
    RVec axes;  // rad
    double volts_per_rad = 1.0;

    /// n plates alternating 0 / 45 degrees, all retardances zero.
    static EpcState alternating(std::size_t plates);

    std::size_t plates() const { return retardances.size(); }
    RVec voltages() const;
};

JonesMatrix epc_jones(const EpcState& state);

struct ReceiverParams {
    double tap_ratio = 0.10;
    double responsivity = 0.8;              // A/W
    double thermal_noise_a_rthz = 15e-12;   // A/sqrt(Hz)
    bool shot_noise = true;
    double monitor_bw_hz = 100e3;
    double pd_bw_hz = 100e9;                // <= 0 disables the electrical low-pass
};

void validate(const ReceiverParams& p);

struct IqWaveforms {
    RVec i;  // A
    RVec q;  // A
    double rate;
};

/// branch_a = x (signal port side), branch_b = y (LO side).
std::pair<CVec, CVec> pbs_split(const DualPolSignal& sig);

struct TapOutput {
    CVec main;
    CVec monitor;
};
TapOutput tap(std::span<const cplx> branch, double ratio);

/// Low-bandwidth monitor photodetector read once per probe interval.
class MonitorPd {
public:
    MonitorPd(const ReceiverParams& p, RngStream rng);

    /// Optical power falling on the detector -> reading in mW (clamped at 0).
    double read(double optical_power_mw, double interval_s);
    double last_unclamped() const { return last_raw_; }
    /// Thermal-noise std of one reading, expressed as optical power in mW.
    double noise_std_mw() const;

private:
    ReceiverParams params_;
    RngStream rng_;
    bool primed_ = false;
    double filtered_ = 0.0;
    double last_raw_ = 0.0;
};

/// Thermal-noise std of one monitor reading, as optical power in mW.
double monitor_noise_std_mw(const ReceiverParams& p);

/// One monitor reading of a sampled stream: mean |a|^2 plus detector noise.
double monitor_pd(std::span<const cplx> monitor, const ReceiverParams& p, RngStream& rng);

/// i = R Re(s conj(c)), q = R Im(s conj(c)) plus shot/thermal noise, then a
/// single-pole low-pass at pd_bw applied over the (periodic) frame.
IqWaveforms hybrid_bpd(std::span<const cplx> signal, std::span<const cplx> carrier, double rate,
                       const ReceiverParams& p, const Rng& rng);

}  // namespace pmcsh::rx
