#pragma once

// Adaptive polarization control: dithered gradient descent on the EPC
// retardances that minimizes the monitor-photodetector reading, which pushes
// the strong carrier out of the signal port and into the LO branch.

#include <functional>
#include <optional>

#include "pmcsh/channel.hpp"
#include "pmcsh/field.hpp"
#include "pmcsh/rng.hpp"
#include "pmcsh/rxfront.hpp"

namespace pmcsh::ctl {

enum class GradientMode { Sequential, Spsa };

struct ControllerParams {
    double step_mu = 0.05;        // rad per iteration along the normalized gradient
    double dither_delta = 0.02;   // rad
    double loop_rate_hz = 1e3;
    std::size_t max_iters = 2000;
    double converge_tol_db = 0.05;
    std::size_t window = 20;
    std::size_t probe_avg = 32;   // monitor samples averaged per probe
    GradientMode mode = GradientMode::Sequential;
};

void validate(const ControllerParams& p);

using Probe = std::function<double(const rx::EpcState&)>;

/// Central differences, one plate at a time: 2 probes per plate. The state
/// seen by each probe differs from `state` in one plate only.
RVec estimate_gradient(const rx::EpcState& state, const Probe& probe, double delta);

/// Simultaneous perturbation along a random +-1 direction: 2 probes total.
RVec estimate_gradient_spsa(const rx::EpcState& state, const Probe& probe, double delta, RngStream& rng);

/// phi <- phi - mu * g / (|g| + 1e-12). Accumulators are never wrapped.
rx::EpcState control_step(const rx::EpcState& state, const RVec& gradient, const ControllerParams& p);

/// 10 log10(P_lo / P_signal).
double extinction(double p_lo_branch, double p_signal_branch);

/// What the loop needs to know about the received field: its coherency at the
/// channel output (before drift and EPC, both frequency-flat), with and
/// without ASE. Drift and EPC act on it as J S J^H.
struct LinkModel {
    Coherency received;   // includes ASE; seen by the monitor PD
    Coherency noiseless;  // carrier + signal only; used for the extinction readout
    rx::ReceiverParams rx;
};

/// Monitor-PD optical input for operator W between channel and PBS.
double monitored_power(const LinkModel& link, const JonesMatrix& w);

struct TraceRow {
    std::size_t iter;
    double time_s;
    double monitor_mw;
    double extinction_db;
    RVec retardances;
};

struct ControllerTrace {
    std::vector<TraceRow> rows;
    rx::EpcState final_state;
    JonesMatrix final_drift = JonesMatrix::identity();
    bool converged = false;              // terminated on the convergence test
    std::optional<std::size_t> settled_at;  // first iteration meeting the window test
    bool diverged = false;
    std::size_t reset_events = 0;
};

ControllerTrace run_loop(const LinkModel& link, const ControllerParams& p, const channel::SopTrajectory& traj,
                         const rx::EpcState& initial, const Rng& rng);

/// Fraction of rows from `from` on with extinction >= threshold_db.
double extinction_duty(const ControllerTrace& trace, std::size_t from, double threshold_db);

}  // namespace pmcsh::ctl
