#include "pmcsh/polctl.hpp"

#include <cmath>

namespace pmcsh::ctl {

void validate(const ControllerParams& p) {
    if (!(p.step_mu > 0.0)) throw ConfigError("ctl.step_mu must be > 0");
    if (!(p.dither_delta > 0.0)) throw ConfigError("ctl.dither_delta must be > 0");
    if (!(p.loop_rate_hz > 0.0)) throw ConfigError("ctl.loop_rate_hz must be > 0");
    if (p.max_iters == 0) throw ConfigError("ctl.max_iters must be > 0");
    if (p.window == 0) throw ConfigError("ctl.window must be > 0");
    if (p.probe_avg == 0) throw ConfigError("ctl.probe_avg must be > 0");
    if (!(p.converge_tol_db > 0.0)) throw ConfigError("ctl.converge_tol_db must be > 0");
}

RVec estimate_gradient(const rx::EpcState& state, const Probe& probe, double delta) {
    if (!(delta > 0.0)) throw Error("dither delta must be positive");
    RVec g(state.plates());
    rx::EpcState work = state;
    for (std::size_t i = 0; i < state.plates(); ++i) {
        const double phi = state.retardances[i];
        work.retardances[i] = phi + delta;
        const double up = probe(work);
        work.retardances[i] = phi - delta;
        const double down = probe(work);
        work.retardances[i] = phi;
        g[i] = (up - down) / (2.0 * delta);
    }
    return g;
}

RVec estimate_gradient_spsa(const rx::EpcState& state, const Probe& probe, double delta, RngStream& rng) {
    if (!(delta > 0.0)) throw Error("dither delta must be positive");
    const std::size_t n = state.plates();
    RVec dir(n);
    for (auto& d : dir) d = (rng.next_u64() >> 63) ? 1.0 : -1.0;
    rx::EpcState plus = state;
    rx::EpcState minus = state;
    for (std::size_t i = 0; i < n; ++i) {
        plus.retardances[i] += delta * dir[i];
        minus.retardances[i] -= delta * dir[i];
    }
    const double diff = (probe(plus) - probe(minus)) / (2.0 * delta);
    RVec g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = diff * dir[i];
    return g;
}

rx::EpcState control_step(const rx::EpcState& state, const RVec& gradient, const ControllerParams& p) {
    if (gradient.size() != state.plates()) throw Error("gradient size does not match plate count");
    double norm = 0.0;
    for (const double v : gradient) norm += v * v;
    norm = std::sqrt(norm);
    rx::EpcState next = state;
    const double scale = p.step_mu / (norm + 1e-12);
    for (std::size_t i = 0; i < gradient.size(); ++i) next.retardances[i] -= scale * gradient[i];
    return next;
}

double extinction(double p_lo_branch, double p_signal_branch) {
    if (!(p_lo_branch > 0.0) || !(p_signal_branch > 0.0)) throw Error("extinction: branch power must be positive");
    return 10.0 * std::log10(p_lo_branch / p_signal_branch);
}

double monitored_power(const LinkModel& link, const JonesMatrix& w) {
    return link.rx.tap_ratio * link.received.x_power_after(w);
}

namespace {

bool is_static(const channel::SopTrajectory& traj) {
    const auto& k = traj.knots();
    for (const auto& a : k)
        if (a != k.front()) return false;
    return true;
}

}  // namespace

ControllerTrace run_loop(const LinkModel& link, const ControllerParams& p, const channel::SopTrajectory& traj,
                         const rx::EpcState& initial, const Rng& rng) {
    validate(p);
    const double dt = 1.0 / p.loop_rate_hz;
    const double last_t = dt * static_cast<double>(p.max_iters);
    if (traj.horizon() + 1e-12 < last_t) throw Error("run_loop: trajectory shorter than max_iters");
    const bool drifting = !is_static(traj);

    // Probes per iteration: the gradient estimate, the candidate state, and a
    // re-read of the kept state when the candidate is refused.
    const std::size_t probes_per_iter =
        (p.mode == GradientMode::Sequential ? 2 * initial.plates() : 2) + 2;
    const double read_interval = dt / static_cast<double>(probes_per_iter * p.probe_avg);

    rx::MonitorPd pd(link.rx, rng.stream("ctl.monitor"));
    RngStream spsa_rng = rng.stream("ctl.spsa");

    JonesMatrix drift = channel::drift_step(traj, 0.0);
    auto probe = [&](const rx::EpcState& s) {
        const double optical = monitored_power(link, rx::epc_jones(s) * drift);
        double acc = 0.0;
        for (std::size_t r = 0; r < p.probe_avg; ++r) acc += pd.read(optical, read_interval);
        return acc / static_cast<double>(p.probe_avg);
    };
    auto ext_of = [&](const rx::EpcState& s) {
        const JonesMatrix w = rx::epc_jones(s) * drift;
        return extinction(link.noiseless.y_power_after(w), link.noiseless.x_power_after(w));
    };

    ControllerTrace trace;
    rx::EpcState state = initial;
    double power = probe(state);
    const double initial_power = power;
    trace.rows.push_back({0, 0.0, power, ext_of(state), state.retardances});

    // A step that raises the monitor reading is refused and the step size
    // halved; accepted steps grow it back towards step_mu.
    ControllerParams local = p;
    const double min_step = p.step_mu / 64.0;

    std::size_t above_initial = 0;
    for (std::size_t k = 1; k <= p.max_iters; ++k) {
        const double t = dt * static_cast<double>(k);
        drift = channel::drift_step(traj, t);
        const RVec g = p.mode == GradientMode::Sequential ? estimate_gradient(state, probe, p.dither_delta)
                                                          : estimate_gradient_spsa(state, probe, p.dither_delta,
                                                                                   spsa_rng);
        const rx::EpcState candidate = control_step(state, g, local);
        const double trial = probe(candidate);
        if (trial <= power || local.step_mu <= min_step) {
            state = candidate;
            power = trial;
            local.step_mu = std::min(p.step_mu, 1.5 * local.step_mu);
        } else {
            local.step_mu = std::max(min_step, 0.5 * local.step_mu);
            power = probe(state);
        }
        trace.rows.push_back({k, t, power, ext_of(state), state.retardances});

        above_initial = power > initial_power ? above_initial + 1 : 0;
        if (above_initial > p.window) trace.diverged = true;

        if (k >= p.window) {
            const double past = trace.rows[k - p.window].monitor_mw;
            const bool flat = past > 0.0 && power > 0.0 && std::abs(10.0 * std::log10(power / past)) < p.converge_tol_db;
            if (flat && !trace.settled_at) trace.settled_at = k;
            if (flat && !drifting) {
                trace.converged = true;
                break;
            }
        }
    }
    trace.final_state = state;
    trace.final_drift = drift;
    return trace;
}

double extinction_duty(const ControllerTrace& trace, std::size_t from, double threshold_db) {
    std::size_t total = 0;
    std::size_t good = 0;
    for (const auto& r : trace.rows) {
        if (r.iter < from) continue;
        ++total;
        if (r.extinction_db >= threshold_db) ++good;
    }
    return total == 0 ? 0.0 : static_cast<double>(good) / static_cast<double>(total);
}

}  // namespace pmcsh::ctl
