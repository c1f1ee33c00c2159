#include <cmath>

#include "doctest.h"
#include "pmcsh/polctl.hpp"

using namespace pmcsh;
using namespace pmcsh::ctl;

namespace {

// Coherency of a signal of power ps on column 0 of u and a carrier of power pc on column 1.
Coherency mixed(const JonesMatrix& u, double ps, double pc) {
    Coherency c;
    c.xx = ps * std::norm(u.m00) + pc * std::norm(u.m01);
    c.yy = ps * std::norm(u.m10) + pc * std::norm(u.m11);
    c.xy = ps * u.m00 * std::conj(u.m10) + pc * u.m01 * std::conj(u.m11);
    return c;
}

constexpr double kSignal = 5.0 * 0.0630957344480193;  // 5 mW after 12 dB
constexpr double kCarrier = 5.0;

LinkModel link_for(const JonesMatrix& channel, bool noisy_pd) {
    rx::ReceiverParams rx;
    if (!noisy_pd) rx.thermal_noise_a_rthz = 0.0;
    const Coherency c = mixed(channel, kSignal, kCarrier);
    return {c, c, rx};
}

double bowl(const rx::EpcState& s, const RVec& target) {
    double v = 0.0;
    for (std::size_t i = 0; i < s.plates(); ++i) v += std::pow(s.retardances[i] - target[i], 2);
    return v;
}

}  // namespace

TEST_CASE("extinction arithmetic") {
    CHECK(extinction(1.0, 1.0) == 0.0);
    CHECK(extinction(10.0, 1.0) == doctest::Approx(10.0));
    CHECK_THROWS(extinction(1.0, 0.0));
}

TEST_CASE("gradient of a constant probe is zero; probes differ from the state in one plate") {
    const rx::EpcState s = rx::EpcState::alternating(4);
    int calls = 0;
    const RVec g = estimate_gradient(s, [&](const rx::EpcState& p) {
        ++calls;
        int changed = 0;
        for (std::size_t i = 0; i < 4; ++i) changed += p.retardances[i] != s.retardances[i];
        CHECK(changed == 1);
        return 3.0;
    }, 0.02);
    CHECK(calls == 8);
    for (double v : g) CHECK(v == 0.0);
    CHECK_THROWS(estimate_gradient(s, [](const rx::EpcState&) { return 0.0; }, 0.0));
}

TEST_CASE("central-difference gradient of a quadratic bowl is exact") {
    rx::EpcState s = rx::EpcState::alternating(4);
    s.retardances = {0.3, -1.0, 2.0, 0.5};
    const RVec target{1.0, 1.0, -1.0, 0.0};
    const RVec g = estimate_gradient(s, [&](const rx::EpcState& p) { return bowl(p, target); }, 0.02);
    for (std::size_t i = 0; i < 4; ++i) CHECK(g[i] == doctest::Approx(2.0 * (s.retardances[i] - target[i])));
}

TEST_CASE("monitor-power gradient is consistent under halving the dither") {
    RngStream r(3, 3);
    const LinkModel link = link_for(channel::random_unitary(r), false);
    const Probe probe = [&](const rx::EpcState& s) { return monitored_power(link, rx::epc_jones(s)); };
    for (int trial = 0; trial < 20; ++trial) {
        rx::EpcState s = rx::EpcState::alternating(4);
        for (double& v : s.retardances) v = kTwoPi * r.uniform();
        const RVec g1 = estimate_gradient(s, probe, 0.02);
        const RVec g2 = estimate_gradient(s, probe, 0.01);
        double n = 0.0, d = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            n += std::pow(g1[i] - g2[i], 2);
            d += g2[i] * g2[i];
        }
        CHECK(std::sqrt(n) <= 0.02 * std::sqrt(d) + 1e-12);
    }
}

TEST_CASE("SPSA gradient is unbiased on a bowl") {
    rx::EpcState s = rx::EpcState::alternating(4);
    s.retardances = {0.3, -1.0, 2.0, 0.5};
    const RVec target{0.0, 0.0, 0.0, 0.0};
    RngStream r(4, 4);
    RVec mean(4, 0.0);
    const int n = 4000;
    for (int i = 0; i < n; ++i) {
        const RVec g = estimate_gradient_spsa(s, [&](const rx::EpcState& p) { return bowl(p, target); }, 0.02, r);
        for (std::size_t k = 0; k < 4; ++k) mean[k] += g[k] / n;
    }
    for (std::size_t k = 0; k < 4; ++k) CHECK(mean[k] == doctest::Approx(2.0 * s.retardances[k]).epsilon(0.1));
}

TEST_CASE("normalized step") {
    ControllerParams p;
    rx::EpcState s = rx::EpcState::alternating(4);
    s.retardances = {1.0, 2.0, 3.0, 4.0};
    const rx::EpcState same = control_step(s, RVec(4, 0.0), p);
    CHECK(same.retardances == s.retardances);
    const rx::EpcState one = control_step(s, RVec{7.0, 0.0, 0.0, 0.0}, p);
    CHECK(one.retardances[0] == doctest::Approx(1.0 - p.step_mu));
    CHECK(one.retardances[1] == 2.0);
    CHECK_THROWS(control_step(s, RVec(3, 0.0), p));
}

TEST_CASE("descent on a bowl reaches the step-size ball in the predicted time") {
    ControllerParams p;
    rx::EpcState s = rx::EpcState::alternating(4);
    s.retardances = {2.0, -1.5, 0.7, 1.1};
    const RVec target{0.1, 0.2, -0.3, 0.4};
    const double d0 = std::sqrt(bowl(s, target));
    const auto budget = static_cast<int>(10.0 * d0 / p.step_mu);
    int k = 0;
    for (; k < budget && std::sqrt(bowl(s, target)) >= p.step_mu; ++k)
        s = control_step(s, estimate_gradient(s, [&](const rx::EpcState& x) { return bowl(x, target); }, 0.02), p);
    CHECK(std::sqrt(bowl(s, target)) < p.step_mu);
}

TEST_CASE("identity channel from an identity EPC stays at the minimum") {
    const LinkModel link = link_for(JonesMatrix::identity(), false);
    ControllerParams p;
    p.max_iters = 200;
    const auto traj = channel::SopTrajectory::still(1.0 / p.loop_rate_hz, p.max_iters);
    const ControllerTrace t = run_loop(link, p, traj, rx::EpcState::alternating(4), Rng(1));
    CHECK(t.converged);
    const double ext_tx = 10.0 * std::log10(kCarrier / kSignal);
    CHECK(ext_tx == doctest::Approx(12.0));
    for (const auto& row : t.rows) CHECK(row.extinction_db > ext_tx - 0.5);
    CHECK(t.rows.back().extinction_db == doctest::Approx(ext_tx).epsilon(0.02));
}

TEST_CASE("noiseless static loop: descent property and carrier fraction") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        RngStream r(seed, 77);
        const JonesMatrix ch = channel::random_unitary(r);
        const LinkModel link = link_for(ch, false);
        ControllerParams p;
        const auto traj = channel::SopTrajectory::still(1.0 / p.loop_rate_hz, p.max_iters);
        const ControllerTrace t = run_loop(link, p, traj, rx::EpcState::alternating(4), Rng(seed));
        const double p0 = t.rows.front().monitor_mw;
        for (std::size_t k = 1; k < t.rows.size(); ++k)
            CHECK(t.rows[k].monitor_mw <= t.rows[k - 1].monitor_mw + 1e-3 * p0);
        CHECK(t.converged);
        CHECK_FALSE(t.diverged);
        // Carrier alone through the same operators.
        const Coherency carrier = mixed(ch, 0.0, kCarrier);
        const JonesMatrix w = rx::epc_jones(t.final_state) * t.final_drift;
        CHECK(carrier.y_power_after(w) / carrier.total() >= 0.99);
    }
}

TEST_CASE("run_loop needs a long enough trajectory and records one row per iteration") {
    const LinkModel link = link_for(JonesMatrix::rotation(0.7), true);
    ControllerParams p;
    p.max_iters = 50;
    CHECK_THROWS(run_loop(link, p, channel::SopTrajectory::still(1e-3, 10), rx::EpcState::alternating(4), Rng(1)));
    RngStream r(2, 2);
    const auto traj = channel::SopTrajectory::random_walk(1.0, 1e-3, 50, r);
    const ControllerTrace t = run_loop(link, p, traj, rx::EpcState::alternating(4), Rng(1));
    CHECK(t.rows.size() == 51);
    CHECK_FALSE(t.converged);
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        CHECK(t.rows[k].iter == k);
        CHECK(t.rows[k].time_s == doctest::Approx(k * 1e-3));
        CHECK(t.rows[k].retardances.size() == 4);
    }
}

TEST_CASE("divergence is flagged when the monitor stays above its start") {
    // Starts on the minimum; the SOP then winds far faster than steps of
    // step_mu can follow.
    const LinkModel link = link_for(JonesMatrix::identity(), false);
    ControllerParams p;
    p.max_iters = 100;
    p.window = 5;
    const auto traj = channel::SopTrajectory::winding({0.0, 300.0, 0.0}, 1e-3, p.max_iters);
    const ControllerTrace t = run_loop(link, p, traj, rx::EpcState::alternating(4), Rng(1));
    CHECK(t.diverged);
}

TEST_CASE("extinction duty cycle") {
    ControllerTrace t;
    for (std::size_t k = 0; k < 10; ++k) t.rows.push_back({k, 0.0, 0.0, k < 4 ? 5.0 : 12.0, {}});
    CHECK(extinction_duty(t, 0, 10.0) == doctest::Approx(0.6));
    CHECK(extinction_duty(t, 4, 10.0) == 1.0);
}

TEST_CASE("controller parameter validation") {
    ControllerParams p;
    p.step_mu = 0.0;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = ControllerParams{};
    p.loop_rate_hz = -1.0;
    CHECK_THROWS_AS(validate(p), ConfigError);
}
