#include "pmcsh/channel.hpp"

#include <cmath>

#include "pmcsh/fft.hpp"

namespace pmcsh::channel {

double FiberParams::dgd_mean() const { return dgd_mean_ps.value_or(0.1 * std::sqrt(length_km)); }

void validate(const FiberParams& p) {
    if (!(p.length_km >= 0.0)) throw ConfigError("fiber.length_km must be >= 0");
    if (!(p.atten_db_km >= 0.0)) throw ConfigError("fiber.atten_db_km must be >= 0");
    if (!(p.dgd_mean() >= 0.0)) throw ConfigError("fiber.dgd_mean_ps must be >= 0");
    if (!(p.sop_drift_rad_s >= 0.0)) throw ConfigError("fiber.sop_drift_rad_s must be >= 0");
    if (!(p.ref_wavelength_m > 0.0)) throw ConfigError("fiber.ref_wavelength_m must be > 0");
    if (!std::isfinite(p.dispersion_ps_nm_km) || !std::isfinite(p.slope_ps_nm2_km))
        throw ConfigError("fiber dispersion parameters must be finite");
}

Dispersion dispersion_coefficients(const FiberParams& p) {
    const double lambda = p.ref_wavelength_m;
    const double d_si = p.dispersion_ps_nm_km * 1e-6;  // s/m^2
    const double s_si = p.slope_ps_nm2_km * 1e3;       // s/m^3
    const double k = lambda * lambda / (kTwoPi * kSpeedOfLight);
    return {-d_si * k, k * k * (s_si + 2.0 * d_si / lambda)};
}

cplx cd_transfer(double f, const FiberParams& p) {
    const auto [b2, b3] = dispersion_coefficients(p);
    const double w = kTwoPi * f;
    const double len = p.length_km * 1e3;
    // Physics sign convention (field ~ e^{j(beta z - w t)}). Under the FFT's
    // e^{-j 2 pi f t} kernel this mirrors the group delay around f = 0, which
    // the receiver cannot tell apart for a self-homodyne beat.
    const double phase = (b2 / 2.0) * w * w * len + (b3 / 6.0) * w * w * w * len;
    return std::polar(1.0, phase);
}

JonesMatrix random_unitary(RngStream& rng) {
    double q[4];
    double norm = 0.0;
    for (double& v : q) {
        v = rng.gaussian();
        norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : q) v /= norm;
    const cplx a{q[0], q[1]};
    const cplx b{q[2], q[3]};
    const cplx g = std::polar(1.0, kTwoPi * rng.uniform());
    return g * JonesMatrix{a, -std::conj(b), b, std::conj(a)};
}

JonesMatrix euler_rotation(const std::array<double, 3>& a) {
    return JonesMatrix::retarder(0.0, a[0]) * JonesMatrix::retarder(kPi / 4.0, a[1]) *
           JonesMatrix::retarder(0.0, a[2]);
}

JonesMatrix random_rotation(RngStream& rng) {
    std::array<double, 3> a{};
    for (double& v : a) v = kTwoPi * rng.uniform();
    return euler_rotation(a);
}

PmdSection draw_pmd(const FiberParams& p, RngStream& rng) {
    const double sigma = p.dgd_mean() * std::sqrt(kPi / 8.0);
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double g = sigma * rng.gaussian();
        s += g * g;
    }
    return {std::sqrt(s), random_unitary(rng)};
}

JonesOperator fiber_operator(std::size_t n, double fs, const FiberParams& p, const JonesMatrix& static_rotation,
                             const PmdSection& pmd) {
    const double loss = std::pow(10.0, -p.atten_db_km * p.length_km / 20.0);
    const JonesMatrix front = cplx{loss, 0.0} * static_rotation;
    const JonesMatrix axes_h = pmd.axes.adjoint();
    const double tau = pmd.dgd_ps * 1e-12;
    std::vector<JonesMatrix> bins(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double f = bin_frequency(k, n, fs);
        const cplx cd = cd_transfer(f, p);
        const JonesMatrix pmd_k =
            pmd.axes * JonesMatrix::diag(std::polar(1.0, kPi * f * tau), std::polar(1.0, -kPi * f * tau)) * axes_h;
        bins[k] = front * (cd * pmd_k);
    }
    return JonesOperator(std::move(bins));
}

DualPolSignal propagate(const DualPolSignal& sig, const FiberParams& p, const JonesMatrix& static_rotation,
                        const PmdSection& pmd) {
    validate(p);
    if (static_rotation.unitarity_residual() > 1e-9) throw Error("propagate: static rotation is not unitary");
    const bool dispersive = p.length_km > 0.0 && (p.dispersion_ps_nm_km != 0.0 || p.slope_ps_nm2_km != 0.0);
    if (!dispersive && pmd.dgd_ps == 0.0) {
        const double loss = std::pow(10.0, -p.atten_db_km * p.length_km / 20.0);
        return apply_jones(sig, cplx{loss, 0.0} * static_rotation);
    }
    return apply_jones(sig, fiber_operator(sig.size(), sig.sample_rate(), p, static_rotation, pmd));
}

double ase_density(double signal_power_mw, double osnr_db) {
    return signal_power_mw / (db_to_lin(osnr_db) * kOsnrRefBandwidth);
}

DualPolSignal load_osnr(const DualPolSignal& sig, double osnr_db, RngStream& rng) {
    if (std::isinf(osnr_db) && osnr_db > 0.0) return sig;
    const double p = total_power(sig);
    if (!(p > 0.0)) throw Error("load_osnr: signal power must be positive");
    const double per_pol_var = ase_density(p, osnr_db) / 2.0 * sig.sample_rate();
    CVec x = sig.x();
    CVec y = sig.y();
    for (std::size_t k = 0; k < x.size(); ++k) {
        x[k] += rng.complex_gaussian(per_pol_var);
        y[k] += rng.complex_gaussian(per_pol_var);
    }
    return sig.with_samples(std::move(x), std::move(y));
}

SopTrajectory::SopTrajectory(double dt, std::vector<std::array<double, 3>> knots) : dt_(dt), knots_(std::move(knots)) {
    if (!(dt_ > 0.0)) throw Error("trajectory dt must be positive");
    if (knots_.empty()) throw Error("trajectory needs at least one knot");
}

SopTrajectory SopTrajectory::random_walk(double drift_rate, double dt, std::size_t steps, RngStream& rng) {
    std::vector<std::array<double, 3>> knots(steps + 1, std::array<double, 3>{0.0, 0.0, 0.0});
    const double std_step = drift_rate * dt;
    for (std::size_t k = 1; k <= steps; ++k)
        for (int i = 0; i < 3; ++i) knots[k][i] = knots[k - 1][i] + std_step * rng.gaussian();
    return {dt, std::move(knots)};
}

SopTrajectory SopTrajectory::winding(const std::array<double, 3>& rates, double dt, std::size_t steps) {
    std::vector<std::array<double, 3>> knots(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = dt * static_cast<double>(k);
        knots[k] = {rates[0] * t, rates[1] * t, rates[2] * t};
    }
    return {dt, std::move(knots)};
}

SopTrajectory SopTrajectory::still(double dt, std::size_t steps) {
    return {dt, std::vector<std::array<double, 3>>(steps + 1, std::array<double, 3>{0.0, 0.0, 0.0})};
}

std::array<double, 3> SopTrajectory::angles_at(double t) const {
    const double h = horizon();
    if (t < 0.0 || t > h * (1.0 + 1e-12) + 1e-15) throw Error("drift_step: t beyond trajectory horizon");
    if (knots_.size() == 1) return knots_[0];
    const double pos = std::min(t / dt_, static_cast<double>(knots_.size() - 1));
    const auto i = std::min(static_cast<std::size_t>(pos), knots_.size() - 2);
    const double frac = pos - static_cast<double>(i);
    std::array<double, 3> out{};
    for (int a = 0; a < 3; ++a) out[a] = knots_[i][a] + frac * (knots_[i + 1][a] - knots_[i][a]);
    return out;
}

JonesMatrix drift_step(const SopTrajectory& traj, double t) { return euler_rotation(traj.angles_at(t)); }

}  // namespace pmcsh::channel
