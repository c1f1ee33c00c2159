#pragma once

// Standard single-mode fiber: chromatic dispersion with slope, first-order
// PMD, a static SOP rotation, lumped loss, SOP drift, and ASE loading.

#include <array>
#include <optional>

#include "pmcsh/field.hpp"
#include "pmcsh/rng.hpp"

namespace pmcsh::channel {

struct FiberParams {
    double length_km = 20.0;
    double dispersion_ps_nm_km = 16.0;
    // Slope 0.08 ps/(nm^2 km) = 0.08e3 s/m^3 (1 ps/(nm^2 km) = 1e-12 s / (1e-18 m^2 * 1e3 m)).
    double slope_ps_nm2_km = 0.08;
    double atten_db_km = 0.2;
    /// Mean DGD; when unset, 0.1 ps per sqrt(km).
    std::optional<double> dgd_mean_ps;
    double sop_drift_rad_s = 1.0;
    double ref_wavelength_m = 1550e-9;

    double dgd_mean() const;
};

void validate(const FiberParams& p);

/// Group-velocity-dispersion coefficients in SI, derived from D and S at ref_wavelength.
struct Dispersion {
    double beta2;  // s^2/m
    double beta3;  // s^3/m
};
Dispersion dispersion_coefficients(const FiberParams& p);

/// All-pass CD response at baseband offset f (Hz).
cplx cd_transfer(double f, const FiberParams& p);

/// First-order PMD: DGD between the principal states given by the columns of `axes`.
struct PmdSection {
    double dgd_ps = 0.0;
    JonesMatrix axes = JonesMatrix::identity();
};

/// DGD from a Maxwellian with the fiber's mean, principal axes Haar-random.
PmdSection draw_pmd(const FiberParams& p, RngStream& rng);

/// Haar-distributed element of U(2) (quaternion construction on SU(2)).
JonesMatrix random_unitary(RngStream& rng);

/// R_x(a1) R_45(a2) R_x(a3), with R_x / R_45 linear retarders at 0 and 45 degrees.
JonesMatrix euler_rotation(const std::array<double, 3>& angles);

/// Three angles uniform in [0, 2pi) composed through euler_rotation.
JonesMatrix random_rotation(RngStream& rng);

/// Per-bin fiber operator for an n-point frame at rate fs: loss * R * PMD(f) * CD(f).
JonesOperator fiber_operator(std::size_t n, double fs, const FiberParams& p, const JonesMatrix& static_rotation,
                             const PmdSection& pmd);

DualPolSignal propagate(const DualPolSignal& sig, const FiberParams& p, const JonesMatrix& static_rotation,
                        const PmdSection& pmd);

/// Adds ASE so that total_power / (N0 * 12.5 GHz) = 10^(osnr_db/10), where N0 is the
/// noise density summed over both polarizations (N0/2 each). Infinite OSNR is a no-op.
DualPolSignal load_osnr(const DualPolSignal& sig, double osnr_db, RngStream& rng);

/// Noise density N0 (both polarizations) that load_osnr would add.
double ase_density(double signal_power_mw, double osnr_db);

/// Piecewise-linear angle trajectory sampled at the controller cadence.
class SopTrajectory {
public:
    SopTrajectory(double dt, std::vector<std::array<double, 3>> knots);

    /// Zero-mean Gaussian increments with std drift_rate * dt per angle, starting at 0.
    static SopTrajectory random_walk(double drift_rate, double dt, std::size_t steps, RngStream& rng);
    /// Deterministic ramps angle_i(t) = rates[i] * t.
    static SopTrajectory winding(const std::array<double, 3>& rates, double dt, std::size_t steps);
    static SopTrajectory still(double dt, std::size_t steps);

    double dt() const { return dt_; }
    double horizon() const { return dt_ * static_cast<double>(knots_.size() - 1); }
    const std::vector<std::array<double, 3>>& knots() const { return knots_; }
    std::array<double, 3> angles_at(double t) const;

private:
    double dt_;
    std::vector<std::array<double, 3>> knots_;
};

JonesMatrix drift_step(const SopTrajectory& traj, double t);

}  // namespace pmcsh::channel
