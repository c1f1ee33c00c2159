#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmcsh {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;   // m/s
inline constexpr double kElectronCharge = 1.602e-19;   // C
inline constexpr double kOsnrRefBandwidth = 12.5e9;    // Hz, 0.1 nm at 1550 nm

/// Model or runtime failure (bad dimensions, sync loss, divergence).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent parameter values.
class ConfigError : public Error {
public:
    using Error::Error;
};

inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin_to_db(double lin) { return 10.0 * std::log10(lin); }

}  // namespace pmcsh
