#include <cmath>

#include "doctest.h"
#include "pmcsh/field.hpp"
#include "pmcsh/rng.hpp"

using namespace pmcsh;

namespace {

DualPolSignal noise_signal(std::size_t n, std::uint64_t seed, double rate = 1e9) {
    RngStream r(seed, 11);
    CVec x(n), y(n);
    for (auto& v : x) v = r.complex_gaussian(1.0);
    for (auto& v : y) v = r.complex_gaussian(0.5);
    return DualPolSignal(x, y, rate, 1550e-9);
}

JonesMatrix some_unitary() {
    return JonesMatrix::retarder(0.3, 1.1) * JonesMatrix::rotation(-0.7) * JonesMatrix::retarder(1.2, 2.5);
}

}  // namespace

TEST_CASE("signal construction rejects inconsistent inputs") {
    CHECK_THROWS_WITH(DualPolSignal({}, {}, 1.0, 1.0), "empty signal");
    CHECK_THROWS(DualPolSignal(CVec(3), CVec(4), 1.0, 1.0));
    CHECK_THROWS(DualPolSignal(CVec(3), CVec(3), 0.0, 1.0));
    CHECK_THROWS(DualPolSignal(CVec(3), CVec(3), 1.0, -1.0));
}

TEST_CASE("retarders and rotations are unitary") {
    CHECK(JonesMatrix::rotation(0.37).unitarity_residual() < 1e-15);
    CHECK(JonesMatrix::retarder(0.2, 5.0).unitarity_residual() < 1e-15);
    CHECK(some_unitary().unitarity_residual() < 1e-14);
    const JonesMatrix ni = JonesMatrix::diag(1.0, 0.5);
    CHECK(ni.unitarity_residual() == doctest::Approx(0.75));
}

TEST_CASE("half-wave plate at 22.5 degrees maps x onto 45 degrees") {
    const JonesMatrix hwp = JonesMatrix::retarder(kPi / 8.0, kPi);
    const auto out = hwp.apply(1.0, 0.0);
    CHECK(std::norm(out[0]) == doctest::Approx(0.5));
    CHECK(std::norm(out[1]) == doctest::Approx(0.5));
    // linear output: equal phases on both components
    CHECK(std::abs(std::arg(out[0] * std::conj(out[1]))) < 1e-12);
}

TEST_CASE("unitary operators conserve power on both application routes") {
    const DualPolSignal s = noise_signal(1024, 5);
    const JonesMatrix j = some_unitary();
    const DualPolSignal a = apply_jones(s, j);
    const DualPolSignal b = apply_jones_via_fft(s, j);
    CHECK(std::abs(total_power(a) - total_power(s)) / total_power(s) < 1e-12);
    CHECK(std::abs(total_power(b) - total_power(s)) / total_power(s) < 1e-12);
    double diff = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) diff = std::max(diff, std::abs(a.x()[k] - b.x()[k]) + std::abs(a.y()[k] - b.y()[k]));
    CHECK(diff < 1e-12);
}

TEST_CASE("per-bin operator size must match the frame") {
    const DualPolSignal s = noise_signal(16, 1);
    const JonesOperator op(std::vector<JonesMatrix>(8));
    CHECK_THROWS(apply_jones(s, op));
}

TEST_CASE("coherency predicts branch powers after any operator") {
    const DualPolSignal s = noise_signal(2048, 9);
    const Coherency c = coherency(s);
    CHECK(c.xx == doctest::Approx(mean_power(s.x())));
    CHECK(c.total() == doctest::Approx(total_power(s)));
    const JonesMatrix j = some_unitary();
    const DualPolSignal out = apply_jones(s, j);
    CHECK(c.x_power_after(j) == doctest::Approx(mean_power(out.x())).epsilon(1e-12));
    CHECK(c.y_power_after(j) == doctest::Approx(mean_power(out.y())).epsilon(1e-12));
}

TEST_CASE("Welch PSD of white noise is flat at sigma^2/fs and integrates to the power") {
    const double fs = 2e9;
    const DualPolSignal s = noise_signal(1 << 16, 21, fs);
    const auto p = psd(s, 512, Pol::X);
    REQUIRE(p.size() == 512);
    CHECK(p.front().frequency == doctest::Approx(-fs / 2));
    double integral = 0.0;
    double mean_density = 0.0;
    for (const auto& pt : p) {
        integral += pt.density * fs / 512.0;
        mean_density += pt.density / 512.0;
    }
    CHECK(integral == doctest::Approx(mean_power(s.x())).epsilon(1e-3));
    CHECK(mean_density == doctest::Approx(1.0 / fs).epsilon(0.02));
}

TEST_CASE("PSD of a bin-centred tone peaks at its frequency") {
    const double fs = 1e9;
    const std::size_t n = 8192;
    CVec x(n);
    const double f0 = 64.0 * fs / 1024.0;
    for (std::size_t k = 0; k < n; ++k) x[k] = std::polar(2.0, kTwoPi * f0 * static_cast<double>(k) / fs);
    const auto p = psd(x, fs, 1024);
    std::size_t peak = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i].density > p[peak].density) peak = i;
    CHECK(p[peak].frequency == doctest::Approx(f0));
    double total = 0.0;
    for (const auto& pt : p) total += pt.density * fs / 1024.0;
    CHECK(total == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("PSD argument checks") {
    CVec x(100);
    CHECK_THROWS(psd(x, 1.0, 48));
    CHECK_THROWS(psd(x, 1.0, 128));
}

TEST_CASE("rational approximation") {
    CHECK(rational_approx(1.5) == std::optional<std::pair<int, int>>({3, 2}));
    CHECK(rational_approx(0.25) == std::optional<std::pair<int, int>>({1, 4}));
    CHECK_FALSE(rational_approx(kPi).has_value());
}

TEST_CASE("resampling a periodic tone reproduces it at the new rate") {
    const std::size_t n = 1200;
    const double cycles = 25.0;
    CVec x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = std::polar(1.0, kTwoPi * cycles * static_cast<double>(k) / n);
    for (auto [up, down] : {std::pair{2, 1}, std::pair{3, 4}, std::pair{5, 3}}) {
        const CVec y = resample(x, up, down);
        const std::size_t m = (n * static_cast<std::size_t>(up) + static_cast<std::size_t>(down) - 1) /
                              static_cast<std::size_t>(down);
        REQUIRE(y.size() == m);
        double err = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const cplx ref = std::polar(1.0, kTwoPi * cycles * static_cast<double>(k) * down / (up * static_cast<double>(n)));
            err = std::max(err, std::abs(y[k] - ref));
        }
        CHECK(err < 1e-3);
    }
}

TEST_CASE("resampling a signal updates the rate and rejects irrational ratios") {
    const DualPolSignal s = noise_signal(256, 2, 10e9);
    const DualPolSignal r = resample(s, 20e9);
    CHECK(r.sample_rate() == 20e9);
    CHECK(r.size() == 512);
    CHECK_THROWS(resample(s, 10e9 * kPi));
}
