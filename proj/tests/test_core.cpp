#include <cmath>
#include <set>

#include "doctest.h"
#include "pmcsh/fft.hpp"
#include "pmcsh/rng.hpp"

using namespace pmcsh;

namespace {

CVec naive_dft(const CVec& x, int sign) {
    const std::size_t n = x.size();
    CVec y(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc{0.0, 0.0};
        for (std::size_t m = 0; m < n; ++m)
            acc += x[m] * std::polar(1.0, sign * kTwoPi * static_cast<double>(k * m) / static_cast<double>(n));
        y[k] = acc;
    }
    return y;
}

}  // namespace

TEST_CASE("fft matches a direct DFT for odd and even sizes") {
    RngStream r(7, 1);
    for (std::size_t n : {1u, 12u, 17u, 64u}) {
        CVec x(n);
        for (auto& v : x) v = r.complex_gaussian(1.0);
        const CVec ref = naive_dft(x, -1);
        const CVec got = fft(x);
        for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(got[k] - ref[k]) < 1e-10 * static_cast<double>(n));
        const CVec back = ifft(got);
        for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(back[k] - x[k]) < 1e-12 * static_cast<double>(n));
    }
}

TEST_CASE("bin frequencies follow natural FFT order") {
    CHECK(bin_frequency(0, 8, 8.0) == 0.0);
    CHECK(bin_frequency(3, 8, 8.0) == 3.0);
    CHECK(bin_frequency(4, 8, 8.0) == -4.0);
    CHECK(bin_frequency(7, 8, 8.0) == -1.0);
}

TEST_CASE("circular filter equals direct circular convolution") {
    RngStream r(3, 3);
    CVec x(20);
    for (auto& v : x) v = r.complex_gaussian(1.0);
    const RVec h{0.5, -0.25, 1.0, 0.125, 0.3};
    const std::size_t center = 2;
    const CVec got = circular_filter(x, h, center);
    for (std::size_t k = 0; k < x.size(); ++k) {
        cplx acc{0.0, 0.0};
        for (std::size_t i = 0; i < h.size(); ++i) {
            const long long src = static_cast<long long>(k) - static_cast<long long>(i) + static_cast<long long>(center);
            acc += h[i] * x[static_cast<std::size_t>((src % 20 + 20) % 20)];
        }
        CHECK(std::abs(got[k] - acc) < 1e-12);
    }
}

TEST_CASE("philox4x32-10 known answers") {
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
}

TEST_CASE("fnv1a64 reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("named streams are reproducible and independent") {
    const Rng rng(42);
    RngStream a1 = rng.stream("alpha");
    RngStream a2 = rng.stream("alpha");
    RngStream b = rng.stream("beta");
    int same = 0;
    for (int i = 0; i < 100; ++i) {
        const auto va = a1.next_u64();
        CHECK(va == a2.next_u64());
        if (va == b.next_u64()) ++same;
    }
    CHECK(same == 0);
    CHECK(rng.fork("x").seed() != rng.fork("y").seed());
    CHECK(rng.fork("x").seed() == Rng(42).fork("x").seed());
}

TEST_CASE("uniform and gaussian moments") {
    RngStream r(1, 9);
    const int n = 200000;
    double su = 0.0, sg = 0.0, sg2 = 0.0, sg4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        su += u;
        const double g = r.gaussian();
        sg += g;
        sg2 += g * g;
        sg4 += g * g * g * g;
    }
    CHECK(std::abs(su / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
    CHECK(std::abs(sg / n) < 5.0 / std::sqrt(n));
    CHECK(std::abs(sg2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(sg4 / n - 3.0) < 5.0 * std::sqrt(96.0 / n));

    double power = 0.0;
    for (int i = 0; i < n; ++i) power += std::norm(r.complex_gaussian(2.5));
    CHECK(power / n == doctest::Approx(2.5).epsilon(0.02));
}
