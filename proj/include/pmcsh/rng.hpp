#pragma once

// Counter-based random numbers with named, independent streams.
//
// Every noise source asks the run's Rng for its own stream by name. A stream
// is Philox4x32-10 keyed by the 64-bit seed, with the FNV-1a hash of the
// stream name in the upper half of the counter. Adding a new noise source
// therefore never shifts the samples drawn by existing ones.

#include <array>
#include <cstdint>
#include <string_view>

#include "pmcsh/common.hpp"

namespace pmcsh {

std::uint64_t fnv1a64(std::string_view text);

/// Philox4x32 with 10 rounds; exposed for the known-answer test.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t next_u64();
    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform();
    /// Standard normal via Box-Muller (the second variate is cached).
    double gaussian();
    /// Circular complex Gaussian with E|z|^2 = variance.
    cplx complex_gaussian(double variance);

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_id_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }
    RngStream stream(std::string_view name) const { return RngStream(seed_, fnv1a64(name)); }
    /// Child generator with an independent seed, e.g. one per sweep point.
    Rng fork(std::string_view name) const;

private:
    std::uint64_t seed_;
};

}  // namespace pmcsh
