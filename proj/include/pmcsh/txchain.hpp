#pragma once

// Transmitter: laser, PBS split, symbol mapping, RRC shaping, IQ modulator,
// and recombination into the polarization-multiplexed-carrier field.

#include <cstdint>
#include <span>

#include "pmcsh/field.hpp"
#include "pmcsh/rng.hpp"

namespace pmcsh::tx {

using Bits = std::vector<std::uint8_t>;

enum class Format { Qpsk, Qam16 };
enum class Transfer { IdealLinear, MzmSine };

inline int bits_per_symbol(Format f) { return f == Format::Qpsk ? 2 : 4; }

struct LaserParams {
    double power_mw = 10.0;
    double linewidth_hz = 0.0;
    double launch_azimuth_deg = 45.0;
};

struct ModulatorParams {
    double insertion_loss_db = 12.0;
    double v_pi = 3.5;
    double drive_vpp = 0.35;
    Transfer transfer = Transfer::IdealLinear;
};

struct TxConfig {
    Format format = Format::Qpsk;
    double baud = 50e9;
    double rolloff = 0.1;
    int samples_per_symbol = 16;
    int prbs_order = 15;
    int preamble_len = 256;

    double sample_rate() const { return baud * samples_per_symbol; }
};

void validate(const LaserParams& p);
void validate(const ModulatorParams& p);
void validate(const TxConfig& c);

inline constexpr int kRrcSpanSymbols = 64;

/// Fibonacci LFSR for x^15+x^14+1 or x^23+x^18+1.
class Prbs {
public:
    Prbs(int order, std::uint32_t initial_state);
    std::uint8_t next();
    int order() const { return order_; }

private:
    int order_;
    int tap_;
    std::uint32_t mask_;
    std::uint32_t state_;
};

Bits gen_bits(const Rng& rng, std::size_t count, int prbs_order);

/// Gray-mapped, unit mean power. QPSK: bit 0 -> I sign, bit 1 -> Q sign,
/// 0 means positive. 16-QAM per axis (sign, magnitude): 00 +1, 01 +3, 10 -1, 11 -3.
CVec map_symbols(std::span<const std::uint8_t> bits, Format format);

/// The 2^bps constellation points indexed by the bit pattern (first bit MSB).
CVec constellation(Format format);

/// Known preamble, independent of the run seed.
CVec preamble_symbols(int length);

/// Root-raised-cosine taps over kRrcSpanSymbols symbols, sum of squares = sps
/// (unit energy in symbol-time units), so shaped output has unit mean power.
RVec rrc_taps(double rolloff, int samples_per_symbol, int span_symbols = kRrcSpanSymbols);

/// Impulse train through the RRC filter, circular over the frame, group delay removed.
CVec rrc_shape(std::span<const cplx> symbols, const TxConfig& cfg);

DualPolSignal laser_field(const LaserParams& p, std::size_t n, double rate, double wavelength, RngStream& phase_rng);

CVec iq_modulate(std::span<const cplx> carrier, std::span<const cplx> waveform, const ModulatorParams& p);

struct TxOutput {
    DualPolSignal field;  // x: modulated branch, y: carrier branch
    CVec symbols;         // preamble followed by payload
    Bits payload_bits;
};

TxOutput build_tx(const TxConfig& cfg, const LaserParams& laser, const ModulatorParams& mod,
                  std::size_t n_payload_symbols, double wavelength, const Rng& rng);

}  // namespace pmcsh::tx
