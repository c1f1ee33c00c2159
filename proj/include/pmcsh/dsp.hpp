#pragma once

// Offline receive processing: matched filter and preamble sync, static phase
// alignment, RDE and DFE equalizers, demapping, BER/EVM, spectrum summary.

#include <cstdint>
#include <optional>
#include <span>

#include "pmcsh/field.hpp"
#include "pmcsh/rxfront.hpp"
#include "pmcsh/txchain.hpp"

namespace pmcsh::dsp {

struct EqualizerConfig {
    int ff_taps = 15;
    int fb_taps = 5;
    double mu_rde = 1e-3;
    double mu_dfe = 1e-3;
    int train_len = 1000;
};

void validate(const EqualizerConfig& c);

/// Squared ring radii of the unit-power constellation.
RVec rde_radii(tx::Format format);

struct Metrics {
    double ber = 0.0;
    double evm_db = 0.0;
    double snr_est_db = 0.0;
    std::uint64_t counted_bits = 0;
    std::uint64_t error_bits = 0;
};

struct SyncResult {
    CVec symbols;        // one per symbol, rotated so the preamble starts at index 0
    std::size_t phase;   // winning sample phase within a symbol
    std::size_t offset;  // symbol index where the preamble was found
    bool conjugated;
    double peak_ratio;   // correlation peak over the off-peak RMS
};

/// RRC matched filter; the sample phase and symbol offset maximizing the
/// preamble correlation are chosen. Throws "sync failed" when the peak is
/// under 5x the RMS of the off-peak correlation.
SyncResult matched_filter_downsample(const rx::IqWaveforms& iq, const tx::TxConfig& cfg);

struct Alignment {
    CVec symbols;
    double phase_rad;
    double gain;
    bool conjugated;
};

/// One least-squares complex gain from the known preamble (leading symbols),
/// tried with and without conjugation; applied to the whole frame.
Alignment phase_align(std::span<const cplx> symbols, std::span<const cplx> preamble);

cplx slice(cplx y, tx::Format format);

/// Radius-directed feedforward equalizer; e = R^2_nearest - |y|^2.
CVec rde_equalize(std::span<const cplx> symbols, const EqualizerConfig& cfg, tx::Format format);

struct DfeOutput {
    CVec soft;
    CVec decisions;
};

/// Feedforward + decision-feedback LMS. The first min(train_len, |reference|)
/// symbols adapt against `reference`, the rest against hard decisions.
DfeOutput dfe_equalize(std::span<const cplx> symbols, const EqualizerConfig& cfg, tx::Format format,
                       std::span<const cplx> reference);

/// Hard decisions against the known bits; EVM after a least-squares real gain.
Metrics demap_count(std::span<const cplx> symbols, std::span<const std::uint8_t> reference_bits, tx::Format format);

/// Least-squares slope (rad/symbol) of the unwrapped phase of y_k conj(ref_k).
double phase_drift(std::span<const cplx> symbols, std::span<const cplx> reference);

/// Gray slicer output as bits, first bit of each symbol first.
tx::Bits demap_bits(std::span<const cplx> symbols, tx::Format format);

struct BranchSpectrum {
    std::vector<PsdPoint> psd;
    double line_mw = 0.0;      // narrow line at DC above the local continuum
    double wideband_mw = 0.0;  // everything else inside the signal band
    double line_to_wideband_db = 0.0;
};

struct SpectrumReport {
    BranchSpectrum x;
    BranchSpectrum y;
};

BranchSpectrum branch_spectrum(std::span<const cplx> samples, double rate, std::size_t segment_len,
                               double signal_bw_hz);
SpectrumReport spectrum_report(const DualPolSignal& sig, std::size_t segment_len, double signal_bw_hz);

/// Symbol-spaced FIR on the complex received waveform, used to emulate
/// electrical ISI in tests.
rx::IqWaveforms apply_isi(const rx::IqWaveforms& iq, std::span<const double> taps, int samples_per_symbol);

struct FrameResult {
    Metrics bypass;
    std::optional<Metrics> equalized;
    CVec pre_eq;   // payload after sync + phase alignment
    CVec post_eq;  // payload after RDE + DFE (empty in bypass mode)
    double phase_drift_rad_per_symbol = 0.0;  // of pre_eq against the sent payload
    SyncResult sync_info;
};

/// Complete receive chain for one frame.
FrameResult process_frame(const rx::IqWaveforms& iq, const tx::TxConfig& cfg, const EqualizerConfig& eq,
                          std::span<const cplx> tx_symbols, std::span<const std::uint8_t> payload_bits,
                          bool bypass);

}  // namespace pmcsh::dsp
