#pragma once

// Scenario description, config parsing, end-to-end runs and sweeps.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "pmcsh/channel.hpp"
#include "pmcsh/dsp.hpp"
#include "pmcsh/polctl.hpp"
#include "pmcsh/rxfront.hpp"
#include "pmcsh/txchain.hpp"

namespace pmcsh::sim {

enum class ControlMode { Adaptive, ManualAngles, Off };
enum class RotationMode { Random, Identity, Azimuth };
enum class DriftMode { RandomWalk, Winding };

struct Scenario {
    std::string preset = "sim50g";
    tx::TxConfig tx;
    tx::LaserParams laser;
    tx::ModulatorParams mod;
    channel::FiberParams fiber;
    double osnr_db = 25.0;
    RotationMode rotation = RotationMode::Random;
    double rotation_azimuth_deg = 45.0;
    DriftMode drift_mode = DriftMode::RandomWalk;
    std::array<double, 3> winding_axis{0.0, 1.0, 0.0};
    rx::ReceiverParams rx;
    RVec isi_taps;
    ctl::ControllerParams ctl;
    ControlMode control = ControlMode::Adaptive;
    std::size_t epc_plates = 4;
    RVec manual_angles;
    double epc_volts_per_rad = 1.0;
    dsp::EqualizerConfig eq;
    std::uint64_t seed = 1;
    std::size_t n_symbols = 16384;
    bool bypass_dsp = false;
    std::size_t psd_segment = 4096;
};

/// Cross-field checks plus every module's own parameter validation.
void validate(const Scenario& s);

const std::vector<std::string>& preset_names();
/// Preset source text (annotated key = value lines).
const std::string& preset_text(const std::string& name);
Scenario preset(const std::string& name);

/// Applies `key = value` lines on top of `base`. Unknown keys and bad values
/// throw ConfigError naming the line.
Scenario apply_config_text(Scenario base, const std::string& text, const std::string& origin = "<text>");

/// Reads a config file. The base preset is `preset_override` if given, else a
/// `preset = name` line in the file, else sim50g.
Scenario parse_config(const std::filesystem::path& path, const std::optional<std::string>& preset_override = {});

/// Every key with its current value, one per line, in parseable form.
std::string dump_config(const Scenario& s);

void set_key(Scenario& s, const std::string& key, const std::string& value);

struct BranchSummary {
    double line_mw;
    double wideband_mw;
    double line_to_wideband_db;
};

struct SpectrumSummary {
    BranchSummary x;  // signal-port branch
    BranchSummary y;  // LO branch
};

struct LinkReport {
    dsp::Metrics metrics;  // equalized when the equalizers ran, else bypass
    dsp::Metrics bypass;
    std::optional<dsp::Metrics> equalized;
    double extinction_initial_db = 0.0;
    double extinction_final_db = 0.0;
    double carrier_lo_fraction = 0.0;
    double phase_drift_rad_per_symbol = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::optional<std::size_t> settled_at;
    bool diverged = false;
    std::size_t reset_events = 0;
    double duty_10db = 0.0;
    SpectrumSummary spectrum_before;
    SpectrumSummary spectrum_after;
    dsp::SyncResult sync;
    ctl::ControllerTrace trace;
    std::vector<std::filesystem::path> files;
};

/// Runs the whole link. When `out_dir` is set, writes constellation.csv,
/// spectra.csv, ctl_trace.csv and report.json there (all or nothing).
LinkReport run_scenario(const Scenario& s, const std::optional<std::filesystem::path>& out_dir = {});

enum class SweepAxis { Osnr, Baud, DriftRate, Length };
SweepAxis parse_axis(const std::string& name);
std::string axis_name(SweepAxis a);

struct SweepPoint {
    double value;
    std::uint64_t seed;
    std::optional<LinkReport> report;
    std::string error;
};

/// One run per value. Point i uses the seed forked from the base seed as
/// "sweep/<i>". Failures are recorded, not thrown. Writes sweep.csv when
/// `out_dir` is set, with each point's artifacts under <axis>_<i>/.
std::vector<SweepPoint> sweep(const Scenario& s, SweepAxis axis, const RVec& values,
                              const std::optional<std::filesystem::path>& out_dir = {});

}  // namespace pmcsh::sim
