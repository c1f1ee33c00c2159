#include <cmath>

#include "pmcsh/report.hpp"
#include "pmcsh/scenario.hpp"

namespace pmcsh::sim {
namespace {

JonesMatrix static_rotation(const Scenario& s, const Rng& rng) {
    switch (s.rotation) {
        case RotationMode::Identity:
            return JonesMatrix::identity();
        case RotationMode::Azimuth:
            return JonesMatrix::rotation(s.rotation_azimuth_deg * kPi / 180.0);
        case RotationMode::Random:
            break;
    }
    RngStream r = rng.stream("channel.static");
    return channel::random_rotation(r);
}

channel::SopTrajectory trajectory(const Scenario& s, const Rng& rng) {
    const double dt = 1.0 / s.ctl.loop_rate_hz;
    const std::size_t steps = s.ctl.max_iters;
    if (s.fiber.sop_drift_rad_s == 0.0) return channel::SopTrajectory::still(dt, steps);
    if (s.drift_mode == DriftMode::Winding) {
        std::array<double, 3> rates{};
        for (int i = 0; i < 3; ++i) rates[i] = s.fiber.sop_drift_rad_s * s.winding_axis[i];
        return channel::SopTrajectory::winding(rates, dt, steps);
    }
    RngStream r = rng.stream("channel.drift");
    return channel::SopTrajectory::random_walk(s.fiber.sop_drift_rad_s, dt, steps, r);
}

SpectrumSummary summarize(const dsp::SpectrumReport& r) {
    auto one = [](const dsp::BranchSpectrum& b) {
        return BranchSummary{b.line_mw, b.wideband_mw, b.line_to_wideband_db};
    };
    return {one(r.x), one(r.y)};
}

double branch_extinction(const Coherency& c, const JonesMatrix& w) {
    return ctl::extinction(c.y_power_after(w), c.x_power_after(w));
}

}  // namespace

LinkReport run_scenario(const Scenario& s, const std::optional<std::filesystem::path>& out_dir) {
    validate(s);
    const Rng rng(s.seed);
    const double wavelength = s.fiber.ref_wavelength_m;

    const tx::TxOutput txo = tx::build_tx(s.tx, s.laser, s.mod, s.n_symbols, wavelength, rng);

    RngStream pmd_rng = rng.stream("channel.pmd");
    const channel::PmdSection pmd = channel::draw_pmd(s.fiber, pmd_rng);
    const JonesMatrix rot = static_rotation(s, rng);
    const DualPolSignal clean = channel::propagate(txo.field, s.fiber, rot, pmd);
    RngStream ase_rng = rng.stream("channel.ase");
    const DualPolSignal received = channel::load_osnr(clean, s.osnr_db, ase_rng);

    const ctl::LinkModel link{coherency(received), coherency(clean), s.rx};
    const channel::SopTrajectory traj = trajectory(s, rng);

    rx::EpcState initial = rx::EpcState::alternating(s.epc_plates);
    initial.volts_per_rad = s.epc_volts_per_rad;
    if (s.control == ControlMode::ManualAngles) initial.retardances = s.manual_angles;

    LinkReport rep;
    const JonesMatrix w_before = rx::epc_jones(initial) * channel::drift_step(traj, 0.0);
    JonesMatrix w_after = w_before;
    if (s.control == ControlMode::Adaptive) {
        rep.trace = ctl::run_loop(link, s.ctl, traj, initial, rng);
        w_after = rx::epc_jones(rep.trace.final_state) * rep.trace.final_drift;
        rep.iterations = rep.trace.rows.back().iter;
        rep.converged = rep.trace.converged;
        rep.settled_at = rep.trace.settled_at;
        rep.diverged = rep.trace.diverged;
        rep.reset_events = rep.trace.reset_events;
        rep.duty_10db = ctl::extinction_duty(rep.trace, rep.settled_at.value_or(0), 10.0);
    } else {
        const double ext = branch_extinction(link.noiseless, w_before);
        rep.trace.rows.push_back({0, 0.0, ctl::monitored_power(link, w_before), ext, initial.retardances});
        rep.trace.final_state = initial;
        rep.trace.final_drift = channel::drift_step(traj, 0.0);
        rep.duty_10db = ext >= 10.0 ? 1.0 : 0.0;
    }
    rep.extinction_initial_db = branch_extinction(link.noiseless, w_before);
    rep.extinction_final_db = branch_extinction(link.noiseless, w_after);

    // Where the unmodulated carrier ends up once the controller is done.
    {
        const DualPolSignal carrier_only =
            txo.field.with_samples(CVec(txo.field.size(), cplx{0.0, 0.0}), txo.field.y());
        const Coherency c = coherency(channel::propagate(carrier_only, s.fiber, rot, pmd));
        rep.carrier_lo_fraction = c.y_power_after(w_after) / c.total();
    }

    const double signal_bw = s.tx.baud * (1.0 + s.tx.rolloff);
    const DualPolSignal before = apply_jones(received, w_before);
    const DualPolSignal after = apply_jones(received, w_after);
    const dsp::SpectrumReport spec_before = dsp::spectrum_report(before, s.psd_segment, signal_bw);
    const dsp::SpectrumReport spec_after = dsp::spectrum_report(after, s.psd_segment, signal_bw);
    rep.spectrum_before = summarize(spec_before);
    rep.spectrum_after = summarize(spec_after);

    const auto [signal_branch, lo_branch] = rx::pbs_split(after);
    const rx::TapOutput tapped = rx::tap(signal_branch, s.rx.tap_ratio);
    rx::IqWaveforms iq = rx::hybrid_bpd(tapped.main, lo_branch, after.sample_rate(), s.rx, rng);
    if (!s.isi_taps.empty()) iq = dsp::apply_isi(iq, s.isi_taps, s.tx.samples_per_symbol);

    const dsp::FrameResult frame =
        dsp::process_frame(iq, s.tx, s.eq, txo.symbols, txo.payload_bits, s.bypass_dsp);
    rep.bypass = frame.bypass;
    rep.equalized = frame.equalized;
    rep.metrics = frame.equalized.value_or(frame.bypass);
    rep.sync = frame.sync_info;
    rep.phase_drift_rad_per_symbol = frame.phase_drift_rad_per_symbol;

    if (out_dir) {
        StagedFiles files(*out_dir);
        for (const char* name : {"constellation.csv", "spectra.csv", "ctl_trace.csv", "report.json"})
            rep.files.push_back(*out_dir / name);
        files.add("constellation.csv", constellation_csv(frame.pre_eq, frame.post_eq));
        files.add("spectra.csv", spectra_csv(spec_before, spec_after));
        files.add("ctl_trace.csv", trace_csv(rep.trace, s.epc_plates));
        files.add("report.json", report_json(s, rep));
        rep.files = files.commit();
    }
    return rep;
}

SweepAxis parse_axis(const std::string& name) {
    if (name == "osnr") return SweepAxis::Osnr;
    if (name == "baud") return SweepAxis::Baud;
    if (name == "drift_rate") return SweepAxis::DriftRate;
    if (name == "length") return SweepAxis::Length;
    throw ConfigError("unknown sweep axis '" + name + "' (osnr|baud|drift_rate|length)");
}

std::string axis_name(SweepAxis a) {
    switch (a) {
        case SweepAxis::Osnr: return "osnr";
        case SweepAxis::Baud: return "baud";
        case SweepAxis::DriftRate: return "drift_rate";
        case SweepAxis::Length: return "length";
    }
    return "?";
}

std::vector<SweepPoint> sweep(const Scenario& s, SweepAxis axis, const RVec& values,
                              const std::optional<std::filesystem::path>& out_dir) {
    if (values.size() < 2) throw ConfigError("a sweep needs at least two values");
    validate(s);
    const Rng base(s.seed);
    std::vector<SweepPoint> points;
    for (std::size_t i = 0; i < values.size(); ++i) {
        Scenario p = s;
        switch (axis) {
            case SweepAxis::Osnr: p.osnr_db = values[i]; break;
            case SweepAxis::Baud: p.tx.baud = values[i]; break;
            case SweepAxis::DriftRate: p.fiber.sop_drift_rad_s = values[i]; break;
            case SweepAxis::Length: p.fiber.length_km = values[i]; break;
        }
        p.seed = base.fork("sweep/" + std::to_string(i)).seed();
        SweepPoint pt{values[i], p.seed, std::nullopt, {}};
        try {
            std::optional<std::filesystem::path> dir;
            if (out_dir) dir = *out_dir / (axis_name(axis) + "_" + std::to_string(i));
            pt.report = run_scenario(p, dir);
        } catch (const std::exception& e) {
            pt.error = e.what();
        }
        points.push_back(std::move(pt));
    }
    if (out_dir) {
        StagedFiles files(*out_dir);
        files.add("sweep.csv", sweep_csv(axis, points));
        files.commit();
    }
    return points;
}

}  // namespace pmcsh::sim
