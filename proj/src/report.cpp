#include "pmcsh/report.hpp"

#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace pmcsh::sim {

std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

StagedFiles::StagedFiles(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error("cannot create output directory '" + dir_.string() + "': " + ec.message());
}

StagedFiles::~StagedFiles() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& [tmp, final_path] : staged_) std::filesystem::remove(tmp, ec);
}

void StagedFiles::add(const std::string& name, const std::string& content) {
    const auto final_path = dir_ / name;
    auto tmp = final_path;
    tmp += ".partial";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    staged_.emplace_back(tmp, final_path);
    out << content;
    out.close();
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
}

std::vector<std::filesystem::path> StagedFiles::commit() {
    std::vector<std::filesystem::path> done;
    for (const auto& [tmp, final_path] : staged_) {
        std::error_code ec;
        std::filesystem::rename(tmp, final_path, ec);
        if (ec) {
            for (const auto& p : done) std::filesystem::remove(p, ec);
            throw Error("cannot move '" + tmp.string() + "' into place");
        }
        done.push_back(final_path);
    }
    committed_ = true;
    return done;
}

std::string constellation_csv(const CVec& pre, const CVec& post) {
    std::string out = "symbol,pre_i,pre_q,post_i,post_q\n";
    for (std::size_t k = 0; k < pre.size(); ++k) {
        out += std::to_string(k) + "," + fmt_num(pre[k].real()) + "," + fmt_num(pre[k].imag()) + ",";
        if (k < post.size()) out += fmt_num(post[k].real()) + "," + fmt_num(post[k].imag());
        else out += ",";
        out += "\n";
    }
    return out;
}

std::string spectra_csv(const dsp::SpectrumReport& before, const dsp::SpectrumReport& after) {
    std::string out = "freq_hz,psd_x_before,psd_y_before,psd_x_after,psd_y_after\n";
    for (std::size_t k = 0; k < before.x.psd.size(); ++k) {
        out += fmt_num(before.x.psd[k].frequency) + "," + fmt_num(before.x.psd[k].density) + "," +
               fmt_num(before.y.psd[k].density) + "," + fmt_num(after.x.psd[k].density) + "," +
               fmt_num(after.y.psd[k].density) + "\n";
    }
    return out;
}

std::string trace_csv(const ctl::ControllerTrace& trace, std::size_t plates) {
    std::string out = "iter,time_s,monitor_mw,ext_db";
    for (std::size_t i = 1; i <= plates; ++i) out += ",phi" + std::to_string(i);
    out += "\n";
    for (const auto& r : trace.rows) {
        out += std::to_string(r.iter) + "," + fmt_num(r.time_s) + "," + fmt_num(r.monitor_mw) + "," +
               fmt_num(r.extinction_db);
        for (const double phi : r.retardances) out += "," + fmt_num(phi);
        out += "\n";
    }
    return out;
}

namespace {

nlohmann::json metrics_json(const dsp::Metrics& m) {
    return {{"ber", m.ber},
            {"evm_db", m.evm_db},
            {"snr_est_db", m.snr_est_db},
            {"counted_bits", m.counted_bits},
            {"error_bits", m.error_bits}};
}

nlohmann::json branch_json(const BranchSummary& b) {
    return {{"line_mw", b.line_mw}, {"wideband_mw", b.wideband_mw}, {"line_to_wideband_db", b.line_to_wideband_db}};
}

nlohmann::json spectrum_json(const SpectrumSummary& s) { return {{"x", branch_json(s.x)}, {"y", branch_json(s.y)}}; }

}  // namespace

std::string report_json(const Scenario& s, const LinkReport& r) {
    nlohmann::json j;
    j["preset"] = s.preset;
    j["seed"] = s.seed;
    j["metrics"] = metrics_json(r.metrics);
    j["bypass"] = metrics_json(r.bypass);
    j["equalized"] = r.equalized ? metrics_json(*r.equalized) : nlohmann::json();
    j["extinction_initial_db"] = r.extinction_initial_db;
    j["extinction_final_db"] = r.extinction_final_db;
    j["carrier_lo_fraction"] = r.carrier_lo_fraction;
    j["phase_drift_rad_per_symbol"] = r.phase_drift_rad_per_symbol;
    j["controller"] = {{"iterations", r.iterations},
                       {"converged", r.converged},
                       {"settled_at", r.settled_at ? nlohmann::json(*r.settled_at) : nlohmann::json()},
                       {"diverged", r.diverged},
                       {"reset_events", r.reset_events},
                       {"duty_10db", r.duty_10db}};
    j["spectrum_before"] = spectrum_json(r.spectrum_before);
    j["spectrum_after"] = spectrum_json(r.spectrum_after);
    j["sync"] = {{"phase", r.sync.phase},
                 {"offset", r.sync.offset},
                 {"conjugated", r.sync.conjugated},
                 {"peak_ratio", r.sync.peak_ratio}};
    nlohmann::json files = nlohmann::json::array();
    for (const auto& f : r.files) files.push_back(f.filename().string());
    j["files"] = files;
    return j.dump() + "\n";
}

std::string sweep_csv(SweepAxis axis, const std::vector<SweepPoint>& points) {
    std::string out = "index,axis,value,seed,ber,evm_db,ext_final_db,duty_10db,converged,error\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        out += std::to_string(i) + "," + axis_name(axis) + "," + fmt_num(p.value) + "," + std::to_string(p.seed) + ",";
        if (p.report) {
            const auto& r = *p.report;
            out += fmt_num(r.metrics.ber) + "," + fmt_num(r.metrics.evm_db) + "," + fmt_num(r.extinction_final_db) +
                   "," + fmt_num(r.duty_10db) + "," + (r.converged ? "1" : "0") + ",";
        } else {
            std::string msg = p.error;
            for (auto& c : msg)
                if (c == ',' || c == '\n' || c == '"') c = ' ';
            out += ",,,,," + msg;
        }
        out += "\n";
    }
    return out;
}

}  // namespace pmcsh::sim
