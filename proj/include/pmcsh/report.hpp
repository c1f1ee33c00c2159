#pragma once

// Artifact formatting and all-or-nothing file output.

#include <filesystem>
#include <string>
#include <vector>

#include "pmcsh/scenario.hpp"

namespace pmcsh::sim {

/// printf "%.17g": round-trips every double, locale-independent digits.
std::string fmt_num(double v);

/// Files are written under temporary names and renamed into place by
/// commit(). Anything not committed is removed on destruction.
class StagedFiles {
public:
    explicit StagedFiles(std::filesystem::path dir);
    ~StagedFiles();
    StagedFiles(const StagedFiles&) = delete;
    StagedFiles& operator=(const StagedFiles&) = delete;

    void add(const std::string& name, const std::string& content);
    std::vector<std::filesystem::path> commit();

private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::filesystem::path, std::filesystem::path>> staged_;
    bool committed_ = false;
};

std::string constellation_csv(const CVec& pre, const CVec& post);
std::string spectra_csv(const dsp::SpectrumReport& before, const dsp::SpectrumReport& after);
std::string trace_csv(const ctl::ControllerTrace& trace, std::size_t plates);
std::string report_json(const Scenario& s, const LinkReport& r);
std::string sweep_csv(SweepAxis axis, const std::vector<SweepPoint>& points);

}  // namespace pmcsh::sim
