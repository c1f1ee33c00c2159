// pmcsh: run a link scenario or a parameter sweep and write its artifacts.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pmcsh/report.hpp"
#include "pmcsh/scenario.hpp"

using namespace pmcsh;

namespace {

std::filesystem::path output_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("PMCSH_OUT"); env && *env) return env;
    return "pmcsh_out";
}

sim::Scenario load(const std::string& config, const std::string& preset_name, const std::optional<std::uint64_t>& seed) {
    std::optional<std::string> preset_override;
    if (!preset_name.empty()) preset_override = preset_name;
    sim::Scenario s = config.empty() ? sim::preset(preset_override.value_or("sim50g"))
                                     : sim::parse_config(config, preset_override);
    if (seed) s.seed = *seed;
    sim::validate(s);
    return s;
}

RVec parse_values(const std::string& text) {
    RVec out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("bad sweep value '" + item + "'");
        }
    }
    return out;
}

void print_summary(const sim::LinkReport& r) {
    std::printf("ber %s  evm_db %s  extinction_db %s -> %s  iterations %zu  converged %s\n",
                sim::fmt_num(r.metrics.ber).c_str(), sim::fmt_num(r.metrics.evm_db).c_str(),
                sim::fmt_num(r.extinction_initial_db).c_str(), sim::fmt_num(r.extinction_final_db).c_str(),
                r.iterations, r.converged ? "yes" : "no");
    for (const auto& f : r.files) std::printf("wrote %s\n", f.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PMC self-homodyne link simulator"};
    app.require_subcommand(0, 1);

    bool print_defaults_flag = false;
    std::string defaults_preset;
    app.add_flag("--print-defaults", print_defaults_flag, "Print every config key with its default value");

    std::string config;
    std::string preset_name;
    std::optional<std::uint64_t> seed;
    std::string out;

    auto* run = app.add_subcommand("run", "Run one scenario");
    run->add_option("--config", config, "Config file of key = value lines");
    run->add_option("--preset", preset_name, "Base preset")->check(CLI::IsMember(sim::preset_names()));
    run->add_option("--seed", seed, "Override run.seed");
    run->add_option("--out", out, "Output directory (else $PMCSH_OUT, else ./pmcsh_out)");

    std::string axis;
    std::string values;
    auto* sw = app.add_subcommand("sweep", "Sweep one parameter");
    sw->add_option("--axis", axis, "osnr | baud | drift_rate | length")->required();
    sw->add_option("--values", values, "Comma-separated values")->required();
    sw->add_option("--config", config, "Config file of key = value lines");
    sw->add_option("--preset", preset_name, "Base preset")->check(CLI::IsMember(sim::preset_names()));
    sw->add_option("--seed", seed, "Override run.seed");
    sw->add_option("--out", out, "Output directory (else $PMCSH_OUT, else ./pmcsh_out)");

    auto* pd = app.add_subcommand("print-defaults", "Print every config key with its default value");
    pd->add_option("--preset", defaults_preset, "Preset to print")->check(CLI::IsMember(sim::preset_names()));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (print_defaults_flag || pd->parsed()) {
            std::cout << sim::dump_config(sim::preset(defaults_preset.empty() ? "sim50g" : defaults_preset));
            return 0;
        }
        if (run->parsed()) {
            const sim::Scenario s = load(config, preset_name, seed);
            print_summary(sim::run_scenario(s, output_dir(out)));
            return 0;
        }
        if (sw->parsed()) {
            const sim::Scenario s = load(config, preset_name, seed);
            const auto a = sim::parse_axis(axis);
            const auto dir = output_dir(out);
            const auto points = sim::sweep(s, a, parse_values(values), dir);
            std::size_t failed = 0;
            for (const auto& p : points) {
                if (p.report) {
                    std::printf("%s = %s  ber %s  ext_db %s  duty_10db %s\n", sim::axis_name(a).c_str(),
                                sim::fmt_num(p.value).c_str(), sim::fmt_num(p.report->metrics.ber).c_str(),
                                sim::fmt_num(p.report->extinction_final_db).c_str(),
                                sim::fmt_num(p.report->duty_10db).c_str());
                } else {
                    ++failed;
                    std::printf("%s = %s  failed: %s\n", sim::axis_name(a).c_str(), sim::fmt_num(p.value).c_str(),
                                p.error.c_str());
                }
            }
            std::printf("wrote %s\n", (dir / "sweep.csv").string().c_str());
            return failed == points.size() ? 1 : 0;
        }
        std::cerr << app.help();
        return 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
