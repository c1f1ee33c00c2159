#include "pmcsh/scenario.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "pmcsh/report.hpp"

namespace pmcsh::sim {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
    errno = 0;
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0' || errno == ERANGE || std::isnan(d))
        throw ConfigError("expected a number, got '" + v + "'");
    return d;
}

long long to_int(const std::string& v) {
    const double d = to_double(v);
    if (!std::isfinite(d) || d != std::floor(d) || std::abs(d) > 9e15)
        throw ConfigError("expected an integer, got '" + v + "'");
    return static_cast<long long>(d);
}

std::size_t to_count(const std::string& v) {
    const long long n = to_int(v);
    if (n < 0) throw ConfigError("expected a non-negative count, got '" + v + "'");
    return static_cast<std::size_t>(n);
}

bool to_bool(const std::string& v) {
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("expected on/off, got '" + v + "'");
}

RVec to_list(const std::string& v) {
    RVec out;
    if (v == "none" || v.empty()) return out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item)));
    return out;
}

std::string list_str(const RVec& v) {
    if (v.empty()) return "none";
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt_num(v[i]);
    return s;
}

template <class E>
E to_enum(const std::string& v, const std::vector<std::pair<const char*, E>>& names) {
    for (const auto& [n, e] : names)
        if (v == n) return e;
    std::string allowed;
    for (const auto& [n, e] : names) allowed += (allowed.empty() ? "" : "|") + std::string(n);
    throw ConfigError("expected one of " + allowed + ", got '" + v + "'");
}

template <class E>
std::string enum_str(E e, const std::vector<std::pair<const char*, E>>& names) {
    for (const auto& [n, v] : names)
        if (v == e) return n;
    return "?";
}

const std::vector<std::pair<const char*, tx::Format>> kFormats = {{"QPSK", tx::Format::Qpsk},
                                                                  {"QAM16", tx::Format::Qam16}};
const std::vector<std::pair<const char*, tx::Transfer>> kTransfers = {{"ideal_linear", tx::Transfer::IdealLinear},
                                                                      {"mzm_sine", tx::Transfer::MzmSine}};
const std::vector<std::pair<const char*, RotationMode>> kRotations = {
    {"random", RotationMode::Random}, {"identity", RotationMode::Identity}, {"azimuth", RotationMode::Azimuth}};
const std::vector<std::pair<const char*, DriftMode>> kDrifts = {{"random_walk", DriftMode::RandomWalk},
                                                                {"winding", DriftMode::Winding}};
const std::vector<std::pair<const char*, ControlMode>> kControls = {
    {"adaptive", ControlMode::Adaptive}, {"manual_angles", ControlMode::ManualAngles}, {"off", ControlMode::Off}};
const std::vector<std::pair<const char*, ctl::GradientMode>> kGradients = {
    {"sequential", ctl::GradientMode::Sequential}, {"spsa", ctl::GradientMode::Spsa}};

struct Key {
    const char* name;
    std::function<void(Scenario&, const std::string&)> set;
    std::function<std::string(const Scenario&)> get;
};

#define NUM_KEY(name, field) \
    Key { name, [](Scenario& s, const std::string& v) { s.field = to_double(v); }, \
          [](const Scenario& s) { return fmt_num(s.field); } }
#define COUNT_KEY(name, field) \
    Key { name, [](Scenario& s, const std::string& v) { s.field = to_count(v); }, \
          [](const Scenario& s) { return std::to_string(s.field); } }
#define INT_KEY(name, field) \
    Key { name, [](Scenario& s, const std::string& v) { s.field = static_cast<int>(to_int(v)); }, \
          [](const Scenario& s) { return std::to_string(s.field); } }
#define BOOL_KEY(name, field) \
    Key { name, [](Scenario& s, const std::string& v) { s.field = to_bool(v); }, \
          [](const Scenario& s) { return std::string(s.field ? "on" : "off"); } }
#define ENUM_KEY(name, field, table) \
    Key { name, [](Scenario& s, const std::string& v) { s.field = to_enum(v, table); }, \
          [](const Scenario& s) { return enum_str(s.field, table); } }
#define LIST_KEY(name, field) \
    Key { name, [](Scenario& s, const std::string& v) { s.field = to_list(v); }, \
          [](const Scenario& s) { return list_str(s.field); } }

const std::vector<Key>& keys() {
    static const std::vector<Key> k = {
        Key{"run.seed", [](Scenario& s, const std::string& v) { s.seed = static_cast<std::uint64_t>(to_count(v)); },
            [](const Scenario& s) { return std::to_string(s.seed); }},
        COUNT_KEY("run.n_symbols", n_symbols),
        BOOL_KEY("run.bypass_dsp", bypass_dsp),
        COUNT_KEY("run.psd_segment", psd_segment),
        ENUM_KEY("tx.format", tx.format, kFormats),
        NUM_KEY("tx.baud", tx.baud),
        NUM_KEY("tx.rolloff", tx.rolloff),
        INT_KEY("tx.samples_per_symbol", tx.samples_per_symbol),
        INT_KEY("tx.prbs_order", tx.prbs_order),
        INT_KEY("tx.preamble_len", tx.preamble_len),
        NUM_KEY("laser.power_mw", laser.power_mw),
        NUM_KEY("laser.linewidth_hz", laser.linewidth_hz),
        NUM_KEY("laser.launch_azimuth_deg", laser.launch_azimuth_deg),
        NUM_KEY("mod.insertion_loss_db", mod.insertion_loss_db),
        NUM_KEY("mod.v_pi", mod.v_pi),
        NUM_KEY("mod.drive_vpp", mod.drive_vpp),
        ENUM_KEY("mod.transfer", mod.transfer, kTransfers),
        NUM_KEY("fiber.length_km", fiber.length_km),
        NUM_KEY("fiber.dispersion_ps_nm_km", fiber.dispersion_ps_nm_km),
        NUM_KEY("fiber.slope_ps_nm2_km", fiber.slope_ps_nm2_km),
        NUM_KEY("fiber.atten_db_km", fiber.atten_db_km),
        Key{"fiber.dgd_mean_ps",
            [](Scenario& s, const std::string& v) {
                if (v == "auto") {
                    s.fiber.dgd_mean_ps.reset();
                } else {
                    s.fiber.dgd_mean_ps = to_double(v);
                }
            },
            [](const Scenario& s) { return s.fiber.dgd_mean_ps ? fmt_num(*s.fiber.dgd_mean_ps) : "auto"; }},
        NUM_KEY("fiber.sop_drift_rad_s", fiber.sop_drift_rad_s),
        NUM_KEY("fiber.ref_wavelength_m", fiber.ref_wavelength_m),
        NUM_KEY("channel.osnr_db", osnr_db),
        ENUM_KEY("channel.rotation", rotation, kRotations),
        NUM_KEY("channel.rotation_azimuth_deg", rotation_azimuth_deg),
        ENUM_KEY("channel.drift", drift_mode, kDrifts),
        Key{"channel.winding_axis",
            [](Scenario& s, const std::string& v) {
                const RVec a = to_list(v);
                if (a.size() != 3) throw ConfigError("expected three comma-separated weights");
                s.winding_axis = {a[0], a[1], a[2]};
            },
            [](const Scenario& s) { return list_str({s.winding_axis.begin(), s.winding_axis.end()}); }},
        NUM_KEY("rx.tap_ratio", rx.tap_ratio),
        NUM_KEY("rx.responsivity_a_w", rx.responsivity),
        NUM_KEY("rx.thermal_noise_a_rthz", rx.thermal_noise_a_rthz),
        BOOL_KEY("rx.shot_noise", rx.shot_noise),
        NUM_KEY("rx.monitor_bw_hz", rx.monitor_bw_hz),
        NUM_KEY("rx.pd_bw_hz", rx.pd_bw_hz),
        LIST_KEY("rx.isi_taps", isi_taps),
        ENUM_KEY("ctl.mode", control, kControls),
        NUM_KEY("ctl.step_mu", ctl.step_mu),
        NUM_KEY("ctl.dither_delta", ctl.dither_delta),
        NUM_KEY("ctl.loop_rate_hz", ctl.loop_rate_hz),
        COUNT_KEY("ctl.max_iters", ctl.max_iters),
        NUM_KEY("ctl.converge_tol_db", ctl.converge_tol_db),
        COUNT_KEY("ctl.window", ctl.window),
        COUNT_KEY("ctl.probe_avg", ctl.probe_avg),
        ENUM_KEY("ctl.gradient", ctl.mode, kGradients),
        COUNT_KEY("ctl.epc_plates", epc_plates),
        LIST_KEY("ctl.manual_angles", manual_angles),
        NUM_KEY("ctl.volts_per_rad", epc_volts_per_rad),
        INT_KEY("eq.ff_taps", eq.ff_taps),
        INT_KEY("eq.fb_taps", eq.fb_taps),
        NUM_KEY("eq.mu_rde", eq.mu_rde),
        NUM_KEY("eq.mu_dfe", eq.mu_dfe),
        INT_KEY("eq.train_len", eq.train_len),
    };
    return k;
}

#undef NUM_KEY
#undef COUNT_KEY
#undef INT_KEY
#undef BOOL_KEY
#undef ENUM_KEY
#undef LIST_KEY

struct Line {
    std::size_t number;
    std::string key;
    std::string value;
};

std::vector<Line> split_lines(const std::string& text, const std::string& origin) {
    std::vector<Line> out;
    std::stringstream ss(text);
    std::string raw;
    std::size_t n = 0;
    while (std::getline(ss, raw)) {
        ++n;
        const auto hash = raw.find('#');
        const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(n) + ": expected 'key = value'");
        out.push_back({n, trim(body.substr(0, eq)), trim(body.substr(eq + 1))});
    }
    return out;
}

}  // namespace

void set_key(Scenario& s, const std::string& key, const std::string& value) {
    for (const auto& k : keys()) {
        if (key == k.name) {
            k.set(s, value);
            return;
        }
    }
    throw ConfigError("unknown key '" + key + "'");
}

Scenario apply_config_text(Scenario base, const std::string& text, const std::string& origin) {
    for (const auto& line : split_lines(text, origin)) {
        if (line.key == "preset") continue;
        try {
            set_key(base, line.key, line.value);
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(line.number) + ": " + e.what());
        }
    }
    return base;
}

Scenario parse_config(const std::filesystem::path& path, const std::optional<std::string>& preset_override) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    std::string base = "sim50g";
    for (const auto& line : split_lines(text, path.string()))
        if (line.key == "preset") base = line.value;
    if (preset_override) base = *preset_override;

    Scenario s = apply_config_text(preset(base), text, path.string());
    validate(s);
    return s;
}

std::string dump_config(const Scenario& s) {
    std::string out = "preset = " + s.preset + "\n";
    for (const auto& k : keys()) out += std::string(k.name) + " = " + k.get(s) + "\n";
    return out;
}

void validate(const Scenario& s) {
    tx::validate(s.tx);
    tx::validate(s.laser);
    tx::validate(s.mod);
    channel::validate(s.fiber);
    rx::validate(s.rx);
    ctl::validate(s.ctl);
    dsp::validate(s.eq);
    if (s.n_symbols == 0) throw ConfigError("run.n_symbols must be > 0");
    if (std::isnan(s.osnr_db)) throw ConfigError("channel.osnr_db must be a number");
    if (s.epc_plates < 1 || s.epc_plates > 16) throw ConfigError("ctl.epc_plates must be in [1, 16]");
    if (s.control == ControlMode::ManualAngles && s.manual_angles.size() != s.epc_plates)
        throw ConfigError("ctl.manual_angles needs one angle per EPC plate");
    if (s.tx.preamble_len <= 0) throw ConfigError("tx.preamble_len must be > 0 for receiver sync");
    const std::size_t total = s.n_symbols + static_cast<std::size_t>(s.tx.preamble_len);
    if (total * static_cast<std::size_t>(s.tx.samples_per_symbol) < s.psd_segment)
        throw ConfigError("run.psd_segment exceeds the waveform length");
    if (s.psd_segment < 64 || (s.psd_segment & (s.psd_segment - 1)) != 0)
        throw ConfigError("run.psd_segment must be a power of two >= 64");
    if (!s.bypass_dsp && total <= static_cast<std::size_t>(s.eq.train_len + s.eq.ff_taps))
        throw ConfigError("frame too short for equalizer training");
    if (!(s.epc_volts_per_rad > 0.0)) throw ConfigError("ctl.volts_per_rad must be > 0");
}

}  // namespace pmcsh::sim
