#include <map>

#include "pmcsh/scenario.hpp"

namespace pmcsh::sim {
namespace {

// Values marked "setup" come from the published link descriptions; values
// marked "default" are engineering choices with no published counterpart.
const std::map<std::string, std::string>& table() {
    static const std::map<std::string, std::string> presets = {
        {"sim50g", R"(# 50 Gbaud QPSK over 20 km, ASE-loaded simulation setup
tx.format = QPSK                  # setup: QPSK
tx.baud = 50e9                    # setup: 50 Gbaud
tx.rolloff = 0.1                  # default
tx.samples_per_symbol = 16        # default
tx.prbs_order = 15                # default
tx.preamble_len = 256             # default
laser.power_mw = 10               # setup: 10 mW laser
laser.linewidth_hz = 100e3        # default: external-cavity class laser
laser.launch_azimuth_deg = 45     # setup: equal split at the transmitter PBS
mod.insertion_loss_db = 12        # setup: 12 dB modulator insertion loss
mod.transfer = ideal_linear       # default
fiber.length_km = 20              # setup: 20 km SSMF
fiber.dispersion_ps_nm_km = 16    # setup: 16 ps/(nm km)
fiber.slope_ps_nm2_km = 0.08      # setup: 0.08 ps/(nm^2 km) = 0.08e3 s/m^3
fiber.atten_db_km = 0.2           # setup: 0.2 dB/km
fiber.dgd_mean_ps = auto          # default: 0.1 ps/sqrt(km)
fiber.sop_drift_rad_s = 1         # default
channel.osnr_db = 25              # setup: OSNR 25 dB
channel.rotation = random         # setup: random input SOP
rx.tap_ratio = 0.10               # setup: 10 % to the monitor PD
rx.shot_noise = on                # setup: shot noise on
rx.thermal_noise_a_rthz = 15e-12  # setup: thermal noise on; density is a default
ctl.mode = adaptive
)"},
        {"exp10g", R"(# 10 Gbaud over 10 km, measured-link setup
tx.format = QPSK                  # setup: QPSK (16QAM via tx.format = QAM16)
tx.baud = 10e9                    # setup: 10 Gbaud
tx.rolloff = 0.1                  # default
tx.samples_per_symbol = 16        # default
laser.power_mw = 10               # default
laser.linewidth_hz = 100e3        # default: external-cavity laser
laser.launch_azimuth_deg = 45     # setup: laser split into two orthogonal polarizations
mod.insertion_loss_db = 13        # setup: 13 dB modulator insertion loss
mod.drive_vpp = 0.35              # setup: 350 mV p-p drive
mod.v_pi = 3.5                    # default
mod.transfer = ideal_linear       # default
fiber.length_km = 10              # setup: 10 km SSMF
fiber.dispersion_ps_nm_km = 16    # default: SSMF
fiber.slope_ps_nm2_km = 0.08      # default: SSMF
fiber.atten_db_km = 0.2           # default: SSMF
fiber.sop_drift_rad_s = 1         # default
channel.osnr_db = 25              # default
channel.rotation = random         # setup: randomly changing SOP at the PBS input
rx.tap_ratio = 0.10               # setup: 90 % to the signal port, 10 % to the PD
ctl.mode = adaptive
)"},
        {"exp16g", R"(# 16 Gbaud over 10 km, measured-link setup
tx.format = QPSK                  # setup: QPSK (16QAM via tx.format = QAM16)
tx.baud = 16e9                    # setup: 16 Gbaud
tx.rolloff = 0.1                  # default
tx.samples_per_symbol = 16        # default
laser.power_mw = 10               # default
laser.linewidth_hz = 100e3        # default: external-cavity laser
laser.launch_azimuth_deg = 45     # setup: laser split into two orthogonal polarizations
mod.insertion_loss_db = 13        # setup: 13 dB modulator insertion loss
mod.drive_vpp = 0.35              # setup: 350 mV p-p drive
mod.v_pi = 3.5                    # default
mod.transfer = ideal_linear       # default
fiber.length_km = 10              # setup: 10 km SSMF
fiber.dispersion_ps_nm_km = 16    # default: SSMF
fiber.slope_ps_nm2_km = 0.08      # default: SSMF
fiber.atten_db_km = 0.2           # default: SSMF
fiber.sop_drift_rad_s = 1         # default
channel.osnr_db = 25              # default
channel.rotation = random         # setup: randomly changing SOP at the PBS input
rx.tap_ratio = 0.10               # setup: 90 % to the signal port, 10 % to the PD
ctl.mode = adaptive
)"},
        {"sim50g_fast", R"(# sim50g with fast SOP drift for tracking stress runs
tx.format = QPSK
tx.baud = 50e9
laser.power_mw = 10
laser.linewidth_hz = 100e3
mod.insertion_loss_db = 12
fiber.length_km = 20
fiber.sop_drift_rad_s = 50        # default: fast drift
channel.osnr_db = 25
channel.rotation = random
ctl.mode = adaptive
)"},
        {"b2b", R"(# back-to-back loopback: zero-length fiber, no ASE
tx.format = QPSK
tx.baud = 16e9
laser.linewidth_hz = 100e3
mod.insertion_loss_db = 13
fiber.length_km = 0
fiber.sop_drift_rad_s = 0
channel.osnr_db = inf
channel.rotation = identity
ctl.mode = adaptive
)"},
    };
    return presets;
}

}  // namespace

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [k, v] : table()) n.push_back(k);
        return n;
    }();
    return names;
}

const std::string& preset_text(const std::string& name) {
    const auto it = table().find(name);
    if (it == table().end()) throw ConfigError("unknown preset '" + name + "'");
    return it->second;
}

Scenario preset(const std::string& name) {
    Scenario s = apply_config_text(Scenario{}, preset_text(name), "preset " + name);
    s.preset = name;
    return s;
}

}  // namespace pmcsh::sim
