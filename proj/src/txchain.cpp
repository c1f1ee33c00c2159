#include "pmcsh/txchain.hpp"

#include <algorithm>
#include <cmath>

#include "pmcsh/fft.hpp"

namespace pmcsh::tx {

void validate(const LaserParams& p) {
    if (!(p.power_mw > 0.0)) throw ConfigError("laser.power_mw must be > 0");
    if (!(p.linewidth_hz >= 0.0)) throw ConfigError("laser.linewidth_hz must be >= 0");
    if (!std::isfinite(p.launch_azimuth_deg)) throw ConfigError("laser.launch_azimuth_deg must be finite");
}

void validate(const ModulatorParams& p) {
    if (!(p.insertion_loss_db >= 0.0)) throw ConfigError("mod.insertion_loss_db must be >= 0");
    if (!(p.v_pi > 0.0)) throw ConfigError("mod.v_pi must be > 0");
    if (!(p.drive_vpp > 0.0)) throw ConfigError("mod.drive_vpp must be > 0");
}

void validate(const TxConfig& c) {
    if (!(c.baud > 0.0)) throw ConfigError("tx.baud must be > 0");
    if (!(c.rolloff > 0.0 && c.rolloff <= 1.0)) throw ConfigError("tx.rolloff must be in (0, 1]");
    if (c.samples_per_symbol < 4 || c.samples_per_symbol % 2 != 0)
        throw ConfigError("tx.samples_per_symbol must be even and >= 4");
    if (c.prbs_order != 15 && c.prbs_order != 23) throw ConfigError("tx.prbs_order must be 15 or 23");
    if (c.preamble_len < 0) throw ConfigError("tx.preamble_len must be >= 0");
}

Prbs::Prbs(int order, std::uint32_t initial_state) : order_(order) {
    if (order == 15) {
        tap_ = 14;
    } else if (order == 23) {
        tap_ = 18;
    } else {
        throw ConfigError("unsupported PRBS order " + std::to_string(order));
    }
    mask_ = (1u << order) - 1u;
    state_ = initial_state & mask_;
    if (state_ == 0) throw Error("PRBS state must be nonzero");
}

std::uint8_t Prbs::next() {
    const std::uint32_t bit = ((state_ >> (order_ - 1)) ^ (state_ >> (tap_ - 1))) & 1u;
    state_ = ((state_ << 1) | bit) & mask_;
    return static_cast<std::uint8_t>(bit);
}

Bits gen_bits(const Rng& rng, std::size_t count, int prbs_order) {
    RngStream s = rng.stream("tx.bits");
    const std::uint32_t mask = (1u << prbs_order) - 1u;
    Prbs prbs(prbs_order, static_cast<std::uint32_t>(s.next_u64() % mask) + 1u);
    Bits bits(count);
    for (auto& b : bits) b = prbs.next();
    return bits;
}

namespace {

double qam16_level(std::uint8_t sign, std::uint8_t mag) { return (sign ? -1.0 : 1.0) * (mag ? 3.0 : 1.0); }

}  // namespace

CVec map_symbols(std::span<const std::uint8_t> bits, Format format) {
    const auto bps = static_cast<std::size_t>(bits_per_symbol(format));
    if (bits.size() % bps != 0)
        throw Error("bit count " + std::to_string(bits.size()) + " not divisible by " + std::to_string(bps));
    CVec out(bits.size() / bps);
    if (format == Format::Qpsk) {
        const double a = 1.0 / std::sqrt(2.0);
        for (std::size_t k = 0; k < out.size(); ++k)
            out[k] = {bits[2 * k] ? -a : a, bits[2 * k + 1] ? -a : a};
    } else {
        const double a = 1.0 / std::sqrt(10.0);
        for (std::size_t k = 0; k < out.size(); ++k) {
            const auto* b = &bits[4 * k];
            out[k] = {a * qam16_level(b[0], b[1]), a * qam16_level(b[2], b[3])};
        }
    }
    return out;
}

CVec constellation(Format format) {
    const int bps = bits_per_symbol(format);
    const int m = 1 << bps;
    Bits bits;
    bits.reserve(static_cast<std::size_t>(m * bps));
    for (int i = 0; i < m; ++i)
        for (int b = bps - 1; b >= 0; --b) bits.push_back(static_cast<std::uint8_t>((i >> b) & 1));
    return map_symbols(bits, format);
}

CVec preamble_symbols(int length) {
    // Not a PRBS15/23 segment: the payload would otherwise contain a second copy.
    RngStream s = Rng(0x9E3779B97F4A7C15ULL).stream("tx.preamble");
    Bits bits(static_cast<std::size_t>(2 * length));
    for (auto& b : bits) b = static_cast<std::uint8_t>(s.next_u64() >> 63);
    return map_symbols(bits, Format::Qpsk);
}

RVec rrc_taps(double rolloff, int samples_per_symbol, int span_symbols) {
    const int n = span_symbols * samples_per_symbol + 1;
    const int center = n / 2;
    const double beta = rolloff;
    RVec h(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i - center) / samples_per_symbol;
        double v = 0.0;
        if (i == center) {
            v = 1.0 - beta + 4.0 * beta / kPi;
        } else if (std::abs(std::abs(t) - 1.0 / (4.0 * beta)) < 1e-9) {
            v = beta / std::sqrt(2.0) *
                ((1.0 + 2.0 / kPi) * std::sin(kPi / (4.0 * beta)) + (1.0 - 2.0 / kPi) * std::cos(kPi / (4.0 * beta)));
        } else {
            const double num = std::sin(kPi * t * (1.0 - beta)) + 4.0 * beta * t * std::cos(kPi * t * (1.0 + beta));
            const double den = kPi * t * (1.0 - (4.0 * beta * t) * (4.0 * beta * t));
            v = num / den;
        }
        h[static_cast<std::size_t>(i)] = v;
    }
    double energy = 0.0;
    for (const double v : h) energy += v * v;
    const double scale = std::sqrt(samples_per_symbol / energy);
    for (double& v : h) v *= scale;
    return h;
}

CVec rrc_shape(std::span<const cplx> symbols, const TxConfig& cfg) {
    if (symbols.empty()) throw Error("rrc_shape: no symbols");
    const auto sps = static_cast<std::size_t>(cfg.samples_per_symbol);
    CVec up(symbols.size() * sps, cplx{0.0, 0.0});
    for (std::size_t k = 0; k < symbols.size(); ++k) up[k * sps] = symbols[k];
    const RVec h = rrc_taps(cfg.rolloff, cfg.samples_per_symbol);
    return circular_filter(up, h, h.size() / 2);
}

DualPolSignal laser_field(const LaserParams& p, std::size_t n, double rate, double wavelength, RngStream& phase_rng) {
    if (n == 0) throw Error("laser_field: zero samples");
    const double amp = std::sqrt(p.power_mw);
    const double theta = p.launch_azimuth_deg * kPi / 180.0;
    const double step_std = std::sqrt(kTwoPi * p.linewidth_hz / rate);
    CVec x(n);
    CVec y(n);
    double phase = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0 && step_std > 0.0) phase += step_std * phase_rng.gaussian();
        const cplx e = std::polar(amp, phase);
        x[k] = std::cos(theta) * e;
        y[k] = std::sin(theta) * e;
    }
    return DualPolSignal(std::move(x), std::move(y), rate, wavelength);
}

CVec iq_modulate(std::span<const cplx> carrier, std::span<const cplx> waveform, const ModulatorParams& p) {
    if (carrier.size() != waveform.size()) throw Error("iq_modulate: carrier and waveform lengths differ");
    const double loss = std::pow(10.0, -p.insertion_loss_db / 20.0);
    CVec out(carrier.size());
    if (p.transfer == Transfer::IdealLinear) {
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = carrier[k] * waveform[k] * loss;
        return out;
    }
    // Null-biased MZMs: each rail maps the drive peak-to-peak onto drive_vpp volts.
    double lo_i = 0.0, hi_i = 0.0, lo_q = 0.0, hi_q = 0.0;
    for (const auto& w : waveform) {
        lo_i = std::min(lo_i, w.real());
        hi_i = std::max(hi_i, w.real());
        lo_q = std::min(lo_q, w.imag());
        hi_q = std::max(hi_q, w.imag());
    }
    const double span = std::max(hi_i - lo_i, hi_q - lo_q);
    const double volts_per_unit = span > 0.0 ? p.drive_vpp / span : 0.0;
    const double k_rad = kPi / (2.0 * p.v_pi);
    const double norm = 1.0 / std::sqrt(2.0);
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double vi = waveform[k].real() * volts_per_unit;
        const double vq = waveform[k].imag() * volts_per_unit;
        out[k] = carrier[k] * loss * norm * cplx{std::sin(k_rad * vi), std::sin(k_rad * vq)};
    }
    return out;
}

TxOutput build_tx(const TxConfig& cfg, const LaserParams& laser, const ModulatorParams& mod,
                  std::size_t n_payload_symbols, double wavelength, const Rng& rng) {
    validate(cfg);
    validate(laser);
    validate(mod);
    if (n_payload_symbols == 0 && cfg.preamble_len == 0) throw ConfigError("no symbols to transmit");

    Bits bits = gen_bits(rng, n_payload_symbols * static_cast<std::size_t>(bits_per_symbol(cfg.format)),
                         cfg.prbs_order);
    CVec symbols = preamble_symbols(cfg.preamble_len);
    const CVec payload = map_symbols(bits, cfg.format);
    symbols.insert(symbols.end(), payload.begin(), payload.end());

    const CVec waveform = rrc_shape(symbols, cfg);
    RngStream phase_rng = rng.stream("laser.phase");
    const DualPolSignal light = laser_field(laser, waveform.size(), cfg.sample_rate(), wavelength, phase_rng);

    CVec sig_branch = iq_modulate(light.x(), waveform, mod);
    CVec carrier_branch = light.y();
    return {light.with_samples(std::move(sig_branch), std::move(carrier_branch)), std::move(symbols),
            std::move(bits)};
}

}  // namespace pmcsh::tx
