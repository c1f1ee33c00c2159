#include "pmcsh/dsp.hpp"

#include <algorithm>
#include <cmath>

#include "pmcsh/fft.hpp"

namespace pmcsh::dsp {

void validate(const EqualizerConfig& c) {
    if (c.ff_taps < 1 || c.ff_taps % 2 == 0) throw ConfigError("eq.ff_taps must be odd and >= 1");
    if (c.fb_taps < 0) throw ConfigError("eq.fb_taps must be >= 0");
    if (!(c.mu_rde > 0.0) || !(c.mu_dfe > 0.0)) throw ConfigError("equalizer steps must be > 0");
    if (c.train_len < 0) throw ConfigError("eq.train_len must be >= 0");
}

RVec rde_radii(tx::Format format) {
    if (format == tx::Format::Qpsk) return {1.0};
    return {0.2, 1.0, 1.8};
}

namespace {

std::size_t wrap(long long i, std::size_t n) {
    const auto nn = static_cast<long long>(n);
    return static_cast<std::size_t>(((i % nn) + nn) % nn);
}

// c[l] = sum_m d[(l+m) mod N] conj(p[m])
CVec circular_correlation(const CVec& d, std::span<const cplx> p) {
    CVec padded(d.size(), cplx{0.0, 0.0});
    std::copy(p.begin(), p.end(), padded.begin());
    CVec fd = fft(d);
    const CVec fp = fft(padded);
    for (std::size_t k = 0; k < fd.size(); ++k) fd[k] *= std::conj(fp[k]);
    return ifft(fd);
}

}  // namespace

// Peak over RMS of the off-peak correlation. Random data gives about
// sqrt(preamble_len); noise alone exceeds 5 with probability exp(-25) per candidate.
constexpr double kSyncThreshold = 5.0;

SyncResult matched_filter_downsample(const rx::IqWaveforms& iq, const tx::TxConfig& cfg) {
    tx::validate(cfg);
    if (iq.i.size() != iq.q.size()) throw Error("iq waveforms differ in length");
    const auto sps = static_cast<std::size_t>(cfg.samples_per_symbol);
    if (iq.i.empty() || iq.i.size() % sps != 0) throw Error("waveform length is not a whole number of symbols");
    if (std::abs(iq.rate - cfg.sample_rate()) > 1e-6 * cfg.sample_rate())
        throw Error("waveform rate does not match baud * samples_per_symbol");
    const std::size_t nsym = iq.i.size() / sps;
    if (cfg.preamble_len <= 0 || static_cast<std::size_t>(cfg.preamble_len) > nsym) throw Error("sync failed");

    CVec r(iq.i.size());
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = {iq.i[k], iq.q[k]};
    RVec h = tx::rrc_taps(cfg.rolloff, cfg.samples_per_symbol);
    for (double& v : h) v /= static_cast<double>(sps);
    const CVec mf = circular_filter(r, h, h.size() / 2);

    const CVec pre = tx::preamble_symbols(cfg.preamble_len);
    double best = -1.0;
    std::size_t best_phase = 0;
    std::size_t best_lag = 0;
    bool best_conj = false;
    CVec best_corr;
    CVec d(nsym);
    for (std::size_t ph = 0; ph < sps; ++ph) {
        for (int hyp = 0; hyp < 2; ++hyp) {
            for (std::size_t k = 0; k < nsym; ++k) d[k] = hyp ? std::conj(mf[ph + k * sps]) : mf[ph + k * sps];
            CVec corr = circular_correlation(d, pre);
            for (std::size_t l = 0; l < nsym; ++l) {
                const double m = std::abs(corr[l]);
                if (m > best) {
                    best = m;
                    best_phase = ph;
                    best_lag = l;
                    best_conj = hyp != 0;
                    best_corr = corr;
                }
            }
        }
    }

    double off_energy = 0.0;
    std::size_t off_count = 0;
    for (std::size_t l = 0; l < nsym; ++l) {
        const std::size_t dist = std::min((l + nsym - best_lag) % nsym, (best_lag + nsym - l) % nsym);
        if (dist > 2) {
            off_energy += std::norm(best_corr[l]);
            ++off_count;
        }
    }
    const double off_rms = off_count ? std::sqrt(off_energy / static_cast<double>(off_count)) : 0.0;
    const double ratio = off_rms > 0.0 ? best / off_rms : (best > 0.0 ? 1e300 : 0.0);
    if (!(ratio >= kSyncThreshold)) throw Error("sync failed");

    SyncResult out;
    out.symbols.resize(nsym);
    for (std::size_t k = 0; k < nsym; ++k) out.symbols[k] = mf[best_phase + ((k + best_lag) % nsym) * sps];
    out.phase = best_phase;
    out.offset = best_lag;
    out.conjugated = best_conj;
    out.peak_ratio = ratio;
    return out;
}

Alignment phase_align(std::span<const cplx> symbols, std::span<const cplx> preamble) {
    if (preamble.empty() || preamble.size() > symbols.size()) throw Error("phase_align: preamble not present");
    double ref_energy = 0.0;
    for (const auto& p : preamble) ref_energy += std::norm(p);

    struct Fit {
        cplx gain;
        double residual;
    };
    auto fit = [&](bool conj) {
        cplx acc{0.0, 0.0};
        for (std::size_t k = 0; k < preamble.size(); ++k) {
            const cplx y = conj ? std::conj(symbols[k]) : symbols[k];
            acc += y * std::conj(preamble[k]);
        }
        const cplx g = acc / ref_energy;
        double res = 0.0;
        for (std::size_t k = 0; k < preamble.size(); ++k) {
            const cplx y = conj ? std::conj(symbols[k]) : symbols[k];
            res += std::norm(y - g * preamble[k]);
        }
        return Fit{g, res};
    };
    const Fit direct = fit(false);
    const Fit flipped = fit(true);
    const bool conj = flipped.residual < direct.residual;
    const cplx g = conj ? flipped.gain : direct.gain;
    if (std::abs(g) == 0.0) throw Error("phase_align: zero preamble correlation");

    Alignment out;
    out.conjugated = conj;
    out.phase_rad = std::arg(g);
    out.gain = std::abs(g);
    out.symbols.resize(symbols.size());
    const cplx inv = 1.0 / g;
    for (std::size_t k = 0; k < symbols.size(); ++k)
        out.symbols[k] = (conj ? std::conj(symbols[k]) : symbols[k]) * inv;
    return out;
}

cplx slice(cplx y, tx::Format format) {
    if (format == tx::Format::Qpsk) {
        const double a = 1.0 / std::sqrt(2.0);
        return {y.real() < 0.0 ? -a : a, y.imag() < 0.0 ? -a : a};
    }
    const double s = std::sqrt(10.0);
    auto level = [](double v) {
        if (v < -2.0) return -3.0;
        if (v < 0.0) return -1.0;
        if (v < 2.0) return 1.0;
        return 3.0;
    };
    return {level(y.real() * s) / s, level(y.imag() * s) / s};
}

namespace {

void check_taps(const CVec& w, const char* what) {
    double e = 0.0;
    for (const auto& v : w) e += std::norm(v);
    if (!(e <= 1e6)) throw Error(std::string(what) + " diverged");
}

}  // namespace

CVec rde_equalize(std::span<const cplx> symbols, const EqualizerConfig& cfg, tx::Format format) {
    validate(cfg);
    const std::size_t n = symbols.size();
    const auto taps = static_cast<std::size_t>(cfg.ff_taps);
    if (n <= taps + static_cast<std::size_t>(cfg.train_len)) throw Error("rde: frame too short for equalizer");
    const RVec radii = rde_radii(format);
    const auto c = static_cast<long long>(taps / 2);

    CVec w(taps, cplx{0.0, 0.0});
    w[taps / 2] = 1.0;
    CVec win(taps);
    CVec out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx y{0.0, 0.0};
        for (std::size_t i = 0; i < taps; ++i) {
            win[i] = symbols[wrap(static_cast<long long>(k) + c - static_cast<long long>(i), n)];
            y += w[i] * win[i];
        }
        out[k] = y;
        const double p = std::norm(y);
        double r2 = radii.front();
        for (const double r : radii)
            if (std::abs(r - p) < std::abs(r2 - p)) r2 = r;
        const double e = r2 - p;
        for (std::size_t i = 0; i < taps; ++i) w[i] += cfg.mu_rde * e * y * std::conj(win[i]);
        if (k % 64 == 0) check_taps(w, "equalizer");
    }
    check_taps(w, "equalizer");
    return out;
}

DfeOutput dfe_equalize(std::span<const cplx> symbols, const EqualizerConfig& cfg, tx::Format format,
                       std::span<const cplx> reference) {
    validate(cfg);
    const std::size_t n = symbols.size();
    const auto taps = static_cast<std::size_t>(cfg.ff_taps);
    const auto fb = static_cast<std::size_t>(cfg.fb_taps);
    if (n <= taps) throw Error("dfe: frame too short for equalizer");
    const std::size_t train = std::min<std::size_t>(static_cast<std::size_t>(cfg.train_len), reference.size());
    const auto c = static_cast<long long>(taps / 2);

    CVec w(taps, cplx{0.0, 0.0});
    w[taps / 2] = 1.0;
    CVec b(fb, cplx{0.0, 0.0});
    CVec win(taps);
    DfeOutput out{CVec(n), CVec(n)};
    for (std::size_t k = 0; k < n; ++k) {
        cplx y{0.0, 0.0};
        for (std::size_t i = 0; i < taps; ++i) {
            win[i] = symbols[wrap(static_cast<long long>(k) + c - static_cast<long long>(i), n)];
            y += w[i] * win[i];
        }
        for (std::size_t j = 0; j < fb; ++j)
            if (k >= j + 1) y += b[j] * out.decisions[k - 1 - j];
        const cplx d = k < train ? reference[k] : slice(y, format);
        out.soft[k] = y;
        out.decisions[k] = d;
        const cplx e = d - y;
        for (std::size_t i = 0; i < taps; ++i) w[i] += cfg.mu_dfe * e * std::conj(win[i]);
        for (std::size_t j = 0; j < fb; ++j)
            if (k >= j + 1) b[j] += cfg.mu_dfe * e * std::conj(out.decisions[k - 1 - j]);
        if (k % 64 == 0) {
            check_taps(w, "equalizer");
            check_taps(b, "equalizer");
        }
    }
    return out;
}

tx::Bits demap_bits(std::span<const cplx> symbols, tx::Format format) {
    const auto bps = static_cast<std::size_t>(tx::bits_per_symbol(format));
    tx::Bits bits(symbols.size() * bps);
    const double s = std::sqrt(10.0);
    for (std::size_t k = 0; k < symbols.size(); ++k) {
        const cplx y = symbols[k];
        if (format == tx::Format::Qpsk) {
            bits[2 * k] = y.real() < 0.0;
            bits[2 * k + 1] = y.imag() < 0.0;
        } else {
            const double i = y.real() * s;
            const double q = y.imag() * s;
            bits[4 * k] = i < 0.0;
            bits[4 * k + 1] = std::abs(i) > 2.0;
            bits[4 * k + 2] = q < 0.0;
            bits[4 * k + 3] = std::abs(q) > 2.0;
        }
    }
    return bits;
}

Metrics demap_count(std::span<const cplx> symbols, std::span<const std::uint8_t> reference_bits, tx::Format format) {
    const auto bps = static_cast<std::size_t>(tx::bits_per_symbol(format));
    if (reference_bits.size() != symbols.size() * bps)
        throw Error("demap: " + std::to_string(symbols.size()) + " symbols vs " +
                    std::to_string(reference_bits.size()) + " reference bits");
    if (symbols.empty()) throw Error("demap: no symbols");
    const tx::Bits got = demap_bits(symbols, format);
    Metrics m;
    for (std::size_t i = 0; i < got.size(); ++i) m.error_bits += got[i] != reference_bits[i];
    m.counted_bits = got.size();
    m.ber = static_cast<double>(m.error_bits) / static_cast<double>(m.counted_bits);

    const CVec ideal = tx::map_symbols(reference_bits, format);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < symbols.size(); ++k) {
        num += std::real(symbols[k] * std::conj(ideal[k]));
        den += std::norm(symbols[k]);
    }
    const double g = den > 0.0 ? num / den : 0.0;
    double err = 0.0;
    double ref = 0.0;
    for (std::size_t k = 0; k < symbols.size(); ++k) {
        err += std::norm(g * symbols[k] - ideal[k]);
        ref += std::norm(ideal[k]);
    }
    m.evm_db = 10.0 * std::log10(std::max(err / ref, 1e-300));
    m.snr_est_db = -m.evm_db;
    return m;
}

double phase_drift(std::span<const cplx> symbols, std::span<const cplx> reference) {
    const std::size_t n = std::min(symbols.size(), reference.size());
    if (n < 2) throw Error("phase_drift: need at least two symbols");
    double prev = 0.0;
    double offset = 0.0;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double raw = std::arg(symbols[k] * std::conj(reference[k]));
        if (k > 0) offset -= kTwoPi * std::round((raw + offset - prev) / kTwoPi);
        const double ph = raw + offset;
        prev = ph;
        const auto x = static_cast<double>(k);
        sx += x;
        sy += ph;
        sxx += x * x;
        sxy += x * ph;
    }
    const auto nn = static_cast<double>(n);
    return (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
}

BranchSpectrum branch_spectrum(std::span<const cplx> samples, double rate, std::size_t segment_len,
                               double signal_bw_hz) {
    BranchSpectrum b;
    b.psd = psd(samples, rate, segment_len);
    const std::size_t n = b.psd.size();
    const std::size_t dc = n / 2;
    const double df = rate / static_cast<double>(n);
    constexpr std::size_t kLineHalf = 2;   // Hann main lobe
    constexpr std::size_t kFloorFrom = 4;
    constexpr std::size_t kFloorTo = 19;

    RVec floor;
    for (std::size_t k = kFloorFrom; k <= kFloorTo && dc + k < n && k <= dc; ++k) {
        floor.push_back(b.psd[dc + k].density);
        floor.push_back(b.psd[dc - k].density);
    }
    std::sort(floor.begin(), floor.end());
    const double baseline = floor.empty() ? 0.0 : 0.5 * (floor[(floor.size() - 1) / 2] + floor[floor.size() / 2]);

    double line = 0.0;
    for (std::size_t k = dc - kLineHalf; k <= dc + kLineHalf; ++k) line += (b.psd[k].density - baseline) * df;
    b.line_mw = std::max(0.0, line);

    double band = 0.0;
    for (const auto& p : b.psd)
        if (std::abs(p.frequency) <= signal_bw_hz / 2.0) band += p.density * df;
    b.wideband_mw = std::max(0.0, band - b.line_mw);
    const double ratio = b.wideband_mw > 0.0 ? b.line_mw / b.wideband_mw : 0.0;
    b.line_to_wideband_db = b.wideband_mw > 0.0 ? (ratio > 0.0 ? 10.0 * std::log10(ratio) : -300.0) : 300.0;
    return b;
}

SpectrumReport spectrum_report(const DualPolSignal& sig, std::size_t segment_len, double signal_bw_hz) {
    return {branch_spectrum(sig.x(), sig.sample_rate(), segment_len, signal_bw_hz),
            branch_spectrum(sig.y(), sig.sample_rate(), segment_len, signal_bw_hz)};
}

rx::IqWaveforms apply_isi(const rx::IqWaveforms& iq, std::span<const double> taps, int samples_per_symbol) {
    const std::size_t n = iq.i.size();
    rx::IqWaveforms out{RVec(n, 0.0), RVec(n, 0.0), iq.rate};
    const auto sps = static_cast<long long>(samples_per_symbol);
    for (std::size_t j = 0; j < taps.size(); ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t src = wrap(static_cast<long long>(k) - static_cast<long long>(j) * sps, n);
            out.i[k] += taps[j] * iq.i[src];
            out.q[k] += taps[j] * iq.q[src];
        }
    }
    return out;
}

namespace {

// The blind equalizer may settle on a tap centre a few symbols off; find the
// preamble again within that range.
CVec realign(const CVec& y, std::span<const cplx> preamble, int max_shift) {
    const std::size_t n = y.size();
    long long best_shift = 0;
    double best = -1.0;
    for (long long s = -max_shift; s <= max_shift; ++s) {
        cplx acc{0.0, 0.0};
        cplx acc_conj{0.0, 0.0};
        for (std::size_t k = 0; k < preamble.size(); ++k) {
            const cplx v = y[wrap(static_cast<long long>(k) + s, n)];
            acc += v * std::conj(preamble[k]);
            acc_conj += std::conj(v) * std::conj(preamble[k]);
        }
        const double m = std::max(std::abs(acc), std::abs(acc_conj));
        if (m > best) {
            best = m;
            best_shift = s;
        }
    }
    if (best_shift == 0) return y;
    CVec out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = y[wrap(static_cast<long long>(k) + best_shift, n)];
    return out;
}

}  // namespace

FrameResult process_frame(const rx::IqWaveforms& iq, const tx::TxConfig& cfg, const EqualizerConfig& eq,
                          std::span<const cplx> tx_symbols, std::span<const std::uint8_t> payload_bits,
                          bool bypass) {
    const auto bps = static_cast<std::size_t>(tx::bits_per_symbol(cfg.format));
    const auto pre_len = static_cast<std::size_t>(cfg.preamble_len);
    FrameResult r;
    r.sync_info = matched_filter_downsample(iq, cfg);
    const std::size_t nsym = r.sync_info.symbols.size();
    if (nsym != tx_symbols.size() || (nsym - pre_len) * bps != payload_bits.size())
        throw Error("frame length does not match transmitted symbols");

    const CVec preamble(tx_symbols.begin(), tx_symbols.begin() + static_cast<std::ptrdiff_t>(pre_len));
    const Alignment al = phase_align(r.sync_info.symbols, preamble);
    r.pre_eq.assign(al.symbols.begin() + static_cast<std::ptrdiff_t>(pre_len), al.symbols.end());
    r.bypass = demap_count(r.pre_eq, payload_bits, cfg.format);
    r.phase_drift_rad_per_symbol = phase_drift(r.pre_eq, tx_symbols.subspan(pre_len));
    if (bypass) return r;

    const CVec rde = realign(rde_equalize(al.symbols, eq, cfg.format), preamble, eq.ff_taps / 2);
    const Alignment al2 = phase_align(rde, preamble);
    const DfeOutput dfe = dfe_equalize(al2.symbols, eq, cfg.format, tx_symbols);
    const std::size_t start = std::max(pre_len, static_cast<std::size_t>(eq.train_len));
    if (start >= nsym) throw Error("training covers the whole frame");
    r.post_eq.assign(dfe.soft.begin() + static_cast<std::ptrdiff_t>(pre_len), dfe.soft.end());
    const std::span<const cplx> counted(dfe.soft.data() + start, nsym - start);
    r.equalized = demap_count(counted, payload_bits.subspan((start - pre_len) * bps), cfg.format);
    return r;
}

}  // namespace pmcsh::dsp
