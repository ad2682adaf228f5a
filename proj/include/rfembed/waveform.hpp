// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The rfembed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RFEMBED_WAVEFORM_HPP
#define RFEMBED_WAVEFORM_HPP

// Baseband synthesis of protocol instances: constellation mapping, pulse
// shaping, the six modulation families and rational resampling to the
// target rate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "fft.hpp"
#include "protogen.hpp"
#include "signal.hpp"

namespace rfembed {

// --- constellations ---------------------------------------------------------------

struct ConstellationTable {
    LinearFamily family = LinearFamily::psk;
    int order = 2;
    std::vector<cdouble> points;  // indexed by the bit label, MSB first

    int bits() const { return bits_per_symbol(order); }
};

namespace detail {

inline unsigned gray(unsigned v) { return v ^ (v >> 1); }

inline unsigned gray_inverse(unsigned g) {
    unsigned v = 0;
    for (; g; g >>= 1) {
        v ^= g;
    }
    return v;
}

inline void normalize_energy(std::vector<cdouble>& pts) {
    double e = 0.0;
    for (const auto& p : pts) {
        e += std::norm(p);
    }
    const double g = std::sqrt(static_cast<double>(pts.size()) / e);
    for (auto& p : pts) {
        p *= g;
    }
}

// Gray-labelled amplitude levels -(L-1), ..., (L-1) for a label of `bits` bits.
inline double pam_level(unsigned label, int levels) {
    const auto pos = static_cast<int>(gray_inverse(label));
    return 2.0 * pos - (levels - 1);
}

}  // namespace detail

// Unit average energy tables. PSK, ASK and square/rectangular QAM are Gray
// labelled; APSK uses the 4+12 and 4+12+16 ring layouts.
inline ConstellationTable make_constellation(LinearFamily family, int order) {
    if (!is_power_of_two(order) || order < 2 || order > 256) {
        throw UnsupportedModulation("unsupported modulation order " + std::to_string(order));
    }
    ConstellationTable t{family, order, std::vector<cdouble>(static_cast<std::size_t>(order))};
    const int k = bits_per_symbol(order);
    switch (family) {
        case LinearFamily::ask:
            // Unipolar amplitude levels 0 .. M-1.
            for (unsigned label = 0; label < static_cast<unsigned>(order); ++label) {
                t.points[label] = static_cast<double>(detail::gray_inverse(label));
            }
            break;
        case LinearFamily::psk: {
            const double offset = order == 4 ? std::numbers::pi / 4.0 : 0.0;
            for (unsigned label = 0; label < static_cast<unsigned>(order); ++label) {
                const double pos = detail::gray_inverse(label);
                t.points[label] = std::polar(1.0, kTwoPi * pos / order + offset);
            }
            break;
        }
        case LinearFamily::qam: {
            const int ibits = (k + 1) / 2;
            const int qbits = k / 2;
            const int ilevels = 1 << ibits;
            const int qlevels = 1 << qbits;
            for (unsigned label = 0; label < static_cast<unsigned>(order); ++label) {
                const unsigned il = label >> qbits;
                const unsigned ql = label & ((1U << qbits) - 1U);
                const double q = qlevels > 1 ? detail::pam_level(ql, qlevels) : 0.0;
                t.points[label] = {detail::pam_level(il, ilevels), q};
            }
            break;
        }
        case LinearFamily::apsk: {
            std::vector<std::pair<int, double>> rings;  // (points, radius)
            if (order == 16) {
                rings = {{4, 1.0}, {12, 3.15}};
            } else if (order == 32) {
                rings = {{4, 1.0}, {12, 2.84}, {16, 5.27}};
            } else {
                throw UnsupportedModulation("APSK supports orders 16 and 32");
            }
            std::size_t label = 0;
            for (const auto& [count, radius] : rings) {
                const double offset = count == 16 ? 0.0 : std::numbers::pi / count;
                for (int i = 0; i < count; ++i) {
                    t.points[label++] = std::polar(radius, offset + kTwoPi * i / count);
                }
            }
            break;
        }
    }
    detail::normalize_energy(t.points);
    return t;
}

// Maps bits (MSB first per group) to table points. A trailing partial group
// is completed with bits from `pad`, or zeros when no rng is given.
inline std::vector<cdouble> map_symbols(std::span<const std::uint8_t> bits, const ConstellationTable& table,
                                        Rng* pad = nullptr) {
    const auto k = static_cast<std::size_t>(table.bits());
    const std::size_t count = (bits.size() + k - 1) / k;
    std::vector<cdouble> out(count);
    std::bernoulli_distribution coin(0.5);
    for (std::size_t s = 0; s < count; ++s) {
        unsigned label = 0;
        for (std::size_t b = 0; b < k; ++b) {
            const std::size_t i = s * k + b;
            unsigned bit = 0;
            if (i < bits.size()) {
                bit = bits[i] & 1U;
            } else if (pad) {
                bit = coin(*pad) ? 1U : 0U;
            }
            label = (label << 1) | bit;
        }
        out[s] = table.points[label];
    }
    return out;
}

// Nearest-point demapping, the inverse of map_symbols on noiseless input.
inline Bits demap_nearest(std::span<const cdouble> symbols, const ConstellationTable& table) {
    Bits out;
    const int k = table.bits();
    out.reserve(symbols.size() * static_cast<std::size_t>(k));
    for (const auto& s : symbols) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < table.points.size(); ++i) {
            if (std::norm(s - table.points[i]) < std::norm(s - table.points[best])) {
                best = i;
            }
        }
        for (int b = k - 1; b >= 0; --b) {
            out.push_back(static_cast<std::uint8_t>((best >> b) & 1U));
        }
    }
    return out;
}

// --- filters ------------------------------------------------------------------------

// Root-raised-cosine taps spanning `span` symbols, unit energy.
inline std::vector<double> rrc_taps(double rolloff, int sps, int span = 12) {
    require(rolloff > 0.0 && rolloff <= 1.0 && sps >= 1 && span >= 2, "invalid root-raised-cosine parameters");
    const int len = span * sps + 1;
    std::vector<double> h(static_cast<std::size_t>(len));
    const double b = rolloff;
    const double pi = std::numbers::pi;
    for (int n = 0; n < len; ++n) {
        const double t = static_cast<double>(n - span * sps / 2) / sps;
        double v;
        if (std::abs(t) < 1e-12) {
            v = 1.0 - b + 4.0 * b / pi;
        } else if (std::abs(std::abs(4.0 * b * t) - 1.0) < 1e-9) {
            v = b / std::sqrt(2.0) *
                ((1.0 + 2.0 / pi) * std::sin(pi / (4.0 * b)) + (1.0 - 2.0 / pi) * std::cos(pi / (4.0 * b)));
        } else {
            v = (std::sin(pi * t * (1.0 - b)) + 4.0 * b * t * std::cos(pi * t * (1.0 + b))) /
                (pi * t * (1.0 - 16.0 * b * b * t * t));
        }
        h[static_cast<std::size_t>(n)] = v;
    }
    const double e = std::sqrt(std::inner_product(h.begin(), h.end(), h.begin(), 0.0));
    for (auto& v : h) {
        v /= e;
    }
    return h;
}

// Full linear convolution of symbols, zero-stuffed by `sps`, with real taps.
inline std::vector<cdouble> upsample_filter(std::span<const cdouble> symbols, int sps, std::span<const double> taps) {
    if (symbols.empty()) {
        return {};
    }
    const std::size_t n = (symbols.size() - 1) * static_cast<std::size_t>(sps) + taps.size();
    std::vector<cdouble> out(n);
    for (std::size_t s = 0; s < symbols.size(); ++s) {
        const std::size_t base = s * static_cast<std::size_t>(sps);
        for (std::size_t k = 0; k < taps.size(); ++k) {
            out[base + k] += symbols[s] * taps[k];
        }
    }
    return out;
}

// --- rational resampling -------------------------------------------------------------

struct Ratio {
    int up = 1;
    int down = 1;
    double value() const { return static_cast<double>(up) / down; }
    bool operator==(const Ratio&) const = default;
};

// Smallest-term rational within 0.5% of r (terms bounded by max_term), else
// the closest one found.
inline Ratio approximate_ratio(double r, int max_term = 64) {
    require(r > 0.0 && std::isfinite(r), "resampling ratio must be positive");
    Ratio best{1, 1};
    double best_err = std::numeric_limits<double>::infinity();
    for (int down = 1; down <= max_term; ++down) {
        const int up = static_cast<int>(std::lround(r * down));
        if (up < 1 || up > max_term || std::gcd(up, down) != 1) {
            continue;
        }
        const double err = std::abs(static_cast<double>(up) / down - r) / r;
        if (err <= 0.005) {
            return {up, down};
        }
        if (err < best_err) {
            best_err = err;
            best = {up, down};
        }
    }
    return best;
}

namespace detail {

inline constexpr int kResamplerHalfTaps = 32;
inline constexpr double kResamplerBeta = 8.0;

// Kaiser-windowed sinc prototype at the upsampled rate. Length 64*m+1 with
// m = max(up, down); cutoff placed so the stopband starts at the output
// (or input) Nyquist frequency.
inline const std::vector<double>& resampler_prototype(int up, int down) {
    thread_local std::map<std::pair<int, int>, std::vector<double>> cache;
    auto& h = cache[{up, down}];
    if (!h.empty()) {
        return h;
    }
    const int m = std::max(up, down);
    const int half = kResamplerHalfTaps * m;
    const int len = 2 * half + 1;
    const double fc = 0.46 / m;
    const double i0b = std::cyl_bessel_i(0.0, kResamplerBeta);
    h.resize(static_cast<std::size_t>(len));
    for (int n = 0; n < len; ++n) {
        const double t = n - half;
        const double x = 2.0 * fc * t;
        const double sinc = std::abs(t) < 1e-12 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
        const double r = t / half;
        const double w = std::cyl_bessel_i(0.0, kResamplerBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0b;
        h[static_cast<std::size_t>(n)] = 2.0 * fc * sinc * w;
    }
    const double sum = std::accumulate(h.begin(), h.end(), 0.0);
    for (auto& v : h) {
        v /= sum;
    }
    return h;
}

}  // namespace detail

// Polyphase rational resampler; output sample m sits at input time m/ratio,
// so the filter delay is compensated. Output length floor(N * up / down).
inline std::vector<cdouble> resample(std::span<const cdouble> x, Ratio ratio) {
    require(ratio.up >= 1 && ratio.down >= 1, "resampling ratio terms must be positive");
    const int g = std::gcd(ratio.up, ratio.down);
    const long up = ratio.up / g;
    const long down = ratio.down / g;
    const auto out_len = static_cast<std::size_t>((static_cast<long long>(x.size()) * up) / down);
    if (out_len == 0) {
        throw ValidationError("resampling produces an empty output");
    }
    if (up == down) {
        return {x.begin(), x.end()};
    }
    const auto& h = detail::resampler_prototype(static_cast<int>(up), static_cast<int>(down));
    const long half = static_cast<long>(h.size() / 2);
    const auto n_in = static_cast<long>(x.size());
    std::vector<cdouble> y(out_len);
    for (std::size_t m = 0; m < out_len; ++m) {
        const long t = static_cast<long>(m) * down;
        // input index n contributes through tap t - n*up + half in [0, 2*half]
        long n_lo = (t - half + up - 1);
        n_lo = n_lo >= 0 ? n_lo / up : -((-n_lo) / up);
        n_lo = std::max(0L, n_lo);
        const long n_hi = std::min(n_in - 1, (t + half) / up);
        cdouble acc{0.0, 0.0};
        for (long n = n_lo; n <= n_hi; ++n) {
            acc += x[static_cast<std::size_t>(n)] * h[static_cast<std::size_t>(t - n * up + half)];
        }
        y[m] = acc * static_cast<double>(up);
    }
    return y;
}

inline ComplexSignal resample(const ComplexSignal& signal, Ratio ratio) {
    return {resample(std::span<const cdouble>(signal.samples), ratio), signal.sample_rate * ratio.value()};
}

// --- per-family modulators ----------------------------------------------------------

// OFDM symbols from blocks of `carriers` frequency-domain values (FFT bin
// order), unitary IFFT, cyclic prefix prepended.
inline std::vector<cdouble> ofdm_modulate(std::span<const cdouble> bins, int carriers, int cyclic_prefix) {
    require(carriers >= 1 && bins.size() % static_cast<std::size_t>(carriers) == 0,
            "OFDM input must be whole symbols");
    require(cyclic_prefix >= 0 && cyclic_prefix < carriers, "cyclic prefix must be shorter than the symbol");
    const auto n = static_cast<std::size_t>(carriers);
    const auto cp = static_cast<std::size_t>(cyclic_prefix);
    const double g = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<cdouble> out;
    out.reserve(bins.size() / n * (n + cp));
    for (std::size_t s = 0; s < bins.size(); s += n) {
        auto time = fft::inverse(bins.subspan(s, n));
        for (auto& v : time) {
            v *= g;
        }
        out.insert(out.end(), time.end() - static_cast<std::ptrdiff_t>(cp), time.end());
        out.insert(out.end(), time.begin(), time.end());
    }
    return out;
}

// FFT bin of the i-th active carrier: -half..-1 then 1..half.
inline std::size_t ofdm_active_bin(int i, int carriers) {
    const int half = ofdm_half_active(carriers);
    const int k = i < half ? i - half : i - half + 1;
    return static_cast<std::size_t>((k + carriers) % carriers);
}

inline std::vector<cdouble> zadoff_chu(int root, int length) {
    std::vector<cdouble> z(static_cast<std::size_t>(length));
    const double pi = std::numbers::pi;
    for (int n = 0; n < length; ++n) {
        const double arg = (length % 2 == 0) ? pi * root * n * n / length : pi * root * n * (n + 1.0) / length;
        z[static_cast<std::size_t>(n)] = std::polar(1.0, -arg);
    }
    return z;
}

// One chirp of a chirp-spread-spectrum symbol `value` in [0, 2^sf). At chip
// instants the waveform equals the cyclically shifted base chirp.
inline std::vector<cdouble> css_symbol(int value, int spreading_factor, int oversampling) {
    const int n = 1 << spreading_factor;
    std::vector<cdouble> out(static_cast<std::size_t>(n * oversampling));
    for (std::size_t i = 0; i < out.size(); ++i) {
        double tau = static_cast<double>(i) / oversampling + value;
        tau = std::fmod(tau, static_cast<double>(n));
        out[i] = std::polar(1.0, std::numbers::pi * (tau * tau / n - tau));
    }
    return out;
}

// Spreading code as +-1 chips.
inline std::vector<double> spreading_chips(const SpreadingCode& code) {
    std::vector<int> bits;
    if (code.kind == CodeKind::barker) {
        switch (code.length) {
            case 7: bits = {1, 1, 1, -1, -1, 1, -1}; break;
            case 11: bits = {1, 1, 1, -1, -1, -1, 1, -1, -1, 1, -1}; break;
            case 13: bits = {1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1}; break;
            default: throw UnsupportedModulation("Barker codes exist for lengths 7, 11 and 13");
        }
        return {bits.begin(), bits.end()};
    }
    const int degree = std::bit_width(code.polynomial) - 1;
    require(degree >= 3 && code.length == (1 << degree) - 1, "PN length must be 2^degree - 1");
    // Successive powers of x modulo the generator; output the top state bit.
    std::uint32_t state = 1;
    std::vector<double> chips(static_cast<std::size_t>(code.length));
    for (auto& c : chips) {
        c = ((state >> (degree - 1)) & 1U) ? -1.0 : 1.0;
        state <<= 1;
        if (state & (1U << degree)) {
            state ^= code.polynomial;
        }
    }
    return chips;
}

namespace detail {

inline Bits concat_bits(const std::vector<FrameBits>& frames) {
    Bits all;
    for (const auto& f : frames) {
        all.insert(all.end(), f.bits.begin(), f.bits.end());
    }
    return all;
}

inline std::vector<cdouble> render_linear(const ProtocolSpec& spec, const Linear& m,
                                          const std::vector<FrameBits>& frames, Rng& rng) {
    const auto table = make_constellation(m.family, m.order);
    std::vector<cdouble> symbols;
    for (const auto& f : frames) {
        auto s = map_symbols(f.bits, table, &rng);
        symbols.insert(symbols.end(), s.begin(), s.end());
    }
    const auto taps = rrc_taps(*spec.rolloff, spec.samples_per_symbol);
    return upsample_filter(symbols, spec.samples_per_symbol, taps);
}

inline std::vector<cdouble> render_dsss(const ProtocolSpec& spec, const Dsss& m, const std::vector<FrameBits>& frames,
                                        Rng& rng) {
    const auto table = make_constellation(m.chip_family, m.chip_order);
    const auto code = spreading_chips(m.code);
    std::vector<cdouble> chips;
    for (const auto& f : frames) {
        for (const auto& d : map_symbols(f.bits, table, &rng)) {
            for (double c : code) {
                chips.push_back(d * c);
            }
        }
    }
    const auto taps = rrc_taps(*spec.rolloff, spec.samples_per_symbol);
    return upsample_filter(chips, spec.samples_per_symbol, taps);
}

inline void append_cpfsk(std::vector<cdouble>& out, double& phase, double freq, int samples) {
    for (int i = 0; i < samples; ++i) {
        out.push_back(std::polar(1.0, phase));
        phase = std::fmod(phase + kTwoPi * freq, kTwoPi);
    }
}

inline std::vector<cdouble> render_mfsk(const ProtocolSpec& spec, const Mfsk& m, const std::vector<FrameBits>& frames,
                                        Rng& rng) {
    const int k = bits_per_symbol(m.order);
    std::vector<cdouble> out;
    double phase = uniform(rng, 0.0, kTwoPi);
    std::bernoulli_distribution coin(0.5);
    for (const auto& f : frames) {
        for (std::size_t s = 0; s < f.bits.size(); s += static_cast<std::size_t>(k)) {
            unsigned label = 0;
            for (int b = 0; b < k; ++b) {
                const std::size_t i = s + static_cast<std::size_t>(b);
                const unsigned bit = i < f.bits.size() ? (f.bits[i] & 1U) : (coin(rng) ? 1U : 0U);
                label = (label << 1) | bit;
            }
            const double tone = (static_cast<double>(gray_inverse(label)) - (m.order - 1) / 2.0) * m.tone_spacing;
            append_cpfsk(out, phase, tone, spec.samples_per_symbol);
        }
    }
    return out;
}

inline std::vector<cdouble> render_css(const ProtocolSpec& spec, const Css& m, const std::vector<FrameBits>& frames,
                                       Rng& rng) {
    std::vector<cdouble> out;
    std::bernoulli_distribution coin(0.5);
    for (const auto& f : frames) {
        for (std::size_t s = 0; s < f.bits.size(); s += static_cast<std::size_t>(m.spreading_factor)) {
            int value = 0;
            for (int b = 0; b < m.spreading_factor; ++b) {
                const std::size_t i = s + static_cast<std::size_t>(b);
                const int bit = i < f.bits.size() ? (f.bits[i] & 1) : (coin(rng) ? 1 : 0);
                value = (value << 1) | bit;
            }
            const auto sym = css_symbol(value, m.spreading_factor, spec.samples_per_symbol);
            out.insert(out.end(), sym.begin(), sym.end());
        }
    }
    return out;
}

inline std::vector<cdouble> render_fdm(const ProtocolSpec& spec, const Fdm& m, const std::vector<FrameBits>& frames,
                                       Rng& rng) {
    const Bits bits = concat_bits(frames);
    const auto k = static_cast<std::size_t>(m.subchannels);
    const int sps = spec.samples_per_symbol;
    std::vector<std::vector<cdouble>> lanes(k);
    if (m.kind == SubchannelKind::fsk2) {
        const std::size_t per_lane = (bits.size() + k - 1) / k;
        std::bernoulli_distribution coin(0.5);
        for (std::size_t j = 0; j < k; ++j) {
            double phase = uniform(rng, 0.0, kTwoPi);
            for (std::size_t s = 0; s < per_lane; ++s) {
                const std::size_t i = s * k + j;
                const int bit = i < bits.size() ? (bits[i] & 1) : (coin(rng) ? 1 : 0);
                append_cpfsk(lanes[j], phase, (bit ? 0.5 : -0.5) / sps, sps);
            }
        }
    } else {
        const auto table = make_constellation(m.kind == SubchannelKind::psk ? LinearFamily::psk : LinearFamily::qam,
                                              m.order);
        auto symbols = map_symbols(bits, table, &rng);
        const std::size_t per_lane = (symbols.size() + k - 1) / k;
        Bits pad_bits(static_cast<std::size_t>(table.bits()) * (per_lane * k - symbols.size()));
        for (auto& b : pad_bits) {
            b = static_cast<std::uint8_t>(uniform_int(rng, 0, 1));
        }
        const auto pad = map_symbols(pad_bits, table);
        symbols.insert(symbols.end(), pad.begin(), pad.end());
        const auto taps = rrc_taps(*spec.rolloff, sps);
        for (std::size_t j = 0; j < k; ++j) {
            std::vector<cdouble> lane_symbols;
            for (std::size_t s = 0; s < per_lane; ++s) {
                lane_symbols.push_back(symbols[s * k + j]);
            }
            lanes[j] = upsample_filter(lane_symbols, sps, taps);
        }
    }
    std::size_t len = 0;
    for (const auto& l : lanes) {
        len = std::max(len, l.size());
    }
    std::vector<cdouble> out(len);
    for (std::size_t j = 0; j < k; ++j) {
        const double offset = (static_cast<double>(j) - (static_cast<double>(k) - 1.0) / 2.0) * m.spacing;
        for (std::size_t n = 0; n < lanes[j].size(); ++n) {
            out[n] += lanes[j][n] * std::polar(1.0, kTwoPi * offset * static_cast<double>(n));
        }
    }
    return out;
}

// Frequency-domain OFDM symbols for one field of a frame.
inline void ofdm_field(std::vector<cdouble>& bins, const Ofdm& m, const SyncSpec* sync, std::span<const std::uint8_t> bits,
                       const ConstellationTable& table, Rng& rng) {
    const int active = ofdm_active_carriers(m.carriers);
    const auto n = static_cast<std::size_t>(m.carriers);
    auto new_symbol = [&] {
        bins.resize(bins.size() + n, cdouble{0.0, 0.0});
        return bins.size() - n;
    };
    if (sync) {
        if (const auto* zc = std::get_if<ZadoffChu>(&sync->kind)) {
            const auto seq = zadoff_chu(zc->root, zc->length);
            const std::size_t per_symbol = static_cast<std::size_t>(active) * static_cast<std::size_t>(table.bits());
            const std::size_t count = std::max<std::size_t>(1, (bits.size() + per_symbol - 1) / per_symbol);
            for (std::size_t s = 0; s < count; ++s) {
                const std::size_t base = new_symbol();
                for (int i = 0; i < active; ++i) {
                    bins[base + ofdm_active_bin(i, m.carriers)] = seq[static_cast<std::size_t>(i) % seq.size()];
                }
            }
            return;
        }
        if (const auto* pc = std::get_if<PartialCarriers>(&sync->kind)) {
            std::vector<int> used;
            for (int i = 0; i < active; ++i) {
                if (pc->mask[static_cast<std::size_t>(i)]) {
                    used.push_back(i);
                }
            }
            const auto symbols = map_symbols(bits, table, &rng);
            for (std::size_t s = 0; s < symbols.size(); s += used.size()) {
                const std::size_t base = new_symbol();
                for (std::size_t u = 0; u < used.size() && s + u < symbols.size(); ++u) {
                    bins[base + ofdm_active_bin(used[u], m.carriers)] = symbols[s + u];
                }
            }
            return;
        }
    }
    auto symbols = map_symbols(bits, table, &rng);
    const auto per = static_cast<std::size_t>(active);
    while (symbols.size() % per != 0) {
        Bits pad(static_cast<std::size_t>(table.bits()));
        for (auto& b : pad) {
            b = static_cast<std::uint8_t>(uniform_int(rng, 0, 1));
        }
        symbols.push_back(map_symbols(pad, table)[0]);
    }
    for (std::size_t s = 0; s < symbols.size(); s += per) {
        const std::size_t base = new_symbol();
        for (std::size_t i = 0; i < per; ++i) {
            bins[base + ofdm_active_bin(static_cast<int>(i), m.carriers)] = symbols[s + i];
        }
    }
}

inline std::vector<cdouble> render_ofdm(const ProtocolSpec& spec, const Ofdm& m, const std::vector<FrameBits>& frames,
                                        Rng& rng) {
    const auto table = make_constellation(m.carrier_family, m.carrier_order);
    std::vector<cdouble> bins;
    for (const auto& f : frames) {
        Bits data;
        auto flush = [&] {
            if (!data.empty()) {
                ofdm_field(bins, m, nullptr, data, table, rng);
                data.clear();
            }
        };
        for (const auto& seg : f.segments) {
            const std::span<const std::uint8_t> bits(f.bits.data() + seg.offset, seg.length);
            const SyncSpec* sync = nullptr;
            if (seg.kind == SegmentKind::sync) {
                sync = &spec.frame.sync;
            } else if (seg.kind == SegmentKind::mid_sync) {
                sync = &*spec.frame.mid_sync;
            } else if (seg.kind == SegmentKind::end_sync) {
                sync = &*spec.frame.end_sync;
            }
            if (sync) {
                flush();
                ofdm_field(bins, m, sync, bits, table, rng);
            } else {
                data.insert(data.end(), bits.begin(), bits.end());
            }
        }
        flush();
    }
    return ofdm_modulate(bins, m.carriers, m.cyclic_prefix);
}

}  // namespace detail

// Contiguous generation-rate transmission of the given frames, including the
// pulse-shaping tails at both ends.
inline std::vector<cdouble> modulate_frames(const ProtocolSpec& spec, const std::vector<FrameBits>& frames, Rng& rng) {
    return std::visit(
        [&](const auto& m) -> std::vector<cdouble> {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Linear>) {
                return detail::render_linear(spec, m, frames, rng);
            } else if constexpr (std::is_same_v<T, Mfsk>) {
                return detail::render_mfsk(spec, m, frames, rng);
            } else if constexpr (std::is_same_v<T, Ofdm>) {
                return detail::render_ofdm(spec, m, frames, rng);
            } else if constexpr (std::is_same_v<T, Fdm>) {
                return detail::render_fdm(spec, m, frames, rng);
            } else if constexpr (std::is_same_v<T, Css>) {
                return detail::render_css(spec, m, frames, rng);
            } else {
                return detail::render_dsss(spec, m, frames, rng);
            }
        },
        spec.modulation);
}

// Ratio from the generation rate to the target rate that places the occupied
// bandwidth at the protocol's bandwidth fraction.
inline Ratio target_ratio(const ProtocolSpec& spec) {
    return approximate_ratio(generation_bandwidth(spec) / spec.bandwidth_fraction);
}

// One instance of exactly n_samples at the target rate. Frames are
// concatenated (with pauses in burst mode) from a random start position,
// resampled and normalized to unit mean power over non-pause samples.
inline ComplexSignal synthesize_instance(const ProtocolSpec& spec, std::size_t n_samples, Rng& rng,
                                         double target_rate = 1.0) {
    const Ratio ratio = target_ratio(spec);
    const double r = ratio.value();
    const double symbol_at_target = generation_symbol_length(spec) * r;
    if (static_cast<double>(n_samples) < std::ceil(symbol_at_target)) {
        throw SignalTooShort("instance of " + std::to_string(n_samples) + " samples is shorter than one symbol (" +
                             std::to_string(symbol_at_target) + " samples)");
    }
    const std::size_t margin = static_cast<std::size_t>(detail::kResamplerHalfTaps * std::max(ratio.up, ratio.down) /
                                                        ratio.up) + 8;
    const std::size_t needed = static_cast<std::size_t>(std::ceil(static_cast<double>(n_samples) / r)) + margin;

    std::vector<cdouble> stream;
    std::vector<std::uint8_t> active;  // 0 marks pause samples
    std::size_t offset = 0;

    if (spec.mode == Mode::continuous) {
        // Skip the leading shaping transient, then start anywhere in a frame.
        std::vector<FrameBits> frames{frame_bits(spec, rng)};
        const auto one = modulate_frames(spec, frames, rng);
        const std::size_t frame_len = std::max<std::size_t>(1, one.size());
        const std::size_t lead = spec.rolloff ? static_cast<std::size_t>(6 * spec.samples_per_symbol) : 0;
        offset = lead + static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(frame_len) - 1));
        while (frames.size() * frame_len < needed + offset + frame_len) {
            frames.push_back(frame_bits(spec, rng));
        }
        stream = modulate_frames(spec, frames, rng);
        while (stream.size() < needed + offset) {
            frames.push_back(frame_bits(spec, rng));
            stream = modulate_frames(spec, frames, rng);
        }
        active.assign(stream.size(), 1);
    } else {
        bool first = true;
        while (stream.size() < needed + offset) {
            const auto burst = modulate_frames(spec, {frame_bits(spec, rng)}, rng);
            if (first) {
                offset = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(burst.size()) - 1));
                first = false;
            }
            stream.insert(stream.end(), burst.begin(), burst.end());
            active.insert(active.end(), burst.size(), 1);
            const int pause = uniform_int(rng, spec.frame.pause_min, spec.frame.pause_max);
            stream.insert(stream.end(), static_cast<std::size_t>(pause), cdouble{0.0, 0.0});
            active.insert(active.end(), static_cast<std::size_t>(pause), 0);
        }
    }

    const std::span<const cdouble> window(stream.data() + offset, stream.size() - offset);
    auto out = resample(window, ratio);
    out.resize(n_samples);

    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t m = 0; m < out.size(); ++m) {
        const auto src = offset + std::min(stream.size() - offset - 1, static_cast<std::size_t>(m / r));
        if (active[src]) {
            acc += std::norm(out[m]);
            ++count;
        }
    }
    if (count == 0 || acc <= 0.0) {
        throw ValidationError("synthesized instance carries no signal");
    }
    const double g = 1.0 / std::sqrt(acc / static_cast<double>(count));
    for (auto& v : out) {
        v *= g;
    }
    return {std::move(out), target_rate};
}

}  // namespace rfembed

#endif
