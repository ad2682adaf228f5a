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

#ifndef RFEMBED_IMPAIR_HPP
#define RFEMBED_IMPAIR_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rfembed/error.hpp"
#include "rfembed/fft.hpp"
#include "rfembed/signal.hpp"

namespace rfembed {

enum class ChannelModel { none, tdl_a, tdl_b, tdl_c, tdl_d, tdl_e };

inline std::string to_string(ChannelModel m) {
    switch (m) {
        case ChannelModel::none: return "none";
        case ChannelModel::tdl_a: return "TDL-A";
        case ChannelModel::tdl_b: return "TDL-B";
        case ChannelModel::tdl_c: return "TDL-C";
        case ChannelModel::tdl_d: return "TDL-D";
        case ChannelModel::tdl_e: return "TDL-E";
    }
    return "?";
}

inline ChannelModel parse_channel_model(const std::string& s) {
    for (auto m : {ChannelModel::none, ChannelModel::tdl_a, ChannelModel::tdl_b, ChannelModel::tdl_c,
                   ChannelModel::tdl_d, ChannelModel::tdl_e}) {
        if (s == to_string(m)) {
            return m;
        }
    }
    throw ConfigError("unknown channel model '" + s + "' (expected none or TDL-A..TDL-E)");
}

struct TdlTap {
    double delay = 0.0;     // normalized, multiplied by the delay spread
    double power_db = 0.0;
    bool los = false;       // specular (Rician) component of the first tap
    bool operator==(const TdlTap&) const = default;
};

struct TdlProfile {
    ChannelModel model = ChannelModel::none;
    std::vector<TdlTap> taps;  // sorted by delay
    bool operator==(const TdlProfile&) const = default;
};

// Linear tap powers scaled to sum to one, in tap order.
inline std::vector<double> normalized_tap_powers(const TdlProfile& p) {
    std::vector<double> lin;
    lin.reserve(p.taps.size());
    double total = 0.0;
    for (const auto& t : p.taps) {
        lin.push_back(std::pow(10.0, t.power_db / 10.0));
        total += lin.back();
    }
    require(total > 0.0, "TDL profile has no power");
    for (auto& v : lin) {
        v /= total;
    }
    return lin;
}

inline void validate(const TdlProfile& p) {
    if (p.taps.empty()) {
        throw ConfigError("TDL profile " + to_string(p.model) + " has no taps");
    }
    for (std::size_t i = 0; i < p.taps.size(); ++i) {
        const auto& t = p.taps[i];
        if (!std::isfinite(t.delay) || t.delay < 0.0 || !std::isfinite(t.power_db)) {
            throw ConfigError("TDL profile " + to_string(p.model) + " has an invalid tap");
        }
        if (i > 0 && t.delay < p.taps[i - 1].delay) {
            throw ConfigError("TDL profile " + to_string(p.model) + " delays are not sorted");
        }
    }
}

namespace detail {

inline TdlProfile make_profile(ChannelModel m, std::vector<TdlTap> taps) {
    std::stable_sort(taps.begin(), taps.end(), [](const TdlTap& a, const TdlTap& b) { return a.delay < b.delay; });
    return {m, std::move(taps)};
}

}  // namespace detail

// 3GPP TR 38.901 tapped-delay-line tables. TDL-D and TDL-E split their first
// tap into a LOS part and a Rayleigh part at the same delay.
inline TdlProfile builtin_tdl_profile(ChannelModel m) {
    using detail::make_profile;
    switch (m) {
        case ChannelModel::none:
            return {ChannelModel::none, {{0.0, 0.0, false}}};
        case ChannelModel::tdl_a:
            return make_profile(m, {{0.0000, -13.4}, {0.3819, 0.0},   {0.4025, -2.2},  {0.5868, -4.0},
                                    {0.4610, -6.0},  {0.5375, -8.2},  {0.6708, -9.9},  {0.5750, -10.5},
                                    {0.7618, -7.5},  {1.5375, -15.9}, {1.8978, -6.6},  {2.2242, -16.7},
                                    {2.1718, -12.4}, {2.4942, -15.2}, {2.5119, -10.8}, {3.0582, -11.3},
                                    {4.0810, -12.7}, {4.4579, -16.2}, {4.5695, -18.3}, {4.7966, -18.9},
                                    {5.0066, -16.6}, {5.3043, -19.9}, {9.6586, -29.7}});
        case ChannelModel::tdl_b:
            return make_profile(m, {{0.0000, 0.0},   {0.1072, -2.2},  {0.2155, -4.0},  {0.2095, -3.2},
                                    {0.2870, -9.8},  {0.2986, -1.2},  {0.3752, -3.4},  {0.5055, -5.2},
                                    {0.3681, -7.6},  {0.3697, -3.0},  {0.5700, -8.9},  {0.5283, -9.0},
                                    {1.1021, -4.8},  {1.2756, -5.7},  {1.5474, -7.5},  {1.7842, -1.9},
                                    {2.0169, -7.6},  {2.8294, -12.2}, {3.0219, -9.8},  {3.6187, -11.4},
                                    {4.1067, -14.9}, {4.2790, -9.2},  {4.7834, -11.3}});
        case ChannelModel::tdl_c:
            return make_profile(m, {{0.0000, -4.4},  {0.2099, -1.2},  {0.2219, -3.5},  {0.2329, -5.2},
                                    {0.2176, -2.5},  {0.6366, 0.0},   {0.6448, -2.2},  {0.6560, -3.9},
                                    {0.6584, -7.4},  {0.7935, -7.1},  {0.8213, -10.7}, {0.9336, -11.1},
                                    {1.2285, -5.1},  {1.3083, -6.8},  {2.1704, -8.7},  {2.7105, -13.2},
                                    {4.2589, -13.9}, {4.6003, -13.9}, {5.4902, -15.8}, {5.6077, -17.1},
                                    {6.3065, -16.0}, {6.6374, -15.7}, {7.0427, -21.6}, {8.6523, -22.8}});
        case ChannelModel::tdl_d:
            return make_profile(m, {{0.000, -0.2, true}, {0.000, -13.5}, {0.035, -18.8}, {0.612, -21.0},
                                    {1.363, -22.8},      {1.405, -17.9}, {1.804, -20.1}, {2.596, -21.9},
                                    {1.775, -22.9},      {4.042, -27.8}, {7.937, -23.6}, {9.424, -24.8},
                                    {9.708, -30.0},      {12.525, -27.7}});
        case ChannelModel::tdl_e:
            return make_profile(m, {{0.0000, -0.03, true}, {0.0000, -22.03}, {0.5133, -15.8}, {0.5440, -18.1},
                                    {0.5630, -19.8},       {0.5440, -22.9},  {0.7112, -22.4}, {1.9092, -18.6},
                                    {1.9293, -20.8},       {1.9589, -22.6},  {2.6426, -22.3}, {3.7136, -25.6},
                                    {5.4524, -20.2},       {12.0034, -29.8}, {20.6519, -29.2}});
    }
    throw ConfigError("unknown channel model");
}

// Rician K-factor in dB (LOS power over the diffuse first-tap power), if any.
inline std::optional<double> k_factor_db(const TdlProfile& p) {
    double los = 0.0;
    double diffuse = 0.0;
    bool any = false;
    for (const auto& t : p.taps) {
        if (t.delay != p.taps.front().delay) {
            break;
        }
        const double lin = std::pow(10.0, t.power_db / 10.0);
        if (t.los) {
            los += lin;
            any = true;
        } else {
            diffuse += lin;
        }
    }
    if (!any || diffuse <= 0.0) {
        return std::nullopt;
    }
    return 10.0 * std::log10(los / diffuse);
}

struct ImpairmentConfig {
    std::optional<double> phase;      // radians; unset draws uniformly from [0, 2pi)
    double cfo_sigma = 0.0;           // std of the normalized CFO, cycles/sample
    std::optional<double> cfo_fixed;  // overrides the Gaussian draw
    ChannelModel channel = ChannelModel::none;
    double delay_spread = 100e-9;     // seconds
    std::optional<double> snr_db;     // in-band; unset leaves the signal noiseless
    bool operator==(const ImpairmentConfig&) const = default;
};

inline void validate(const ImpairmentConfig& c) {
    if (!(c.cfo_sigma >= 0.0) || !std::isfinite(c.cfo_sigma)) {
        throw ConfigError("cfo_sigma must be finite and >= 0");
    }
    if (c.cfo_fixed && !(std::abs(*c.cfo_fixed) < 0.5)) {
        throw ConfigError("fixed CFO must satisfy |cfo| < 0.5 cycles/sample");
    }
    if (c.phase && !std::isfinite(*c.phase)) {
        throw ConfigError("phase must be finite");
    }
    if (c.channel != ChannelModel::none && !(c.delay_spread > 0.0 && std::isfinite(c.delay_spread))) {
        throw ConfigError("delay_spread must be > 0 when a TDL channel is selected");
    }
    if (c.snr_db && std::isnan(*c.snr_db)) {
        throw ConfigError("snr_db must not be NaN");
    }
}

// y(n) = x(n) exp(j(2 pi cfo n + phase)).
inline ComplexSignal apply_phase_cfo(const ComplexSignal& x, double phase, double cfo) {
    require(std::isfinite(phase) && std::isfinite(cfo), "phase and CFO must be finite");
    if (!(std::abs(cfo) < 0.5)) {
        throw ValidationError("CFO of " + std::to_string(cfo) + " cycles/sample aliases (|cfo| must be < 0.5)");
    }
    ComplexSignal y = x;
    for (std::size_t n = 0; n < y.samples.size(); ++n) {
        // Reduce the argument to keep precision on long signals.
        const double cycles = std::fmod(cfo * static_cast<double>(n), 1.0);
        y.samples[n] *= std::polar(1.0, kTwoPi * cycles + phase);
    }
    return y;
}

// One block-static realization of the profile as a causal FIR.
inline std::vector<cdouble> tdl_realization(const TdlProfile& profile, double delay_spread, double sample_rate,
                                            Rng& rng) {
    validate(profile);
    require(delay_spread >= 0.0 && sample_rate > 0.0, "delay spread and sample rate must be positive");
    const auto powers = normalized_tap_powers(profile);
    std::vector<cdouble> h;
    for (std::size_t i = 0; i < profile.taps.size(); ++i) {
        const auto d = static_cast<std::size_t>(std::llround(profile.taps[i].delay * delay_spread * sample_rate));
        if (h.size() <= d) {
            h.resize(d + 1, cdouble{0.0, 0.0});
        }
        if (profile.taps[i].los) {
            h[d] += std::polar(std::sqrt(powers[i]), uniform(rng, 0.0, kTwoPi));
        } else {
            h[d] += complex_gaussian(rng, powers[i]);
        }
    }
    return h;
}

inline ComplexSignal apply_tdl(const ComplexSignal& x, const TdlProfile& profile, double delay_spread,
                               double sample_rate, Rng& rng) {
    const auto h = tdl_realization(profile, delay_spread, sample_rate, rng);
    if (h.size() - 1 >= x.size()) {
        throw ValidationError("TDL maximum delay of " + std::to_string(h.size() - 1) +
                              " samples is not shorter than the signal");
    }
    ComplexSignal y{std::vector<cdouble>(x.size(), cdouble{0.0, 0.0}), x.sample_rate};
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (h[k] == cdouble{0.0, 0.0}) {
            continue;
        }
        for (std::size_t n = k; n < x.size(); ++n) {
            y.samples[n] += h[k] * x.samples[n - k];
        }
    }
    return y;
}

// Total noise power for a given in-band SNR: P_s / (10^(snr/10) * B).
inline double noise_power_for_snr(double signal_power, double snr_db, double occupied_bandwidth) {
    return signal_power / (std::pow(10.0, snr_db / 10.0) * occupied_bandwidth);
}

// Mean power over samples that are not (near-)silent, so inter-burst pauses do
// not dilute the reference used for SNR targeting.
inline double active_power(std::span<const cdouble> x) {
    double peak = 0.0;
    for (const auto& v : x) {
        peak = std::max(peak, std::norm(v));
    }
    const double gate = peak * 1e-6;
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& v : x) {
        if (std::norm(v) > gate) {
            acc += std::norm(v);
            ++n;
        }
    }
    return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

// Adds circular WGN so that signal_power / (P_n * B) equals the requested
// SNR. The reference power defaults to the mean power of the input.
inline ComplexSignal apply_awgn(const ComplexSignal& x, double snr_db, double occupied_bandwidth, Rng& rng,
                                std::optional<double> signal_power = std::nullopt) {
    if (!std::isfinite(snr_db)) {
        throw ValidationError("SNR must be finite");
    }
    require(occupied_bandwidth > 0.0 && occupied_bandwidth <= 1.0, "occupied bandwidth must lie in (0, 1]");
    const double ps = signal_power.value_or(mean_power(x.samples));
    require(ps > 0.0 && std::isfinite(ps), "signal power must be positive");
    const double pn = noise_power_for_snr(ps, snr_db, occupied_bandwidth);
    ComplexSignal y = x;
    for (auto& v : y.samples) {
        v += complex_gaussian(rng, pn);
    }
    return y;
}

// Full chain in fixed order: phase, CFO, TDL, AWGN.
inline ComplexSignal impair(const ComplexSignal& x, const ImpairmentConfig& c, double occupied_bandwidth, Rng& rng,
                            const TdlProfile* profile = nullptr) {
    validate(c);
    const double phase = c.phase ? *c.phase : uniform(rng, 0.0, kTwoPi);
    double cfo = 0.0;
    if (c.cfo_fixed) {
        cfo = *c.cfo_fixed;
    } else if (c.cfo_sigma > 0.0) {
        cfo = std::normal_distribution<double>(0.0, c.cfo_sigma)(rng);
        cfo -= std::round(cfo);  // fold into [-0.5, 0.5]
        if (cfo >= 0.5) {
            cfo -= 1.0;
        }
    }
    ComplexSignal y = apply_phase_cfo(x, phase, cfo);
    if (c.channel != ChannelModel::none) {
        const TdlProfile builtin = builtin_tdl_profile(c.channel);
        y = apply_tdl(y, profile ? *profile : builtin, c.delay_spread, y.sample_rate, rng);
    }
    if (c.snr_db && std::isfinite(*c.snr_db)) {
        y = apply_awgn(y, *c.snr_db, std::min(1.0, occupied_bandwidth), rng, active_power(y.samples));
    } else if (c.snr_db && *c.snr_db < 0.0) {
        throw ValidationError("SNR of -inf is not supported");
    }
    return y;
}

// Welch spectrum (Hann, nfft 256, 50% overlap), normalized so the bins sum
// to the mean power. FFT bin order.
inline std::vector<double> welch_psd(std::span<const cdouble> x, std::size_t nfft = 256) {
    require(x.size() >= nfft, "signal shorter than the Welch segment");
    std::vector<double> w(nfft);
    double w2 = 0.0;
    for (std::size_t i = 0; i < nfft; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(nfft));
        w2 += w[i] * w[i];
    }
    std::vector<double> psd(nfft, 0.0);
    std::vector<cdouble> seg(nfft);
    std::size_t segments = 0;
    for (std::size_t s = 0; s + nfft <= x.size(); s += nfft / 2) {
        for (std::size_t i = 0; i < nfft; ++i) {
            seg[i] = x[s + i] * w[i];
        }
        const auto X = fft::forward(seg);
        for (std::size_t k = 0; k < nfft; ++k) {
            psd[k] += std::norm(X[k]);
        }
        ++segments;
    }
    const double scale = 1.0 / (static_cast<double>(segments) * static_cast<double>(nfft) * w2);
    for (auto& v : psd) {
        v *= scale;
    }
    return psd;
}

// In-band SNR in dB. Returns -inf when no bin clears the floor by 6 dB.
inline double estimate_inband_snr(std::span<const cdouble> x) {
    require(x.size() >= 1024, "SNR estimation needs at least 1024 samples");
    const auto psd = welch_psd(x);
    auto sorted = psd;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t quartile = std::max<std::size_t>(1, sorted.size() / 4);
    double floor = sorted[(quartile - 1) / 2];
    if (quartile % 2 == 0) {
        floor = 0.5 * (sorted[quartile / 2 - 1] + sorted[quartile / 2]);
    }
    floor = std::max(floor, sorted.back() * 1e-30);
    if (floor <= 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    const double threshold = floor * std::pow(10.0, 0.6);
    double band = 0.0;
    std::size_t count = 0;
    for (double v : psd) {
        if (v > threshold) {
            band += v;
            ++count;
        }
    }
    if (count == 0) {
        return -std::numeric_limits<double>::infinity();
    }
    const double noise = floor * static_cast<double>(count);
    const double excess = band - noise;
    if (excess <= 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(excess / noise);
}

inline double estimate_inband_snr(const ComplexSignal& x) { return estimate_inband_snr(x.samples); }

}  // namespace rfembed

#endif
