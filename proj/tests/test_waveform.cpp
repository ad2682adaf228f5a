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

#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <numeric>
#include <set>

#include "rfembed/waveform.hpp"

using namespace rfembed;

namespace {

int popcount_diff(std::size_t a, std::size_t b) { return std::popcount(a ^ b); }

std::vector<cdouble> tone(std::size_t n, double f) {
    std::vector<cdouble> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::polar(1.0, kTwoPi * f * static_cast<double>(i));
    }
    return x;
}

// Averaged periodogram, bins in FFT order.
std::vector<double> periodogram(std::span<const cdouble> x, std::size_t nfft) {
    std::vector<double> p(nfft, 0.0);
    for (std::size_t s = 0; s + nfft <= x.size(); s += nfft) {
        const auto X = fft::forward(x.subspan(s, nfft));
        for (std::size_t k = 0; k < nfft; ++k) {
            p[k] += std::norm(X[k]);
        }
    }
    return p;
}

// Width of the band holding the central 99% of the power.
double occupied_bandwidth_99(std::span<const cdouble> x, std::size_t nfft) {
    const auto p = periodogram(x, nfft);
    const auto shifted = fft::shift<double>(p);
    const double total = std::accumulate(shifted.begin(), shifted.end(), 0.0);
    double acc = 0.0;
    std::size_t lo = 0;
    std::size_t hi = nfft - 1;
    bool lo_set = false;
    for (std::size_t k = 0; k < nfft; ++k) {
        acc += shifted[k];
        if (!lo_set && acc >= 0.005 * total) {
            lo = k;
            lo_set = true;
        }
        if (acc >= 0.995 * total) {
            hi = k;
            break;
        }
    }
    return static_cast<double>(hi - lo + 1) / static_cast<double>(nfft);
}

ProtocolSpec spec_for(SchemeFamily family, Mode mode, std::uint64_t seed = 17) {
    GeneratorConfig c;
    c.families = {family};
    c.burst_probability = mode == Mode::burst ? 1.0 : 0.0;
    return sample_protocol(seed, 0, c);
}

}  // namespace

TEST(Constellation, BpskMapsZeroOneToPlusMinusOne) {
    const auto t = make_constellation(LinearFamily::psk, 2);
    const Bits bits{0, 1};
    const auto s = map_symbols(bits, t);
    ASSERT_EQ(s.size(), 2U);
    EXPECT_NEAR(std::abs(s[0] - cdouble(1.0, 0.0)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(s[1] - cdouble(-1.0, 0.0)), 0.0, 1e-12);
}

TEST(Constellation, QpskHasFourDistinctUnitPoints) {
    const auto t = make_constellation(LinearFamily::psk, 4);
    const Bits bits{0, 0, 0, 1, 1, 0, 1, 1};
    const auto s = map_symbols(bits, t);
    ASSERT_EQ(s.size(), 4U);
    double p = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(std::abs(s[i]), 1.0, 1e-12);
        for (std::size_t j = i + 1; j < 4; ++j) {
            EXPECT_GT(std::abs(s[i] - s[j]), 1.0);
        }
        p += std::norm(s[i]) / 4.0;
    }
    EXPECT_NEAR(p, 1.0, 1e-12);
}

TEST(Constellation, Qam16MatchesScaledIntegerGrid) {
    // Oracle: the {-3,-1,1,3}^2 grid has mean energy 10.
    const auto t = make_constellation(LinearFamily::qam, 16);
    double e = 0.0;
    std::set<std::pair<long, long>> grid;
    for (const auto& p : t.points) {
        e += std::norm(p);
        grid.insert({std::lround(p.real() * std::sqrt(10.0)), std::lround(p.imag() * std::sqrt(10.0))});
    }
    EXPECT_NEAR(e / 16.0, 1.0, 1e-9);
    EXPECT_EQ(grid.size(), 16U);
    for (const auto& [i, q] : grid) {
        EXPECT_TRUE(std::abs(i) == 1 || std::abs(i) == 3);
        EXPECT_TRUE(std::abs(q) == 1 || std::abs(q) == 3);
    }
}

TEST(Constellation, AllSupportedTablesHaveUnitEnergy) {
    const std::vector<std::pair<LinearFamily, std::vector<int>>> cases{
        {LinearFamily::ask, {2, 4, 8, 16}},
        {LinearFamily::psk, {2, 4, 8, 16, 32}},
        {LinearFamily::qam, {2, 4, 8, 16, 32, 64, 128, 256}},
        {LinearFamily::apsk, {16, 32}},
    };
    for (const auto& [family, orders] : cases) {
        for (int order : orders) {
            const auto t = make_constellation(family, order);
            double e = 0.0;
            for (const auto& p : t.points) {
                e += std::norm(p);
            }
            EXPECT_NEAR(e / order, 1.0, 1e-9) << to_string(family) << order;
            std::set<std::pair<double, double>> distinct;
            for (const auto& p : t.points) {
                distinct.insert({std::round(p.real() * 1e9), std::round(p.imag() * 1e9)});
            }
            EXPECT_EQ(distinct.size(), static_cast<std::size_t>(order));
        }
    }
}

TEST(Constellation, UnsupportedOrdersThrow) {
    EXPECT_THROW(make_constellation(LinearFamily::apsk, 8), UnsupportedModulation);
    EXPECT_THROW(make_constellation(LinearFamily::psk, 3), UnsupportedModulation);
    EXPECT_THROW(make_constellation(LinearFamily::qam, 512), UnsupportedModulation);
}

TEST(Constellation, GrayLabelsDifferByOneBitBetweenNeighbours) {
    const auto psk = make_constellation(LinearFamily::psk, 8);
    for (std::size_t a = 0; a < 8; ++a) {
        for (std::size_t b = 0; b < 8; ++b) {
            if (a != b && std::abs(psk.points[a] - psk.points[b]) < 0.8) {
                EXPECT_EQ(popcount_diff(a, b), 1);
            }
        }
    }
    const auto qam = make_constellation(LinearFamily::qam, 64);
    const double step = 2.0 / std::sqrt(42.0);
    for (std::size_t a = 0; a < 64; ++a) {
        for (std::size_t b = 0; b < 64; ++b) {
            if (a != b && std::abs(std::abs(qam.points[a] - qam.points[b]) - step) < 1e-9) {
                EXPECT_EQ(popcount_diff(a, b), 1);
            }
        }
    }
}

TEST(Constellation, DemapRecoversBitsForEveryTable) {
    Rng rng(4);
    const std::vector<std::pair<LinearFamily, int>> tables{
        {LinearFamily::ask, 8}, {LinearFamily::psk, 16}, {LinearFamily::qam, 256},
        {LinearFamily::qam, 32}, {LinearFamily::apsk, 32}, {LinearFamily::apsk, 16}};
    for (const auto& [family, order] : tables) {
        const auto t = make_constellation(family, order);
        Bits bits(static_cast<std::size_t>(t.bits()) * 300);
        for (auto& b : bits) {
            b = static_cast<std::uint8_t>(uniform_int(rng, 0, 1));
        }
        EXPECT_EQ(demap_nearest(map_symbols(bits, t), t), bits);
    }
}

TEST(Constellation, PartialGroupIsPadded) {
    const auto t = make_constellation(LinearFamily::qam, 16);
    const Bits bits{1, 0, 1, 1, 0, 1};
    EXPECT_EQ(map_symbols(bits, t).size(), 2U);
}

TEST(Rrc, UnitEnergyAndSymmetric) {
    for (double beta : {0.1, 0.25, 0.5, 0.9}) {
        const auto h = rrc_taps(beta, 8);
        ASSERT_EQ(h.size(), 97U);
        double e = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) {
            e += h[i] * h[i];
            EXPECT_NEAR(h[i], h[h.size() - 1 - i], 1e-12);
        }
        EXPECT_NEAR(e, 1.0, 1e-12);
    }
}

TEST(Resample, UnitRatioIsIdentity) {
    Rng rng(1);
    std::vector<cdouble> x(1000);
    for (auto& v : x) {
        v = complex_gaussian(rng, 1.0);
    }
    const auto y = resample(x, Ratio{1, 1});
    ASSERT_EQ(y.size(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_LT(std::abs(y[i] - x[i]), 1e-3);
    }
    const auto z = resample(x, Ratio{3, 3});
    EXPECT_EQ(z.size(), x.size());
}

TEST(Resample, ToneMovesToScaledFrequency) {
    const std::size_t n = 8192;
    const auto x = tone(n, 0.1);
    const auto y = resample(x, Ratio{2, 1});
    ASSERT_EQ(y.size(), 2 * n);
    const std::size_t nfft = 8192;
    const auto Y = fft::forward(std::span<const cdouble>(y).subspan(4096, nfft));
    const double f = fft::bin_frequency(fft::peak_bin(Y), nfft);
    EXPECT_NEAR(f, 0.05, 1.0 / nfft);
}

TEST(Resample, DecimatedToneAndLength) {
    const auto x = tone(7000, 0.1);
    const auto y = resample(x, Ratio{3, 7});
    EXPECT_EQ(y.size(), 7000U * 3 / 7);
    const auto Y = fft::forward(std::span<const cdouble>(y).subspan(500, 2048));
    EXPECT_NEAR(fft::bin_frequency(fft::peak_bin(Y), 2048), 0.1 * 7.0 / 3.0, 1.0 / 2048);
    // the passband holds its amplitude
    double amp = 0.0;
    for (std::size_t i = 500; i < 2500; ++i) {
        amp += std::abs(y[i]) / 2000.0;
    }
    EXPECT_NEAR(amp, 1.0, 0.01);
}

TEST(Resample, WhiteNoiseLength) {
    Rng rng(9);
    std::vector<cdouble> x(10007);
    for (auto& v : x) {
        v = complex_gaussian(rng, 1.0);
    }
    EXPECT_EQ(resample(x, Ratio{3, 7}).size(), 10007U * 3 / 7);
}

TEST(Resample, AliasRejectionAtLeast60dB) {
    // A tone above the output Nyquist must be suppressed by the anti-alias filter.
    const auto x = tone(20000, 0.3);
    const auto y = resample(x, Ratio{1, 2});
    double p = 0.0;
    for (std::size_t i = 1000; i < y.size() - 1000; ++i) {
        p += std::norm(y[i]);
    }
    p /= static_cast<double>(y.size() - 2000);
    EXPECT_LT(10.0 * std::log10(p), -60.0);
}

TEST(Resample, EmptyOutputThrows) {
    const std::vector<cdouble> x(2, cdouble{1.0, 0.0});
    EXPECT_THROW(resample(x, Ratio{1, 5}), ValidationError);
}

TEST(Resample, RatioApproximationWithinTwoPercent) {
    for (double r = 0.3; r < 20.0; r *= 1.037) {
        const auto q = approximate_ratio(r);
        EXPECT_LT(std::abs(q.value() - r) / r, 0.02) << r;
    }
}

TEST(Ofdm, SymbolStrideIsCarriersPlusPrefix) {
    ProtocolSpec s;
    s.modulation = Ofdm{64, 16, LinearFamily::qam, 4};
    s.samples_per_symbol = 80;
    EXPECT_EQ(generation_symbol_length(s), 80);
    std::vector<cdouble> bins(64 * 3, cdouble{1.0, 0.0});
    const auto x = ofdm_modulate(bins, 64, 16);
    ASSERT_EQ(x.size(), 3U * 80U);
    for (std::size_t i = 0; i < 16; ++i) {
        EXPECT_NEAR(std::abs(x[i] - x[64 + i]), 0.0, 1e-12);
    }
}

TEST(Ofdm, RoundTripRecoversCarriers) {
    Rng rng(12);
    const int n = 64;
    const int cp = 16;
    const auto t = make_constellation(LinearFamily::qam, 16);
    std::vector<cdouble> bins(static_cast<std::size_t>(n) * 5, cdouble{0.0, 0.0});
    for (std::size_t s = 0; s < 5; ++s) {
        for (int i = 0; i < ofdm_active_carriers(n); ++i) {
            bins[s * n + ofdm_active_bin(i, n)] = pick(rng, t.points);
        }
    }
    const auto x = ofdm_modulate(bins, n, cp);
    for (std::size_t s = 0; s < 5; ++s) {
        const std::span<const cdouble> body(x.data() + s * (n + cp) + cp, static_cast<std::size_t>(n));
        const auto X = fft::forward(body);
        for (int k = 0; k < n; ++k) {
            EXPECT_LT(std::abs(X[static_cast<std::size_t>(k)] / std::sqrt(64.0) - bins[s * n + k]), 1e-9);
        }
    }
}

TEST(Ofdm, ActiveCarriersSkipDc) {
    std::set<std::size_t> used;
    for (int i = 0; i < ofdm_active_carriers(16); ++i) {
        used.insert(ofdm_active_bin(i, 16));
    }
    EXPECT_EQ(used.size(), 10U);
    EXPECT_EQ(used.count(0), 0U);
}

TEST(Css, DechirpGivesSingleDominantBin) {
    const int sf = 7;
    const int os = 4;
    const int n = 1 << sf;
    const auto base = css_symbol(0, sf, os);
    for (int value : {0, 1, 37, 100, 127}) {
        const auto sym = css_symbol(value, sf, os);
        std::vector<cdouble> d(static_cast<std::size_t>(n));
        for (int c = 0; c < n; ++c) {
            const auto i = static_cast<std::size_t>(c * os);
            d[static_cast<std::size_t>(c)] = sym[i] * std::conj(base[i]);
        }
        auto mag = fft::forward(d);
        std::vector<double> p(mag.size());
        std::transform(mag.begin(), mag.end(), p.begin(), [](cdouble v) { return std::norm(v); });
        const auto peak = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
        EXPECT_EQ(peak, static_cast<std::size_t>(value));
        const double top = p[peak];
        p[peak] = 0.0;
        const double second = *std::max_element(p.begin(), p.end());
        EXPECT_GT(10.0 * std::log10(top / std::max(second, 1e-300)), 20.0);
    }
}

TEST(Dsss, CodeCorrelationPeaksAreOneSymbolApart) {
    ProtocolSpec spec;
    spec.modulation = Dsss{SpreadingCode{CodeKind::barker, 11, 0}, LinearFamily::psk, 2};
    spec.samples_per_symbol = 4;
    spec.rolloff = 0.35;
    spec.frame.sync = {AlternatingZeroOne{}, 8};
    spec.frame.header_bits = 8;
    spec.frame.payload_min = spec.frame.payload_max = 40;
    Rng rng(77);
    const auto frame = frame_bits(spec, rng);
    const auto x = modulate_frames(spec, {frame}, rng);
    // matched filter, sample at chip instants
    const auto taps = rrc_taps(0.35, 4);
    std::vector<cdouble> chips;
    for (std::size_t c = 0;; ++c) {
        const std::size_t centre = c * 4 + taps.size() - 1;
        if (centre >= x.size()) {
            break;
        }
        cdouble acc{0.0, 0.0};
        for (std::size_t k = 0; k < taps.size(); ++k) {
            acc += x[centre - k] * taps[k];
        }
        chips.push_back(acc);
    }
    const auto code = spreading_chips(std::get<Dsss>(spec.modulation).code);
    std::vector<double> corr(chips.size() - code.size(), 0.0);
    for (std::size_t lag = 0; lag < corr.size(); ++lag) {
        cdouble acc{0.0, 0.0};
        for (std::size_t k = 0; k < code.size(); ++k) {
            acc += chips[lag + k] * code[k];
        }
        corr[lag] = std::abs(acc);
    }
    // Peaks (|corr| close to the code length) appear at multiples of 11 chips.
    std::vector<std::size_t> peaks;
    for (std::size_t lag = 0; lag < corr.size(); ++lag) {
        if (corr[lag] > 0.8 * 11.0) {
            peaks.push_back(lag);
        }
    }
    ASSERT_GE(peaks.size(), 40U);
    for (std::size_t i = 1; i < peaks.size(); ++i) {
        EXPECT_EQ((peaks[i] - peaks[0]) % 11, 0U);
    }
    EXPECT_EQ(peaks[1] - peaks[0], 11U);
}

TEST(Synthesize, ContinuousQpskLengthAndPower) {
    ProtocolSpec spec;
    spec.modulation = Linear{LinearFamily::psk, 4};
    spec.frame.sync = {AllOne{}, 16};
    spec.frame.header_bits = 16;
    spec.frame.payload_min = spec.frame.payload_max = 256;
    spec.samples_per_symbol = 4;
    spec.rolloff = 0.35;
    spec.bandwidth_fraction = 0.3;
    Rng rng(1);
    const auto x = synthesize_instance(spec, 16384, rng, 20e6);
    ASSERT_EQ(x.size(), 16384U);
    EXPECT_NEAR(mean_power(x.samples), 1.0, 1e-6);
    EXPECT_TRUE(all_finite(x.samples));
    EXPECT_DOUBLE_EQ(x.sample_rate, 20e6);
}

TEST(Synthesize, BpskOccupiedBandwidthMatchesFraction) {
    ProtocolSpec spec;
    spec.modulation = Linear{LinearFamily::psk, 2};
    spec.frame.sync = {AlternatingZeroOne{}, 32};
    spec.frame.header_bits = 16;
    spec.frame.payload_min = spec.frame.payload_max = 400;
    spec.samples_per_symbol = 4;
    spec.rolloff = 0.35;
    spec.bandwidth_fraction = 0.25;
    Rng rng(2718);
    const auto x = synthesize_instance(spec, 1 << 16, rng);
    const double bw = occupied_bandwidth_99(x.samples, 1024);
    EXPECT_GT(bw, 0.25 * 0.8);
    EXPECT_LT(bw, 0.25 * 1.2);
}

TEST(Synthesize, PowerNormalizedForEveryFamily) {
    for (int f = 0; f < 6; ++f) {
        const auto family = static_cast<SchemeFamily>(f);
        const auto spec = spec_for(family, Mode::continuous, 100 + static_cast<std::uint64_t>(f));
        Rng rng(5);
        const auto x = synthesize_instance(spec, 16384, rng);
        EXPECT_EQ(x.size(), 16384U) << to_string(family);
        EXPECT_NEAR(mean_power(x.samples), 1.0, 1e-6) << to_string(family);
        EXPECT_TRUE(all_finite(x.samples));
    }
}

TEST(Synthesize, BurstInstancesHavePausesAndUnitActivePower) {
    for (int f = 0; f < 6; ++f) {
        const auto family = static_cast<SchemeFamily>(f);
        const auto spec = spec_for(family, Mode::burst, 300 + static_cast<std::uint64_t>(f));
        Rng rng(6);
        const auto x = synthesize_instance(spec, 16384, rng);
        ASSERT_EQ(x.size(), 16384U);
        EXPECT_TRUE(all_finite(x.samples));
        // power of the clearly active samples sits near one
        double acc = 0.0;
        std::size_t n = 0;
        for (const auto& v : x.samples) {
            if (std::norm(v) > 1e-6) {
                acc += std::norm(v);
                ++n;
            }
        }
        ASSERT_GT(n, 0U);
        EXPECT_NEAR(acc / static_cast<double>(n), 1.0, 0.15) << to_string(family);
    }
}

TEST(Synthesize, DeterministicForInstanceSeed) {
    const auto spec = sample_protocol(5, 3, GeneratorConfig{});
    Rng a(42), b(42);
    EXPECT_EQ(synthesize_instance(spec, 4096, a).samples, synthesize_instance(spec, 4096, b).samples);
}

TEST(Synthesize, TooShortInstanceThrows) {
    ProtocolSpec spec;
    spec.modulation = Css{9, 0.25};
    spec.samples_per_symbol = 4;
    spec.bandwidth_fraction = 0.9;
    Rng rng(1);
    EXPECT_THROW(synthesize_instance(spec, 64, rng), SignalTooShort);
}
