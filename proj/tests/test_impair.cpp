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

#include <map>
#include <numbers>
#include <numeric>

#include "rfembed/impair.hpp"

using namespace rfembed;

namespace {

ComplexSignal tone(std::size_t n, double f, double amplitude = 1.0) {
    ComplexSignal s{std::vector<cdouble>(n), 20e6};
    for (std::size_t i = 0; i < n; ++i) {
        s.samples[i] = std::polar(amplitude, kTwoPi * f * static_cast<double>(i));
    }
    return s;
}

ComplexSignal white(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    ComplexSignal s{std::vector<cdouble>(n), 20e6};
    for (auto& v : s.samples) {
        v = complex_gaussian(rng, 1.0);
    }
    return s;
}

const std::vector<ChannelModel> kTdl{ChannelModel::tdl_a, ChannelModel::tdl_b, ChannelModel::tdl_c,
                                     ChannelModel::tdl_d, ChannelModel::tdl_e};

}  // namespace

TEST(PhaseCfo, ZeroIsIdentity) {
    const auto x = white(1000, 1);
    const auto y = apply_phase_cfo(x, 0.0, 0.0);
    EXPECT_EQ(y.samples, x.samples);
}

TEST(PhaseCfo, PiPhaseNegates) {
    const auto x = white(1000, 2);
    const auto y = apply_phase_cfo(x, std::numbers::pi, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_LT(std::abs(y.samples[i] + x.samples[i]), 1e-12);
    }
}

TEST(PhaseCfo, ShiftsTonePeakToExpectedBin) {
    const std::size_t n = 4096;
    for (double cfo : {0.25, -0.125, 0.0371, 0.49}) {
        const auto y = apply_phase_cfo(tone(n, 0.0), 0.3, cfo);
        const auto Y = fft::forward(y.samples);
        const auto expected = static_cast<std::size_t>(
            (static_cast<long long>(std::llround(cfo * static_cast<double>(n))) + static_cast<long long>(n)) %
            static_cast<long long>(n));
        EXPECT_EQ(fft::peak_bin(Y), expected) << cfo;
    }
}

TEST(PhaseCfo, PreservesEnergy) {
    const auto x = white(100000, 3);
    const auto y = apply_phase_cfo(x, 1.234, 0.3141);
    EXPECT_LT(std::abs(energy(y.samples) / energy(x.samples) - 1.0), 1e-9);
}

TEST(PhaseCfo, RejectsAliasingOffsets) {
    const auto x = white(16, 4);
    EXPECT_THROW(apply_phase_cfo(x, 0.0, 0.5), ValidationError);
    EXPECT_THROW(apply_phase_cfo(x, 0.0, -0.7), ValidationError);
}

TEST(Tdl, PublishedTdlATableNormalizes) {
    // Powers of TR 38.901 Table 7.7.2-1 as printed, in table order.
    const std::vector<double> published{-13.4, 0.0,   -2.2,  -4.0,  -6.0,  -8.2,  -9.9,  -10.5,
                                        -7.5,  -15.9, -6.6,  -16.7, -12.4, -15.2, -10.8, -11.3,
                                        -12.7, -16.2, -18.3, -18.9, -16.6, -19.9, -29.7};
    double total = 0.0;
    for (double p : published) {
        total += std::pow(10.0, p / 10.0);
    }
    const auto profile = builtin_tdl_profile(ChannelModel::tdl_a);
    ASSERT_EQ(profile.taps.size(), published.size());
    const auto powers = normalized_tap_powers(profile);
    double sum = 0.0;
    std::vector<double> got;
    for (std::size_t i = 0; i < powers.size(); ++i) {
        sum += powers[i];
        got.push_back(powers[i] * total);
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
    // Same multiset of linear powers as the published table.
    std::vector<double> want;
    for (double p : published) {
        want.push_back(std::pow(10.0, p / 10.0));
    }
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    for (std::size_t i = 0; i < want.size(); ++i) {
        EXPECT_NEAR(got[i], want[i], 1e-12);
    }
}

TEST(Tdl, AllProfilesNormalizedSortedAndNonNegative) {
    const std::map<ChannelModel, std::size_t> tap_counts{{ChannelModel::tdl_a, 23}, {ChannelModel::tdl_b, 23},
                                                         {ChannelModel::tdl_c, 24}, {ChannelModel::tdl_d, 14},
                                                         {ChannelModel::tdl_e, 15}};
    for (auto m : kTdl) {
        const auto p = builtin_tdl_profile(m);
        EXPECT_NO_THROW(validate(p));
        EXPECT_EQ(p.taps.size(), tap_counts.at(m)) << to_string(m);
        const auto w = normalized_tap_powers(p);
        EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-9);
        EXPECT_DOUBLE_EQ(p.taps.front().delay, 0.0);
    }
}

TEST(Tdl, RicianKFactors) {
    EXPECT_FALSE(k_factor_db(builtin_tdl_profile(ChannelModel::tdl_a)).has_value());
    EXPECT_NEAR(*k_factor_db(builtin_tdl_profile(ChannelModel::tdl_d)), 13.3, 1e-9);
    EXPECT_NEAR(*k_factor_db(builtin_tdl_profile(ChannelModel::tdl_e)), 22.0, 1e-9);
}

TEST(Tdl, SingleTapScalesByComplexGain) {
    const TdlProfile single{ChannelModel::none, {{0.0, 0.0, false}}};
    const auto x = white(512, 5);
    Rng rng(6);
    std::size_t below_one = 0;
    double mean_gain = 0.0;
    const int trials = 4000;
    for (int t = 0; t < trials; ++t) {
        const auto y = apply_tdl(x, single, 100e-9, 20e6, rng);
        const cdouble g = y.samples[0] / x.samples[0];
        for (std::size_t i = 0; i < x.size(); ++i) {
            ASSERT_LT(std::abs(y.samples[i] - g * x.samples[i]), 1e-12);
        }
        const double ratio = energy(y.samples) / energy(x.samples);
        EXPECT_NEAR(ratio, std::norm(g), 1e-9);
        mean_gain += ratio / trials;
        below_one += ratio < 1.0 ? 1 : 0;
    }
    // |g|^2 is unit-mean exponential: P(|g|^2 < 1) = 1 - 1/e.
    EXPECT_NEAR(mean_gain, 1.0, 0.06);
    EXPECT_NEAR(static_cast<double>(below_one) / trials, 1.0 - std::exp(-1.0), 0.03);
}

TEST(Tdl, ExpectedPowerIsPreserved) {
    const auto x = white(4096, 7);
    const double px = mean_power(x.samples);
    for (auto m : kTdl) {
        const auto p = builtin_tdl_profile(m);
        Rng rng(8);
        double acc = 0.0;
        for (int t = 0; t < 1000; ++t) {
            acc += mean_power(apply_tdl(x, p, 300e-9, 20e6, rng).samples) / px;
        }
        acc /= 1000.0;
        EXPECT_GE(acc, 0.9) << to_string(m);
        EXPECT_LE(acc, 1.1) << to_string(m);
    }
}

TEST(Tdl, DelaysScaleWithSpreadAndRate) {
    const auto p = builtin_tdl_profile(ChannelModel::tdl_a);
    Rng rng(9);
    // 9.6586 * 100 ns * 20 MHz = 19.3 -> 19 samples of delay.
    EXPECT_EQ(tdl_realization(p, 100e-9, 20e6, rng).size(), 20U);
    EXPECT_EQ(tdl_realization(p, 100e-9, 2e5, rng).size(), 1U);
}

TEST(Tdl, SameSeedSameOutput) {
    const auto x = white(2048, 10);
    const auto p = builtin_tdl_profile(ChannelModel::tdl_c);
    Rng a(11), b(11);
    EXPECT_EQ(apply_tdl(x, p, 100e-9, 20e6, a).samples, apply_tdl(x, p, 100e-9, 20e6, b).samples);
}

TEST(Tdl, DelayLongerThanSignalThrows) {
    const auto x = white(10, 12);
    Rng rng(1);
    EXPECT_THROW(apply_tdl(x, builtin_tdl_profile(ChannelModel::tdl_a), 1e-6, 20e6, rng), ValidationError);
}

TEST(Awgn, NoisePowerFormula) {
    EXPECT_DOUBLE_EQ(noise_power_for_snr(1.0, 0.0, 1.0), 1.0);
    EXPECT_NEAR(noise_power_for_snr(1.0, 10.0, 0.25), 0.4, 1e-15);
}

TEST(Awgn, EmpiricalNoiseStatistics) {
    const std::size_t n = 100000;
    const ComplexSignal x{std::vector<cdouble>(n, cdouble{1.0, 0.0}), 1.0};
    for (const auto& [snr, bw] : std::vector<std::pair<double, double>>{{0.0, 1.0}, {10.0, 0.25}}) {
        Rng rng(13);
        const auto y = apply_awgn(x, snr, bw, rng);
        cdouble mean{0.0, 0.0};
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const cdouble e = y.samples[i] - x.samples[i];
            mean += e / static_cast<double>(n);
            var += std::norm(e) / static_cast<double>(n);
        }
        const double pn = noise_power_for_snr(1.0, snr, bw);
        EXPECT_LT(std::abs(mean), 0.02);
        EXPECT_NEAR(var / pn, 1.0, 0.05);
    }
}

TEST(Awgn, RejectsBadArguments) {
    const auto x = white(100, 14);
    Rng rng(1);
    EXPECT_THROW(apply_awgn(x, std::numeric_limits<double>::infinity(), 0.5, rng), ValidationError);
    EXPECT_THROW(apply_awgn(x, std::nan(""), 0.5, rng), ValidationError);
    EXPECT_THROW(apply_awgn(x, 10.0, 0.0, rng), ValidationError);
    const ComplexSignal silent{std::vector<cdouble>(100), 1.0};
    EXPECT_THROW(apply_awgn(silent, 10.0, 0.5, rng), ValidationError);
}

TEST(SnrEstimate, PureNoiseReportsNoBand) {
    for (std::uint64_t seed = 20; seed < 25; ++seed) {
        EXPECT_LE(estimate_inband_snr(white(1 << 16, seed)), 3.0);
    }
}

TEST(SnrEstimate, ToneInNoiseWithinOneAndAHalfDb) {
    // Tone on a bin centre occupies three Hann bins of 256.
    const double bw = 3.0 / 256.0;
    Rng rng(30);
    for (int t = 0; t < 5; ++t) {
        const auto y = apply_awgn(tone(1 << 16, 0.125), 20.0, bw, rng);
        EXPECT_NEAR(estimate_inband_snr(y), 20.0, 1.5);
    }
}

TEST(SnrEstimate, NoiselessToneIsVeryHigh) {
    EXPECT_GE(estimate_inband_snr(tone(8192, 0.1234)), 40.0);
}

TEST(SnrEstimate, TooShortThrows) {
    EXPECT_THROW(estimate_inband_snr(white(1000, 1)), ValidationError);
}

TEST(SnrEstimate, CalibrationAcrossSeeds) {
    // The 6 dB band threshold only sees the Hann side bins of the tone once the
    // per-bin SNR clears it, which holds from roughly 8 dB in-band upwards.
    const double bw = 3.0 / 256.0;
    for (double snr : {10.0, 17.0, 25.0}) {
        double mean = 0.0;
        for (std::uint64_t t = 0; t < 30; ++t) {
            Rng rng(derive_seed(40, t));
            mean += estimate_inband_snr(apply_awgn(tone(1 << 17, 0.125), snr, bw, rng)) / 30.0;
        }
        EXPECT_NEAR(mean, snr, 0.3) << snr;
    }
}

TEST(Chain, OrderIsPhaseCfoTdlAwgn) {
    const auto x = white(4096, 50);
    ImpairmentConfig c;
    c.phase = 0.7;
    c.cfo_fixed = 0.01;
    c.channel = ChannelModel::tdl_b;
    c.delay_spread = 200e-9;
    c.snr_db = 12.0;
    Rng a(51);
    const auto got = impair(x, c, 0.4, a);

    Rng b(51);
    auto ref = apply_phase_cfo(x, 0.7, 0.01);
    ref = apply_tdl(ref, builtin_tdl_profile(ChannelModel::tdl_b), 200e-9, x.sample_rate, b);
    ref = apply_awgn(ref, 12.0, 0.4, b, active_power(ref.samples));
    EXPECT_EQ(got.samples, ref.samples);
}

TEST(Chain, InfiniteSnrAddsNoNoise) {
    const auto x = white(1024, 52);
    ImpairmentConfig c;
    c.phase = 0.0;
    c.snr_db = std::numeric_limits<double>::infinity();
    Rng rng(1);
    EXPECT_EQ(impair(x, c, 0.5, rng).samples, x.samples);
}

TEST(Chain, ActivePowerIgnoresPauses) {
    std::vector<cdouble> v(1000, cdouble{0.0, 0.0});
    for (std::size_t i = 0; i < 250; ++i) {
        v[i] = cdouble{2.0, 0.0};
    }
    EXPECT_NEAR(active_power(v), 4.0, 1e-12);
}

TEST(Chain, RejectsInvalidConfig) {
    const auto x = white(64, 1);
    Rng rng(1);
    ImpairmentConfig c;
    c.cfo_sigma = -1.0;
    EXPECT_THROW(impair(x, c, 0.5, rng), ConfigError);
    c = {};
    c.channel = ChannelModel::tdl_a;
    c.delay_spread = 0.0;
    EXPECT_THROW(impair(x, c, 0.5, rng), ConfigError);
    EXPECT_EQ(parse_channel_model("TDL-C"), ChannelModel::tdl_c);
    EXPECT_THROW(parse_channel_model("TDL-F"), ConfigError);
}
