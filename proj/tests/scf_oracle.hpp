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

// Reference signals and a brute-force time-smoothing SCF used to check the
// frequency-smoothing estimator.

#ifndef RFEMBED_TESTS_SCF_ORACLE_HPP
#define RFEMBED_TESTS_SCF_ORACLE_HPP

#include <array>
#include <cmath>
#include <vector>

#include "rfembed/fft.hpp"
#include "rfembed/waveform.hpp"

namespace testing_oracle {

using rfembed::cdouble;

// Noiseless BPSK, 8 samples per symbol (symbol rate 0.125), RRC roll-off 0.35.
inline std::vector<cdouble> bpsk_8sps(std::size_t n, std::uint64_t seed) {
    rfembed::Rng rng(seed);
    std::vector<cdouble> sym(n / 8 + 32);
    for (auto& s : sym) {
        s = rfembed::uniform_int(rng, 0, 1) ? cdouble{1.0, 0.0} : cdouble{-1.0, 0.0};
    }
    const auto taps = rfembed::rrc_taps(0.35, 8);
    const auto shaped = rfembed::upsample_filter(sym, 8, taps);
    return {shaped.begin() + 96, shaped.begin() + 96 + static_cast<std::ptrdiff_t>(n)};
}

// Time-smoothing SCF: the signal is frequency-shifted by +-alpha/2, cut into
// 256-sample blocks, and the block cross-spectra are averaged. Alpha runs on
// a 0.0005 grid; the result is, for each 0.01-wide alpha column, the largest
// magnitude over alpha and over 64 spectral bins, normalized by the total of
// the alpha = 0 spectrum.
inline std::array<double, 50> tsm_column_peaks(const std::vector<cdouble>& x) {
    constexpr std::size_t L = 256;
    constexpr std::size_t coarse = 64;
    const std::size_t blocks = x.size() / L;
    std::array<double, 50> peaks{};
    double psd_total = 0.0;
    std::vector<cdouble> u(L), v(L);
    for (int j = 0; j < 1000; ++j) {
        const double alpha = 0.0005 * j;
        std::vector<cdouble> acc(L, cdouble{0.0, 0.0});
        for (std::size_t b = 0; b < blocks; ++b) {
            for (std::size_t m = 0; m < L; ++m) {
                const double n = static_cast<double>(b * L + m);
                const cdouble rot = std::polar(1.0, -M_PI * alpha * n);
                u[m] = x[b * L + m] * rot;
                v[m] = x[b * L + m] * std::conj(rot);
            }
            const auto U = rfembed::fft::forward(u);
            const auto V = rfembed::fft::forward(v);
            for (std::size_t k = 0; k < L; ++k) {
                acc[k] += U[k] * std::conj(V[k]);
            }
        }
        const auto S = rfembed::fft::shift<cdouble>(acc);
        const double scale = 1.0 / (static_cast<double>(blocks) * L * (L / coarse));
        double best = 0.0;
        double total = 0.0;
        for (std::size_t c = 0; c < coarse; ++c) {
            cdouble sum{0.0, 0.0};
            for (std::size_t k = c * (L / coarse); k < (c + 1) * (L / coarse); ++k) {
                sum += S[k];
            }
            best = std::max(best, std::abs(sum) * scale);
            total += std::abs(sum) * scale;
        }
        if (j == 0) {
            psd_total = total;
        }
        auto& slot = peaks[static_cast<std::size_t>(j / 20)];
        slot = std::max(slot, best);
    }
    for (auto& p : peaks) {
        p /= psd_total;
    }
    return peaks;
}

}  // namespace testing_oracle

#endif
