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

#ifndef RFEMBED_FEATSTAT_HPP
#define RFEMBED_FEATSTAT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

#include "rfembed/error.hpp"
#include "rfembed/fft.hpp"
#include "rfembed/signal.hpp"

namespace rfembed {

inline constexpr std::size_t kNumModFeatures = 26;

inline constexpr std::array<std::string_view, kNumModFeatures> kModFeatureNames{
    "gamma_max", "sigma_ap", "sigma_dp", "P",   "sigma_aa", "sigma_af", "sigma_a", "mu42_a", "mu42_f",
    "M20",       "M21",      "M22",      "M40", "M41",      "M42",      "M43",     "M60",    "M62",
    "M63",       "C20",      "C21",      "C40", "C41",      "C42",      "C60",     "C63"};

using ModFeatureVector = std::array<double, kNumModFeatures>;

struct InstantaneousComponents {
    std::vector<double> amplitude;
    std::vector<double> phase;      // unwrapped, best-fit line removed
    std::vector<double> frequency;  // cycles/sample, one shorter than the input
};

namespace detail {

// Increments are taken in (-pi, pi]; a jump of exactly half a turn (a real
// signal crossing zero) always unwraps forward so rotations agree. Samples
// with no defined phase (exact zeros) hold the previous value.
inline std::vector<double> unwrap(std::span<const cdouble> x) {
    std::vector<double> ph(x.size(), 0.0);
    const double silent = mean_power(x) * 1e-24;
    bool have = false;
    double last = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        if (std::norm(x[n]) <= silent) {
            ph[n] = n > 0 ? ph[n - 1] : 0.0;
            continue;
        }
        const double a = std::arg(x[n]);
        if (!have) {
            ph[n] = a;
            for (std::size_t k = 0; k < n; ++k) {
                ph[k] = a;
            }
            have = true;
        } else {
            double d = a - last;
            d -= kTwoPi * std::round(d / kTwoPi);
            if (d <= -std::numbers::pi + 1e-9) {
                d += kTwoPi;
            }
            ph[n] = ph[n - 1] + d;
        }
        last = a;
    }
    return ph;
}

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
    double fourth = 0.0;  // central
};

template <typename Keep>
Moments central_moments(std::span<const double> v, Keep keep) {
    Moments m;
    std::size_t n = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (keep(i)) {
            m.mean += v[i];
            ++n;
        }
    }
    if (n == 0) {
        return m;
    }
    m.mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (keep(i)) {
            const double d = v[i] - m.mean;
            m.variance += d * d;
            m.fourth += d * d * d * d;
        }
    }
    m.variance /= static_cast<double>(n);
    m.fourth /= static_cast<double>(n);
    return m;
}

// Non-excess kurtosis; zero for a (numerically) constant sequence.
inline double kurtosis(const Moments& m) {
    return m.variance > 1e-20 ? m.fourth / (m.variance * m.variance) : 0.0;
}

inline void require_power(std::span<const cdouble> x) {
    if (!(mean_power(x) > 0.0)) {
        throw ValidationError("signal has zero power");
    }
    if (!all_finite(x)) {
        throw ValidationError("signal contains non-finite samples");
    }
}

}  // namespace detail

inline InstantaneousComponents instantaneous_components(std::span<const cdouble> x) {
    require(x.size() >= 3, "instantaneous components need at least 3 samples");
    InstantaneousComponents c;
    c.amplitude.resize(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
        c.amplitude[n] = std::abs(x[n]);
    }
    const auto ph = detail::unwrap(x);
    c.frequency.resize(x.size() - 1);
    for (std::size_t n = 0; n + 1 < x.size(); ++n) {
        c.frequency[n] = (ph[n + 1] - ph[n]) / kTwoPi;
    }
    // Least-squares line over n = 0..N-1.
    const double N = static_cast<double>(x.size());
    const double tbar = (N - 1.0) / 2.0;
    double pbar = 0.0;
    for (double v : ph) {
        pbar += v;
    }
    pbar /= N;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        const double t = static_cast<double>(n) - tbar;
        sxy += t * (ph[n] - pbar);
        sxx += t * t;
    }
    const double slope = sxy / sxx;
    c.phase.resize(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
        c.phase[n] = ph[n] - pbar - slope * (static_cast<double>(n) - tbar);
    }
    return c;
}

// gamma_max, sigma_ap, sigma_dp, P, sigma_aa, sigma_af, sigma_a, mu42_a, mu42_f.
inline std::array<double, 9> nandi_azzouz(std::span<const cdouble> x) {
    require(x.size() >= 256, "Nandi-Azzouz features need at least 256 samples");
    detail::require_power(x);
    const auto c = instantaneous_components(x);
    const std::size_t N = x.size();

    double ma = 0.0;
    for (double a : c.amplitude) {
        ma += a;
    }
    ma /= static_cast<double>(N);
    std::vector<double> acn(N);
    std::vector<std::uint8_t> strong(N);
    for (std::size_t n = 0; n < N; ++n) {
        const double an = c.amplitude[n] / ma;
        acn[n] = an - 1.0;
        strong[n] = an > 1.0 ? 1 : 0;
    }

    std::array<double, 9> f{};
    {
        std::vector<cdouble> a(acn.begin(), acn.end());
        double peak = 0.0;
        for (const auto& v : fft::forward(a)) {
            peak = std::max(peak, std::norm(v));
        }
        f[0] = peak / static_cast<double>(N);
    }

    const auto on_strong = [&](std::size_t i) { return strong[i] != 0; };
    const auto all = [](std::size_t) { return true; };
    {
        const auto dp = detail::central_moments(c.phase, on_strong);
        std::vector<double> absphi(N);
        for (std::size_t n = 0; n < N; ++n) {
            absphi[n] = std::abs(c.phase[n] - dp.mean);
        }
        f[1] = std::sqrt(detail::central_moments(absphi, on_strong).variance);
        f[2] = std::sqrt(dp.variance);
    }
    {
        // Positive frequencies occupy the lower FFT bin indices 1..N/2-1.
        const auto X = fft::forward(x);
        double lower = 0.0;
        double upper = 0.0;
        for (std::size_t k = 1; k < N; ++k) {
            if (2 * k == N) {
                continue;
            }
            (2 * k < N ? lower : upper) += std::norm(X[k]);
        }
        f[3] = lower + upper > 0.0 ? (lower - upper) / (lower + upper) : 0.0;
    }
    {
        std::vector<double> absa(N);
        for (std::size_t n = 0; n < N; ++n) {
            absa[n] = std::abs(acn[n]);
        }
        f[4] = std::sqrt(detail::central_moments(absa, all).variance);
    }
    const auto fm = detail::central_moments(c.frequency, all);
    {
        std::vector<double> absf(c.frequency.size());
        for (std::size_t n = 0; n < absf.size(); ++n) {
            absf[n] = std::abs(c.frequency[n] - fm.mean);
        }
        f[5] = std::sqrt(detail::central_moments(absf, on_strong).variance);
    }
    const auto am = detail::central_moments(acn, all);
    f[6] = std::sqrt(am.variance);
    f[7] = detail::kurtosis(am);
    f[8] = detail::kurtosis(fm);
    return f;
}

struct MomentSet {
    cdouble M20, M21, M22, M40, M41, M42, M43, M60, M61, M62, M63;
};

// Mixed moments E[x^(p-q) conj(x)^q] of the unit-power-normalized signal.
inline MomentSet mixed_moments(std::span<const cdouble> x) {
    detail::require_power(x);
    const double g = 1.0 / std::sqrt(mean_power(x));
    MomentSet m{};
    for (const auto& raw : x) {
        const cdouble v = raw * g;
        const cdouble c = std::conj(v);
        const cdouble v2 = v * v;
        const cdouble c2 = c * c;
        const double p = std::norm(v);
        m.M20 += v2;
        m.M21 += p;
        m.M22 += c2;
        m.M40 += v2 * v2;
        m.M41 += v2 * p;
        m.M42 += p * p;
        m.M43 += c2 * p;
        m.M60 += v2 * v2 * v2;
        m.M61 += v2 * v2 * p;
        m.M62 += v2 * p * p;
        m.M63 += p * p * p;
    }
    const double inv = 1.0 / static_cast<double>(x.size());
    for (cdouble* q : {&m.M20, &m.M21, &m.M22, &m.M40, &m.M41, &m.M42, &m.M43, &m.M60, &m.M61, &m.M62, &m.M63}) {
        *q *= inv;
    }
    return m;
}

// |M20..M63| (M61 left out) then |C20, C21, C40, C41, C42, C60, C63|.
inline std::array<double, 17> moments_cumulants(std::span<const cdouble> x) {
    require(x.size() >= 256, "moment features need at least 256 samples");
    const auto m = mixed_moments(x);
    const cdouble C20 = m.M20;
    const cdouble C21 = m.M21;
    const cdouble C40 = m.M40 - 3.0 * m.M20 * m.M20;
    const cdouble C41 = m.M41 - 3.0 * m.M20 * m.M21;
    const cdouble C42 = m.M42 - std::norm(m.M20) - 2.0 * m.M21 * m.M21;
    const cdouble C60 = m.M60 - 15.0 * m.M20 * m.M40 + 30.0 * m.M20 * m.M20 * m.M20;
    // Conjugate-symmetric form; it reduces to M63 - 6 M20 M41 - 9 M21 M42 +
    // 18 M20^2 M21 + 12 M21^3 when M20 and M41 are real, and stays invariant
    // under phase rotation when they are not.
    const cdouble C63 = m.M63 - 3.0 * m.M20 * m.M43 - 3.0 * m.M22 * m.M41 - 9.0 * m.M21 * m.M42 +
                        18.0 * std::norm(m.M20) * m.M21 + 12.0 * m.M21 * m.M21 * m.M21;
    return {std::abs(m.M20), std::abs(m.M21), std::abs(m.M22), std::abs(m.M40), std::abs(m.M41), std::abs(m.M42),
            std::abs(m.M43), std::abs(m.M60), std::abs(m.M62), std::abs(m.M63), std::abs(C20), std::abs(C21),
            std::abs(C40),   std::abs(C41),   std::abs(C42),   std::abs(C60),   std::abs(C63)};
}

inline ModFeatureVector modulation_features(std::span<const cdouble> x) {
    ModFeatureVector out{};
    const auto na = nandi_azzouz(x);
    const auto mc = moments_cumulants(x);
    std::copy(na.begin(), na.end(), out.begin());
    std::copy(mc.begin(), mc.end(), out.begin() + na.size());
    return out;
}

inline ModFeatureVector modulation_features(const ComplexSignal& x) { return modulation_features(x.samples); }

}  // namespace rfembed

#endif
