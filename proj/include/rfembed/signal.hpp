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

#ifndef RFEMBED_SIGNAL_HPP
#define RFEMBED_SIGNAL_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "error.hpp"

namespace rfembed {

using cdouble = std::complex<double>;
using Rng = std::mt19937_64;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Complex baseband samples. The sample rate is informational; all processing
// works in normalized frequency (cycles/sample).
struct ComplexSignal {
    std::vector<cdouble> samples;
    double sample_rate = 1.0;

    std::size_t size() const { return samples.size(); }
};

inline double mean_power(std::span<const cdouble> x) {
    if (x.empty()) {
        return 0.0;
    }
    double acc = 0.0;
    for (const auto& v : x) {
        acc += std::norm(v);
    }
    return acc / static_cast<double>(x.size());
}

inline double energy(std::span<const cdouble> x) {
    double acc = 0.0;
    for (const auto& v : x) {
        acc += std::norm(v);
    }
    return acc;
}

inline bool all_finite(std::span<const cdouble> x) {
    for (const auto& v : x) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            return false;
        }
    }
    return true;
}

inline void scale_to_unit_power(std::vector<cdouble>& x) {
    const double p = mean_power(x);
    if (p <= 0.0) {
        throw ValidationError("cannot normalize a zero-power signal");
    }
    const double g = 1.0 / std::sqrt(p);
    for (auto& v : x) {
        v *= g;
    }
}

// SplitMix64 finalizer. Every derived seed in the library goes through it.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seed for (master, protocol, epoch, instance). Each coordinate is folded in
// with one mix64 round so neighbouring tuples give unrelated streams.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t protocol_id,
                                    std::uint64_t epoch = 0, std::uint64_t instance = 0) {
    std::uint64_t h = mix64(master);
    h = mix64(h ^ protocol_id);
    h = mix64(h ^ (epoch + 0x5851f42d4c957f2dULL));
    h = mix64(h ^ (instance + 0x14057b7ef767814fULL));
    return h;
}

// Salts used to split one instance seed into independent streams.
enum class Stream : std::uint64_t {
    protocol = 1,
    frame = 2,
    impairment = 3,
    noise = 4,
    split = 5,
    shuffle = 6,
    init = 7,
};

inline Rng make_rng(std::uint64_t seed, Stream stream) {
    return Rng(mix64(seed ^ (static_cast<std::uint64_t>(stream) * 0xd1b54a32d192ed03ULL)));
}

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& values) {
    require(!values.empty(), "cannot pick from an empty set");
    return values[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(values.size()) - 1))];
}

inline cdouble complex_gaussian(Rng& rng, double variance) {
    std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

}  // namespace rfembed

#endif
