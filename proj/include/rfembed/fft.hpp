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

#ifndef RFEMBED_FFT_HPP
#define RFEMBED_FFT_HPP

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "error.hpp"
#include "signal.hpp"

namespace rfembed::fft {

namespace detail {

// The FFTW planner is not reentrant; execution of distinct plans is.
inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

class Plan {
public:
    Plan(int n, int sign) : n_(n) {
        std::lock_guard lock(planner_mutex());
        in_ = fftw_alloc_complex(static_cast<std::size_t>(n));
        out_ = fftw_alloc_complex(static_cast<std::size_t>(n));
        plan_ = fftw_plan_dft_1d(n, in_, out_, sign, FFTW_ESTIMATE);
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    ~Plan() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
        fftw_free(in_);
        fftw_free(out_);
    }

    void execute(std::span<const cdouble> in, std::span<cdouble> out) {
        std::copy(in.begin(), in.end(), reinterpret_cast<cdouble*>(in_));
        fftw_execute(plan_);
        const auto* o = reinterpret_cast<const cdouble*>(out_);
        std::copy(o, o + n_, out.begin());
    }

private:
    int n_;
    fftw_complex* in_ = nullptr;
    fftw_complex* out_ = nullptr;
    fftw_plan plan_ = nullptr;
};

inline Plan& plan_for(int n, int sign) {
    thread_local std::map<std::pair<int, int>, std::unique_ptr<Plan>> cache;
    auto& slot = cache[{n, sign}];
    if (!slot) {
        slot = std::make_unique<Plan>(n, sign);
    }
    return *slot;
}

}  // namespace detail

// Unnormalized forward DFT: X[k] = sum_n x[n] exp(-j 2 pi k n / N).
inline std::vector<cdouble> forward(std::span<const cdouble> x) {
    require(!x.empty(), "fft of empty sequence");
    std::vector<cdouble> out(x.size());
    detail::plan_for(static_cast<int>(x.size()), FFTW_FORWARD).execute(x, out);
    return out;
}

// Unnormalized inverse DFT (no 1/N).
inline std::vector<cdouble> inverse(std::span<const cdouble> x) {
    require(!x.empty(), "ifft of empty sequence");
    std::vector<cdouble> out(x.size());
    detail::plan_for(static_cast<int>(x.size()), FFTW_BACKWARD).execute(x, out);
    return out;
}

// Frequency of bin k in cycles/sample, in [-0.5, 0.5).
inline double bin_frequency(std::size_t k, std::size_t n) {
    const auto kk = static_cast<double>(k);
    const auto nn = static_cast<double>(n);
    return (k < (n + 1) / 2) ? kk / nn : (kk - nn) / nn;
}

// Reorders bins so that index 0 is the most negative frequency.
template <typename T>
std::vector<T> shift(std::span<const T> x) {
    std::vector<T> out(x.size());
    const std::size_t half = x.size() / 2;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = x[(i + x.size() - half) % x.size()];
    }
    return out;
}

// Bin index of the largest magnitude.
inline std::size_t peak_bin(std::span<const cdouble> spectrum) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < spectrum.size(); ++k) {
        if (std::norm(spectrum[k]) > std::norm(spectrum[best])) {
            best = k;
        }
    }
    return best;
}

}  // namespace rfembed::fft

#endif
