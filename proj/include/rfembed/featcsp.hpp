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

#ifndef RFEMBED_FEATCSP_HPP
#define RFEMBED_FEATCSP_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "rfembed/error.hpp"
#include "rfembed/fft.hpp"
#include "rfembed/signal.hpp"

namespace rfembed {

inline constexpr std::size_t kScfFftSize = 1 << 14;
inline constexpr std::size_t kScfSmoothing = 256;
inline constexpr std::size_t kScfFreqBins = kScfFftSize / kScfSmoothing;  // 64
inline constexpr std::size_t kScfAlphaBins = 50;
inline constexpr double kScfAlphaStep = 0.01;
inline constexpr std::size_t kScfMinLength = 1024;

// |SCF| on a 64 x 50 grid. Rows are spectral frequency f in [-0.5, 0.5),
// row r covering [-0.5 + r/64, -0.5 + (r+1)/64). Column i covers cyclic
// frequencies [0.01 i, 0.01 (i+1)).
struct ScfMatrix {
    std::vector<double> values = std::vector<double>(kScfFreqBins * kScfAlphaBins, 0.0);

    double& operator()(std::size_t f, std::size_t a) { return values[f * kScfAlphaBins + a]; }
    double operator()(std::size_t f, std::size_t a) const { return values[f * kScfAlphaBins + a]; }
    static constexpr std::size_t rows() { return kScfFreqBins; }
    static constexpr std::size_t cols() { return kScfAlphaBins; }
    bool operator==(const ScfMatrix&) const = default;
};

namespace detail {

// First integer shift d (alpha = d / N) that falls in column i.
inline std::size_t alpha_column_start(std::size_t i) {
    return static_cast<std::size_t>(std::ceil(kScfAlphaStep * static_cast<double>(i) * kScfFftSize - 1e-9));
}

// Frequency-smoothed cyclic periodogram of one 2^14 segment, max-pooled over
// every integer shift inside each alpha column.
inline void scf_segment(std::span<const cdouble> segment, ScfMatrix& acc) {
    const std::size_t N = kScfFftSize;
    auto X = fft::shift<cdouble>(fft::forward(segment));
    const double inv = 1.0 / static_cast<double>(N * kScfSmoothing);
    std::vector<cdouble> block(kScfFreqBins);
    std::vector<double> pooled(kScfFreqBins);
    for (std::size_t col = 0; col < kScfAlphaBins; ++col) {
        std::fill(pooled.begin(), pooled.end(), 0.0);
        const std::size_t d_end = detail::alpha_column_start(col + 1);
        for (std::size_t d = detail::alpha_column_start(col); d < d_end; ++d) {
            const std::size_t up = (d + 1) / 2;  // ceil(d/2)
            const std::size_t lo = d / 2;        // floor(d/2)
            std::fill(block.begin(), block.end(), cdouble{0.0, 0.0});
            // Products with an index outside [0, N) count as zero.
            const std::size_t j0 = lo;
            const std::size_t j1 = N - up;
            for (std::size_t b = 0; b < kScfFreqBins; ++b) {
                const std::size_t start = std::max(b * kScfSmoothing, j0);
                const std::size_t stop = std::min((b + 1) * kScfSmoothing, j1);
                double re = 0.0;
                double im = 0.0;
                for (std::size_t j = start; j < stop; ++j) {
                    const cdouble p = X[j + up];
                    const cdouble q = X[j - lo];
                    re += p.real() * q.real() + p.imag() * q.imag();
                    im += p.imag() * q.real() - p.real() * q.imag();
                }
                block[b] = {re, im};
            }
            for (std::size_t b = 0; b < kScfFreqBins; ++b) {
                pooled[b] = std::max(pooled[b], std::abs(block[b]) * inv);
            }
        }
        for (std::size_t b = 0; b < kScfFreqBins; ++b) {
            acc(b, col) += pooled[b];
        }
    }
}

}  // namespace detail

// Frequency-smoothing SCF estimate, normalized by the total of the alpha = 0
// column so the result does not depend on input scale.
inline ScfMatrix estimate_scf_fsm(std::span<const cdouble> x) {
    if (x.size() < kScfMinLength) {
        throw SignalTooShort("SCF estimation needs at least " + std::to_string(kScfMinLength) + " samples, got " +
                             std::to_string(x.size()));
    }
    require(all_finite(x), "signal contains non-finite samples");
    ScfMatrix out;
    std::size_t segments = 0;
    std::vector<cdouble> seg(kScfFftSize);
    for (std::size_t s = 0; s < x.size(); s += kScfFftSize) {
        const std::size_t len = std::min(kScfFftSize, x.size() - s);
        if (len < kScfMinLength) {
            break;
        }
        std::fill(seg.begin(), seg.end(), cdouble{0.0, 0.0});
        std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(s), len, seg.begin());
        detail::scf_segment(seg, out);
        ++segments;
    }
    double total = 0.0;
    for (std::size_t f = 0; f < kScfFreqBins; ++f) {
        total += out(f, 0);
    }
    if (!(total > 0.0)) {
        throw ValidationError("signal has zero power");
    }
    for (auto& v : out.values) {
        v /= total;
    }
    return out;
}

inline ScfMatrix estimate_scf_fsm(const ComplexSignal& x) { return estimate_scf_fsm(x.samples); }

// --- PCA -------------------------------------------------------------------------------

struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;  // k x D, orthonormal rows
    Eigen::VectorXd variances;   // non-increasing

    std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
    std::size_t k() const { return static_cast<std::size_t>(components.rows()); }
};

// Rows of `data` are observations. Components are the top-k right singular
// vectors of the centered data, each flipped so its largest-magnitude entry
// is positive.
inline PcaModel pca_fit(const Eigen::MatrixXd& data, std::size_t k) {
    const auto n = static_cast<std::size_t>(data.rows());
    const auto D = static_cast<std::size_t>(data.cols());
    require(n >= 2, "PCA needs at least two observations");
    if (k < 1 || k > std::min(n - 1, D)) {
        throw ValidationError("PCA k=" + std::to_string(k) + " exceeds min(n-1, D)=" +
                              std::to_string(std::min(n - 1, D)));
    }
    require(data.allFinite(), "PCA input contains non-finite values");
    PcaModel m;
    m.mean = data.colwise().mean().transpose();
    const Eigen::MatrixXd centered = data.rowwise() - m.mean.transpose();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    const Eigen::MatrixXd& V = svd.matrixV();
    const Eigen::VectorXd& s = svd.singularValues();
    m.components.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(D));
    m.variances.resize(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        Eigen::VectorXd v = V.col(idx);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0.0) {
            v = -v;
        }
        m.components.row(idx) = v.transpose();
        m.variances(idx) = s(idx) * s(idx) / static_cast<double>(n - 1);
    }
    return m;
}

inline Eigen::VectorXd pca_project(const PcaModel& m, const Eigen::VectorXd& x) {
    if (static_cast<std::size_t>(x.size()) != m.dim()) {
        throw ValidationError("PCA input has dimension " + std::to_string(x.size()) + ", model expects " +
                              std::to_string(m.dim()));
    }
    return m.components * (x - m.mean);
}

inline Eigen::VectorXd pca_reconstruct(const PcaModel& m, const Eigen::VectorXd& y) {
    require(static_cast<std::size_t>(y.size()) == m.k(), "projection has the wrong dimension");
    return m.components.transpose() * y + m.mean;
}

inline Eigen::VectorXd flatten(const ScfMatrix& s) {
    return Eigen::Map<const Eigen::VectorXd>(s.values.data(), static_cast<Eigen::Index>(s.values.size()));
}

inline PcaModel pca_fit(const std::vector<ScfMatrix>& matrices, std::size_t k = 128) {
    require(!matrices.empty(), "PCA needs at least two observations");
    Eigen::MatrixXd data(static_cast<Eigen::Index>(matrices.size()),
                         static_cast<Eigen::Index>(kScfFreqBins * kScfAlphaBins));
    for (std::size_t i = 0; i < matrices.size(); ++i) {
        data.row(static_cast<Eigen::Index>(i)) = flatten(matrices[i]).transpose();
    }
    return pca_fit(data, k);
}

inline Eigen::VectorXd pca_project(const PcaModel& m, const ScfMatrix& s) { return pca_project(m, flatten(s)); }

}  // namespace rfembed

#endif
