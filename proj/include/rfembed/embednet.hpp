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

#ifndef RFEMBED_EMBEDNET_HPP
#define RFEMBED_EMBEDNET_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "rfembed/error.hpp"
#include "rfembed/fft.hpp"
#include "rfembed/instance.hpp"
#include "rfembed/parallel.hpp"
#include "rfembed/signal.hpp"

namespace rfembed {

// --- front end -------------------------------------------------------------------

// Non-overlapping rectangular-window STFT with a unitary 1/sqrt(F) scale.
// Bin f of frame t is at bins[f * frames + t], natural FFT order.
struct Stft2D {
    std::size_t fft_size = 0;
    std::size_t frames = 0;
    std::vector<cdouble> bins;

    cdouble at(std::size_t f, std::size_t t) const { return bins[f * frames + t]; }
    // Real/imag channel tensor shape.
    std::array<std::size_t, 3> shape() const { return {2, fft_size, frames}; }
};

inline Stft2D stft_frontend(std::span<const cdouble> x, std::size_t fft_size = 128) {
    require(fft_size >= 2, "FFT size must be at least 2");
    if (x.size() < fft_size) {
        throw SignalTooShort("signal of " + std::to_string(x.size()) + " samples is shorter than the FFT size " +
                             std::to_string(fft_size));
    }
    require(all_finite(x), "signal contains non-finite samples");
    Stft2D s;
    s.fft_size = fft_size;
    s.frames = x.size() / fft_size;
    s.bins.resize(fft_size * s.frames);
    const double g = 1.0 / std::sqrt(static_cast<double>(fft_size));
    for (std::size_t t = 0; t < s.frames; ++t) {
        const auto X = fft::forward(x.subspan(t * fft_size, fft_size));
        for (std::size_t f = 0; f < fft_size; ++f) {
            s.bins[f * s.frames + t] = X[f] * g;
        }
    }
    return s;
}

inline constexpr double kLogMagnitudeFloor = -40.0;

// Per bin over time: mean and population std of ln|X| (2F values), then the
// DFT magnitudes of those two profiles along frequency (2F more). The second
// half does not move when a carrier offset shifts the spectrum circularly.
inline Eigen::VectorXd pooled_features(const Stft2D& s) {
    require(s.frames >= 1, "STFT has no frames");
    const std::size_t F = s.fft_size;
    const auto T = static_cast<double>(s.frames);
    const auto Fi = static_cast<Eigen::Index>(F);
    Eigen::VectorXd out(4 * Fi);
    std::vector<cdouble> mean_profile(F), std_profile(F);
    for (std::size_t f = 0; f < F; ++f) {
        double sum = 0.0;
        double sq = 0.0;
        for (std::size_t t = 0; t < s.frames; ++t) {
            const double mag = std::abs(s.at(f, t));
            const double l = mag > 0.0 ? std::max(std::log(mag), kLogMagnitudeFloor) : kLogMagnitudeFloor;
            sum += l;
            sq += l * l;
        }
        const double mean = sum / T;
        const double sd = std::sqrt(std::max(0.0, sq / T - mean * mean));
        out(static_cast<Eigen::Index>(f)) = mean;
        out(Fi + static_cast<Eigen::Index>(f)) = sd;
        mean_profile[f] = mean;
        std_profile[f] = sd;
    }
    const auto M = fft::forward(mean_profile);
    const auto S = fft::forward(std_profile);
    const double inv = 1.0 / static_cast<double>(F);
    for (std::size_t k = 0; k < F; ++k) {
        out(2 * Fi + static_cast<Eigen::Index>(k)) = std::abs(M[k]) * inv;
        out(3 * Fi + static_cast<Eigen::Index>(k)) = std::abs(S[k]) * inv;
    }
    return out;
}

// Front end used for embedding: unit-power normalization, STFT, pooling.
inline Eigen::VectorXd signal_features(std::span<const cdouble> x, std::size_t fft_size = 128) {
    const double p = mean_power(x);
    std::vector<cdouble> y(x.begin(), x.end());
    if (p > 0.0) {
        const double g = 1.0 / std::sqrt(p);
        for (auto& v : y) {
            v *= g;
        }
    }
    return pooled_features(stft_frontend(y, fft_size));
}

// --- model -----------------------------------------------------------------------

enum class HeadKind { softmax, norm_softmax, arcface };

inline std::string to_string(HeadKind h) {
    switch (h) {
        case HeadKind::softmax: return "softmax";
        case HeadKind::norm_softmax: return "norm_softmax";
        case HeadKind::arcface: return "arcface";
    }
    return "?";
}

inline HeadKind parse_head_kind(const std::string& s) {
    if (s == "softmax" || s == "Sm") {
        return HeadKind::softmax;
    }
    if (s == "norm_softmax" || s == "NS") {
        return HeadKind::norm_softmax;
    }
    if (s == "arcface" || s == "AF") {
        return HeadKind::arcface;
    }
    throw ConfigError("unknown head '" + s + "' (expected softmax, norm_softmax or arcface)");
}

inline bool normalized_head(HeadKind h) { return h != HeadKind::softmax; }

struct ModelShape {
    std::size_t input_dim = 512;
    std::vector<std::size_t> hidden{512, 256};
    std::size_t embedding_dim = 128;  // 0: the head reads the last hidden layer
    std::size_t classes = 2;
    HeadKind head = HeadKind::arcface;
    double scale = 8.0;
    double margin = 0.5;
    bool operator==(const ModelShape&) const = default;
};

inline void validate(const ModelShape& s) {
    if (s.input_dim == 0 || s.classes < 2) {
        throw ConfigError("model needs a positive input width and at least two classes");
    }
    for (auto h : s.hidden) {
        if (h == 0) {
            throw ConfigError("hidden layer widths must be positive");
        }
    }
    if (s.embedding_dim == 0 && s.hidden.empty()) {
        throw ConfigError("embedding_dim 0 requires at least one hidden layer");
    }
    if (!(s.scale > 0.0) || !std::isfinite(s.scale)) {
        throw ConfigError("scale s must be > 0");
    }
    if (!(s.margin >= 0.0 && s.margin < std::numbers::pi / 2.0)) {
        throw ConfigError("margin m must lie in [0, pi/2)");
    }
}

struct DenseLayer {
    Eigen::MatrixXd W;  // out x in
    Eigen::MatrixXd b;  // out x 1, or empty when the layer has no bias
};

struct EmbedModel {
    ModelShape shape;
    std::size_t fft_size = 128;  // front-end descriptor; 0 for non-signal inputs
    Eigen::VectorXd input_mean;  // fixed standardization, applied before layer 0
    Eigen::VectorXd input_scale;
    std::vector<DenseLayer> hidden;  // ReLU
    std::vector<DenseLayer> embedding;  // zero or one linear layer
    DenseLayer head;

    std::size_t output_dim() const {
        return shape.embedding_dim > 0 ? shape.embedding_dim : shape.hidden.back();
    }
};

inline std::vector<Eigen::MatrixXd*> parameters(EmbedModel& m) {
    std::vector<Eigen::MatrixXd*> p;
    for (auto* group : {&m.hidden, &m.embedding}) {
        for (auto& l : *group) {
            p.push_back(&l.W);
            if (l.b.size() > 0) {
                p.push_back(&l.b);
            }
        }
    }
    p.push_back(&m.head.W);
    if (m.head.b.size() > 0) {
        p.push_back(&m.head.b);
    }
    return p;
}

inline std::size_t parameter_count(EmbedModel& m) {
    std::size_t n = 0;
    for (auto* p : parameters(m)) {
        n += static_cast<std::size_t>(p->size());
    }
    return n;
}

namespace detail {

inline DenseLayer xavier_layer(std::size_t out, std::size_t in, bool bias, Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(in + out));
    DenseLayer l;
    l.W.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
    for (Eigen::Index i = 0; i < l.W.size(); ++i) {
        l.W.data()[i] = uniform(rng, -a, a);
    }
    if (bias) {
        l.b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out), 1);
    }
    return l;
}

inline void normalize_rows(Eigen::MatrixXd& W) {
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
        const double n = W.row(r).norm();
        if (n > 0.0) {
            W.row(r) /= n;
        }
    }
}

}  // namespace detail

inline EmbedModel make_model(const ModelShape& shape, std::uint64_t seed, std::size_t fft_size = 128) {
    validate(shape);
    Rng rng = make_rng(seed, Stream::init);
    EmbedModel m;
    m.shape = shape;
    m.fft_size = fft_size;
    m.input_mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(shape.input_dim));
    m.input_scale = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(shape.input_dim));
    std::size_t width = shape.input_dim;
    for (auto h : shape.hidden) {
        m.hidden.push_back(detail::xavier_layer(h, width, true, rng));
        width = h;
    }
    const bool norm = normalized_head(shape.head);
    if (shape.embedding_dim > 0) {
        m.embedding.push_back(detail::xavier_layer(shape.embedding_dim, width, !norm, rng));
        width = shape.embedding_dim;
    }
    m.head = detail::xavier_layer(shape.classes, width, !norm, rng);
    if (norm) {
        detail::normalize_rows(m.head.W);
    }
    return m;
}

// Gradient container with the same layout as the model.
inline EmbedModel zeros_like(const EmbedModel& m) {
    EmbedModel g = m;
    for (auto* p : parameters(g)) {
        p->setZero();
    }
    return g;
}

// --- ArcFace margin ------------------------------------------------------------------

inline constexpr double kCosClamp = 1.0 - 1e-7;

// Target-class cosine after the additive angular margin, evaluated as
// cos(t) cos(m) - sin(t) sin(m) so cos(t) = 1 maps exactly to cos(m). When
// t + m would pass pi the linear penalty cos(t) - m sin(m) takes over.
inline double margin_cosine(double c, double m) {
    if (m == 0.0) {
        return c;
    }
    const double cc = std::clamp(c, -1.0, 1.0);
    if (cc < -std::cos(m)) {
        return c - m * std::sin(m);
    }
    return cc * std::cos(m) - std::sqrt(1.0 - cc * cc) * std::sin(m);
}

// d margin_cosine / d c. The clamp keeps the slope finite at |c| = 1.
inline double margin_cosine_derivative(double c, double m) {
    if (m == 0.0 || std::clamp(c, -1.0, 1.0) < -std::cos(m)) {
        return 1.0;
    }
    const double cc = std::clamp(c, -kCosClamp, kCosClamp);
    return std::cos(m) + std::sin(m) * cc / std::sqrt(1.0 - cc * cc);
}

// --- forward / backward -------------------------------------------------------------

struct ForwardPass {
    std::vector<Eigen::MatrixXd> activations;  // input (standardized), then each hidden output
    Eigen::MatrixXd raw;        // embedding before normalization (d x B)
    Eigen::VectorXd raw_norm;   // per column, normalized heads only
    Eigen::MatrixXd embedding;  // d x B, unit columns for normalized heads
    Eigen::MatrixXd head_w;     // head weights as used (row-normalized for NS/AF)
    Eigen::VectorXd head_w_norm;
    Eigen::MatrixXd cosine;     // C x B, normalized heads only
    Eigen::MatrixXd logits;     // C x B
};

// Columns of X are examples. Labels are needed only for the ArcFace margin;
// without them ArcFace logits equal Norm-Softmax logits.
inline ForwardPass forward(const EmbedModel& m, const Eigen::MatrixXd& X, const std::vector<int>* labels = nullptr) {
    if (static_cast<std::size_t>(X.rows()) != m.shape.input_dim) {
        throw ValidationError("feature length " + std::to_string(X.rows()) + " does not match the model input " +
                              std::to_string(m.shape.input_dim));
    }
    if (!X.allFinite()) {
        throw ValidationError("features contain non-finite values");
    }
    ForwardPass f;
    Eigen::MatrixXd a = (X.colwise() - m.input_mean).array().colwise() * m.input_scale.array();
    f.activations.push_back(a);
    for (const auto& l : m.hidden) {
        Eigen::MatrixXd z = l.W * a;
        if (l.b.size() > 0) {
            z.colwise() += l.b.col(0);
        }
        a = z.cwiseMax(0.0);
        f.activations.push_back(a);
    }
    if (!m.embedding.empty()) {
        const auto& l = m.embedding.front();
        f.raw = l.W * a;
        if (l.b.size() > 0) {
            f.raw.colwise() += l.b.col(0);
        }
    } else {
        f.raw = a;
    }
    const bool norm = normalized_head(m.shape.head);
    if (norm) {
        f.raw_norm = f.raw.colwise().norm().transpose().cwiseMax(1e-12);
        f.embedding = f.raw.array().rowwise() / f.raw_norm.transpose().array();
        f.head_w_norm = m.head.W.rowwise().norm().cwiseMax(1e-12);
        f.head_w = m.head.W.array().colwise() / f.head_w_norm.array();
        f.cosine = f.head_w * f.embedding;
        f.logits = m.shape.scale * f.cosine;
        if (m.shape.head == HeadKind::arcface && labels) {
            for (Eigen::Index j = 0; j < X.cols(); ++j) {
                const auto y = (*labels)[static_cast<std::size_t>(j)];
                f.logits(y, j) = m.shape.scale * margin_cosine(f.cosine(y, j), m.shape.margin);
            }
        }
    } else {
        f.embedding = f.raw;
        f.head_w = m.head.W;
        f.logits = m.head.W * f.embedding;
        if (m.head.b.size() > 0) {
            f.logits.colwise() += m.head.b.col(0);
        }
    }
    return f;
}

struct LossAndGradients {
    double loss = 0.0;
    double accuracy = 0.0;  // fraction of argmax(logits) == label
    EmbedModel gradients;
};

// Mean cross-entropy over the batch and its exact gradient.
inline LossAndGradients loss_and_gradients(const EmbedModel& m, const Eigen::MatrixXd& X,
                                           const std::vector<int>& labels) {
    require(X.cols() > 0 && static_cast<std::size_t>(X.cols()) == labels.size(), "batch and labels disagree");
    for (int y : labels) {
        require(y >= 0 && static_cast<std::size_t>(y) < m.shape.classes, "label out of range");
    }
    const auto B = static_cast<double>(X.cols());
    const ForwardPass f = forward(m, X, &labels);
    LossAndGradients out;
    out.gradients = zeros_like(m);
    EmbedModel& g = out.gradients;

    // dL/dlogits = (softmax - onehot) / B
    Eigen::MatrixXd G(f.logits.rows(), f.logits.cols());
    std::size_t correct = 0;
    for (Eigen::Index j = 0; j < f.logits.cols(); ++j) {
        const auto y = labels[static_cast<std::size_t>(j)];
        const double mx = f.logits.col(j).maxCoeff();
        const Eigen::VectorXd e = (f.logits.col(j).array() - mx).exp();
        const double z = e.sum();
        out.loss += (std::log(z) + mx - f.logits(y, j)) / B;
        G.col(j) = e / z / B;
        G(y, j) -= 1.0 / B;
        Eigen::Index arg = 0;
        f.logits.col(j).maxCoeff(&arg);
        correct += arg == y ? 1 : 0;
    }
    out.accuracy = static_cast<double>(correct) / B;

    Eigen::MatrixXd dz;  // gradient w.r.t. the (possibly normalized) embedding
    if (normalized_head(m.shape.head)) {
        // logits = s * phi(cos); dcos = s * phi'(cos) * G
        Eigen::MatrixXd dcos = m.shape.scale * G;
        if (m.shape.head == HeadKind::arcface) {
            for (Eigen::Index j = 0; j < G.cols(); ++j) {
                const auto y = labels[static_cast<std::size_t>(j)];
                dcos(y, j) *= margin_cosine_derivative(f.cosine(y, j), m.shape.margin);
            }
        }
        const Eigen::MatrixXd dw_hat = dcos * f.embedding.transpose();
        // Through row normalization: dw = (dw_hat - w_hat (w_hat . dw_hat)) / |w|
        for (Eigen::Index r = 0; r < dw_hat.rows(); ++r) {
            const double proj = f.head_w.row(r).dot(dw_hat.row(r));
            g.head.W.row(r) = (dw_hat.row(r) - proj * f.head_w.row(r)) / f.head_w_norm(r);
        }
        const Eigen::MatrixXd dzhat = f.head_w.transpose() * dcos;
        dz.resize(dzhat.rows(), dzhat.cols());
        for (Eigen::Index j = 0; j < dzhat.cols(); ++j) {
            const double proj = f.embedding.col(j).dot(dzhat.col(j));
            dz.col(j) = (dzhat.col(j) - proj * f.embedding.col(j)) / f.raw_norm(j);
        }
    } else {
        g.head.W = G * f.embedding.transpose();
        if (m.head.b.size() > 0) {
            g.head.b = G.rowwise().sum();
        }
        dz = m.head.W.transpose() * G;
    }

    Eigen::MatrixXd da;  // gradient w.r.t. the last hidden activation
    if (!m.embedding.empty()) {
        const auto& l = m.embedding.front();
        auto& gl = g.embedding.front();
        gl.W = dz * f.activations.back().transpose();
        if (l.b.size() > 0) {
            gl.b = dz.rowwise().sum();
        }
        da = l.W.transpose() * dz;
    } else {
        da = dz;
    }
    for (std::size_t i = m.hidden.size(); i-- > 0;) {
        const auto& out_act = f.activations[i + 1];
        const Eigen::MatrixXd dpre = (out_act.array() > 0.0).select(da, 0.0);
        g.hidden[i].W = dpre * f.activations[i].transpose();
        g.hidden[i].b = dpre.rowwise().sum();
        if (i > 0) {
            da = m.hidden[i].W.transpose() * dpre;
        }
    }
    return out;
}

// Embeddings (columns) for a feature matrix.
inline Eigen::MatrixXd embed_features(const EmbedModel& m, const Eigen::MatrixXd& X) { return forward(m, X).embedding; }

inline Eigen::VectorXd embed(const EmbedModel& m, std::span<const cdouble> x) {
    require(m.fft_size > 0, "model has no signal front end");
    return forward(m, signal_features(x, m.fft_size)).embedding.col(0);
}

inline Eigen::VectorXd embed(const EmbedModel& m, const ComplexSignal& x) { return embed(m, x.samples); }

// --- training --------------------------------------------------------------------------

struct TrainConfig {
    int epochs = 20;
    std::size_t batch = 128;
    double lr = 0.025;
    double momentum = 0.9;
    double weight_decay = 5e-4;
    std::vector<int> lr_drops{15, 18};
    bool standardize_inputs = true;  // fix mean/scale from the first epoch's data
    int jobs = 1;
    bool operator==(const TrainConfig&) const = default;
};

inline void validate(const TrainConfig& c) {
    if (c.epochs < 1 || c.batch < 1) {
        throw ConfigError("epochs and batch must be positive");
    }
    if (!(c.lr >= 0.0) || !(c.momentum >= 0.0 && c.momentum < 1.0) || !(c.weight_decay >= 0.0)) {
        throw ConfigError("lr and weight_decay must be >= 0 and momentum in [0, 1)");
    }
}

// Learning rate for a 1-based epoch: divided by ten once per drop epoch passed.
inline double learning_rate(const TrainConfig& c, int epoch) {
    double lr = c.lr;
    for (int d : c.lr_drops) {
        if (epoch > d) {
            lr *= 0.1;
        }
    }
    return lr;
}

struct EpochData {
    Eigen::MatrixXd features;  // columns are examples
    std::vector<int> labels;
};

struct EpochMetrics {
    int epoch = 0;
    double lr = 0.0;
    double loss = 0.0;
    double accuracy = 0.0;
};

using EpochSource = std::function<EpochData(int epoch)>;

inline void set_standardization(EmbedModel& m, const Eigen::MatrixXd& X) {
    m.input_mean = X.rowwise().mean();
    const Eigen::MatrixXd c = X.colwise() - m.input_mean;
    const Eigen::VectorXd sd = (c.array().square().rowwise().sum() / static_cast<double>(X.cols())).sqrt();
    m.input_scale = sd.unaryExpr([](double v) { return v > 1e-6 ? 1.0 / v : 1.0; });
}

// Mini-batch SGD with momentum (v = mu v + g, p -= lr v) and L2 weight decay
// folded into g. Deterministic for a given seed and data source.
inline std::vector<EpochMetrics> fit(EmbedModel& m, const EpochSource& source, const TrainConfig& c,
                                     std::uint64_t seed) {
    validate(c);
    std::vector<Eigen::MatrixXd> velocity;
    for (auto* p : parameters(m)) {
        velocity.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
    }
    std::vector<EpochMetrics> history;
    for (int epoch = 1; epoch <= c.epochs; ++epoch) {
        EpochData data = source(epoch);
        const auto n = static_cast<std::size_t>(data.features.cols());
        require(n > 0 && n == data.labels.size(), "epoch source returned no data");
        if (epoch == 1 && c.standardize_inputs) {
            set_standardization(m, data.features);
        }
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng = make_rng(derive_seed(seed, 0, static_cast<std::uint64_t>(epoch)), Stream::shuffle);
        std::shuffle(order.begin(), order.end(), rng);
        const double lr = learning_rate(c, epoch);
        EpochMetrics em{epoch, lr, 0.0, 0.0};
        for (std::size_t start = 0; start < n; start += c.batch) {
            const std::size_t stop = std::min(n, start + c.batch);
            Eigen::MatrixXd X(data.features.rows(), static_cast<Eigen::Index>(stop - start));
            std::vector<int> y(stop - start);
            for (std::size_t k = start; k < stop; ++k) {
                X.col(static_cast<Eigen::Index>(k - start)) = data.features.col(static_cast<Eigen::Index>(order[k]));
                y[k - start] = data.labels[order[k]];
            }
            auto lg = loss_and_gradients(m, X, y);
            if (!std::isfinite(lg.loss)) {
                throw TrainingDiverged("non-finite loss at epoch " + std::to_string(epoch) + ", batch starting at " +
                                       std::to_string(start) + " (lr " + std::to_string(lr) + ")");
            }
            const double w = static_cast<double>(stop - start) / static_cast<double>(n);
            em.loss += lg.loss * w;
            em.accuracy += lg.accuracy * w;
            if (lr == 0.0) {
                continue;  // also skips the row renormalization and its rounding
            }
            auto params = parameters(m);
            auto grads = parameters(lg.gradients);
            for (std::size_t i = 0; i < params.size(); ++i) {
                velocity[i] = c.momentum * velocity[i] + *grads[i] + c.weight_decay * *params[i];
                *params[i] -= lr * velocity[i];
            }
            if (normalized_head(m.shape.head)) {
                detail::normalize_rows(m.head.W);
            }
        }
        history.push_back(em);
    }
    return history;
}

// --- synthetic training data ---------------------------------------------------------------

struct SignalTrainingConfig {
    std::size_t instances_per_class = 50;
    std::size_t n_samples = 16384;
    double sample_rate = 20e6;
    AugmentConfig augment;
    int jobs = 1;
};

// Pooled STFT features of freshly generated instances for one epoch. Instance
// (class c, index i) of epoch e is seeded by derive_seed(master, c, e, i);
// columns are ordered by class then index whatever the worker count.
inline EpochData generate_epoch(const std::vector<ProtocolSpec>& protocols, const SignalTrainingConfig& c,
                                std::uint64_t master_seed, int epoch, std::size_t fft_size = 128,
                                const TdlTable* profiles = nullptr) {
    const std::size_t per = c.instances_per_class;
    const std::size_t total = protocols.size() * per;
    EpochData d;
    d.features.resize(static_cast<Eigen::Index>(4 * fft_size), static_cast<Eigen::Index>(total));
    d.labels.resize(total);
    parallel_for(total, c.jobs, [&](std::size_t k) {
        const std::size_t cls = k / per;
        const std::size_t i = k % per;
        const auto seed = derive_seed(master_seed, static_cast<std::uint64_t>(protocols[cls].id),
                                      static_cast<std::uint64_t>(epoch), i);
        const auto inst = generate_instance(protocols[cls], c.n_samples, c.sample_rate, c.augment, seed, profiles);
        d.features.col(static_cast<Eigen::Index>(k)) = signal_features(inst.signal.samples, fft_size);
        d.labels[k] = static_cast<int>(cls);
    });
    return d;
}

}  // namespace rfembed

#endif
