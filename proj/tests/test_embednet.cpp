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

#include "grad_oracle.hpp"
#include "rfembed/embednet.hpp"

using namespace rfembed;

namespace {

std::vector<cdouble> tone(std::size_t n, double freq, double amp = 1.0) {
    std::vector<cdouble> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::polar(amp, kTwoPi * freq * static_cast<double>(i));
    }
    return x;
}

std::vector<cdouble> white(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<cdouble> x(n);
    for (auto& v : x) {
        v = complex_gaussian(rng, 1.0);
    }
    return x;
}

std::vector<ProtocolSpec> protocols(std::size_t n, std::uint64_t seed) {
    std::vector<ProtocolSpec> p;
    for (std::size_t i = 0; i < n; ++i) {
        p.push_back(sample_protocol(seed, static_cast<int>(i), GeneratorConfig{}));
    }
    return p;
}

}  // namespace

TEST(Stft, ShapeMatchesFftSizeAndFrames) {
    const auto s = stft_frontend(white(16384, 1));
    EXPECT_EQ(s.shape(), (std::array<std::size_t, 3>{2, 128, 128}));
    EXPECT_EQ(stft_frontend(white(1000, 2), 128).frames, 7U);
    EXPECT_THROW(stft_frontend(white(100, 3), 128), SignalTooShort);
}

TEST(Stft, UnitaryScalingPreservesEnergy) {
    const auto x = white(16384, 4);
    const auto s = stft_frontend(x);
    double e = 0.0;
    for (auto v : s.bins) {
        e += std::norm(v);
    }
    EXPECT_NEAR(e, energy(x), 1e-9 * energy(x));
}

TEST(Pooled, ToneLandsInItsBin) {
    const auto f = pooled_features(stft_frontend(tone(16384, 32.0 / 128.0)));
    ASSERT_EQ(f.size(), 512);
    Eigen::Index arg = 0;
    f.head(128).maxCoeff(&arg);
    EXPECT_EQ(arg, 32);
    // Pure tone: constant magnitude per frame, so its std entry is zero.
    EXPECT_LT(std::abs(f(128 + 32)), 1e-9);
}

TEST(Pooled, PeriodicRepetitionLeavesFeaturesUnchanged) {
    const auto x = white(128 * 16, 5);
    std::vector<cdouble> rep;
    for (int k = 0; k < 3; ++k) {
        rep.insert(rep.end(), x.begin(), x.end());
    }
    const auto a = signal_features(x);
    const auto b = signal_features(rep);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Pooled, WholeBinShiftRotatesProfilesAndKeepsSpectra) {
    // Colored noise: a 3-tap moving average gives a non-flat profile.
    const auto w = white(128 * 32 + 2, 8);
    std::vector<cdouble> x(128 * 32);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = w[i] + w[i + 1] + w[i + 2];
    }
    for (int k : {1, 5, -7}) {
        auto y = x;
        for (std::size_t i = 0; i < y.size(); ++i) {
            y[i] *= std::polar(1.0, kTwoPi * k * static_cast<double>(i) / 128.0);
        }
        const auto a = pooled_features(stft_frontend(x));
        const auto b = pooled_features(stft_frontend(y));
        for (Eigen::Index f = 0; f < 128; ++f) {
            const Eigen::Index g = ((f + k) % 128 + 128) % 128;
            EXPECT_NEAR(a(f), b(g), 1e-9);
            EXPECT_NEAR(a(128 + f), b(128 + g), 1e-9);
        }
        EXPECT_LT((a.tail(256) - b.tail(256)).cwiseAbs().maxCoeff(), 1e-9) << k;
    }
}

TEST(Pooled, ZeroSignalIsFiniteAtTheFloor) {
    const auto f = signal_features(std::vector<cdouble>(1024));
    EXPECT_TRUE(f.allFinite());
    EXPECT_DOUBLE_EQ(f(0), kLogMagnitudeFloor);
}

TEST(Pooled, ScaleInvariantThroughPowerNormalization) {
    const auto x = white(4096, 6);
    auto y = x;
    for (auto& v : y) {
        v *= 37.0;
    }
    EXPECT_LT((signal_features(x) - signal_features(y)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Margin, TargetLogitAtKnownAngle) {
    const double c = std::cos(0.5);
    EXPECT_NEAR(8.0 * margin_cosine(c, 0.5), 8.0 * std::cos(1.0), 1e-12);
    EXPECT_NEAR(8.0 * margin_cosine(1.0, 0.5), 7.0207, 1e-4);
    EXPECT_TRUE(std::isfinite(margin_cosine_derivative(1.0, 0.5)));
    EXPECT_DOUBLE_EQ(margin_cosine(0.3, 0.0), 0.3);
}

TEST(Margin, MonotoneAndBelowCosine) {
    double prev = margin_cosine(-1.0, 0.5);
    for (int i = -999; i <= 1000; ++i) {
        const double c = i / 1000.0;
        const double v = margin_cosine(c, 0.5);
        EXPECT_LE(v, c + 1e-12);
        EXPECT_GE(v, prev - 1e-12);
        prev = v;
    }
}

TEST(Margin, DerivativeMatchesFiniteDifference) {
    for (double c : {-0.95, -0.5, 0.0, 0.4, 0.8, 0.99}) {
        const double h = 1e-6;
        const double fd = (margin_cosine(c + h, 0.5) - margin_cosine(c - h, 0.5)) / (2 * h);
        EXPECT_NEAR(margin_cosine_derivative(c, 0.5), fd, 1e-5) << c;
    }
}

TEST(Model, ShapesAndUnitHeadRows) {
    ModelShape s;
    s.classes = 5;
    auto m = make_model(s, 1);
    ASSERT_EQ(m.hidden.size(), 2U);
    EXPECT_EQ(m.hidden[0].W.rows(), 512);
    EXPECT_EQ(m.hidden[0].W.cols(), 512);
    EXPECT_EQ(m.embedding.front().W.rows(), 128);
    EXPECT_EQ(m.embedding.front().b.size(), 0);
    EXPECT_EQ(m.head.b.size(), 0);
    for (Eigen::Index r = 0; r < 5; ++r) {
        EXPECT_NEAR(m.head.W.row(r).norm(), 1.0, 1e-12);
    }
    s.head = HeadKind::softmax;
    auto sm = make_model(s, 1);
    EXPECT_EQ(sm.head.b.size(), 5);
    EXPECT_EQ(sm.embedding.front().b.size(), 128);
}

TEST(Model, RejectsBadShapes) {
    ModelShape s;
    s.classes = 1;
    EXPECT_THROW(make_model(s, 0), ConfigError);
    s.classes = 3;
    s.margin = 2.0;
    EXPECT_THROW(make_model(s, 0), ConfigError);
    s.margin = 0.5;
    s.scale = 0.0;
    EXPECT_THROW(make_model(s, 0), ConfigError);
    EXPECT_THROW(parse_head_kind("triplet"), ConfigError);
}

TEST(Forward, NormalizedLogitsBoundedByScale) {
    ModelShape s{64, {32}, 16, 7, HeadKind::norm_softmax, 8.0, 0.5};
    auto m = make_model(s, 3);
    const Eigen::MatrixXd X = Eigen::MatrixXd::Random(64, 40) * 10.0;
    const auto f = forward(m, X);
    EXPECT_LE(f.logits.cwiseAbs().maxCoeff(), 8.0 + 1e-9);
    for (Eigen::Index j = 0; j < 40; ++j) {
        EXPECT_NEAR(f.embedding.col(j).norm(), 1.0, 1e-9);
    }
}

TEST(Forward, ArcFaceWithoutMarginEqualsNormSoftmax) {
    ModelShape s{32, {16}, 8, 4, HeadKind::arcface, 8.0, 0.0};
    auto af = make_model(s, 9);
    auto ns = af;
    ns.shape.head = HeadKind::norm_softmax;
    const Eigen::MatrixXd X = Eigen::MatrixXd::Random(32, 10);
    const std::vector<int> y{0, 1, 2, 3, 0, 1, 2, 3, 0, 1};
    EXPECT_LT((forward(af, X, &y).logits - forward(ns, X, &y).logits).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(loss_and_gradients(af, X, y).loss, loss_and_gradients(ns, X, y).loss, 1e-12);
}

TEST(Loss, UniformLogitsGiveLogC) {
    ModelShape s{8, {4}, 0, 6, HeadKind::softmax, 8.0, 0.0};
    auto m = make_model(s, 2);
    m.head.W.setZero();
    m.head.b.setZero();
    const Eigen::MatrixXd X = Eigen::MatrixXd::Random(8, 12);
    const std::vector<int> y{0, 1, 2, 3, 4, 5, 0, 1, 2, 3, 4, 5};
    EXPECT_NEAR(loss_and_gradients(m, X, y).loss, std::log(6.0), 1e-12);
}

TEST(Loss, LargerMarginNeverLowersLoss) {
    ModelShape s{32, {16}, 8, 4, HeadKind::arcface, 8.0, 0.0};
    const auto base = make_model(s, 11);
    const Eigen::MatrixXd X = Eigen::MatrixXd::Random(32, 24);
    std::vector<int> y(24);
    for (int i = 0; i < 24; ++i) {
        y[static_cast<std::size_t>(i)] = i % 4;
    }
    double prev = -1.0;
    for (double mg : {0.0, 0.1, 0.2, 0.3, 0.5, 0.8, 1.2}) {
        auto m = base;
        m.shape.margin = mg;
        const double l = loss_and_gradients(m, X, y).loss;
        EXPECT_GE(l, prev - 1e-12) << mg;
        prev = l;
    }
}

class GradientCheck : public ::testing::TestWithParam<HeadKind> {};

TEST_P(GradientCheck, AnalyticMatchesCentralDifference) {
    ModelShape s{12, {10, 9}, 6, 5, GetParam(), 8.0, 0.5};
    const auto m = make_model(s, 21);
    Rng rng(22);
    Eigen::MatrixXd X(12, 7);
    for (Eigen::Index i = 0; i < X.size(); ++i) {
        X.data()[i] = uniform(rng, -2.0, 2.0);
    }
    const std::vector<int> y{0, 1, 2, 3, 4, 2, 1};
    const double err = testing_oracle::max_gradient_error(m, X, y);
    EXPECT_LT(err, 1e-4);
}

INSTANTIATE_TEST_SUITE_P(Heads, GradientCheck,
                         ::testing::Values(HeadKind::softmax, HeadKind::norm_softmax, HeadKind::arcface),
                         [](const auto& info) { return to_string(info.param); });

TEST(Schedule, StepDropsAfterConfiguredEpochs) {
    TrainConfig c;
    EXPECT_DOUBLE_EQ(learning_rate(c, 1), 0.025);
    EXPECT_DOUBLE_EQ(learning_rate(c, 15), 0.025);
    EXPECT_NEAR(learning_rate(c, 16), 0.0025, 1e-15);
    EXPECT_NEAR(learning_rate(c, 19), 0.00025, 1e-15);
}

TEST(Fit, ZeroLearningRateLeavesParametersUnchanged) {
    ModelShape s{16, {8}, 4, 3, HeadKind::arcface, 8.0, 0.5};
    auto m = make_model(s, 5);
    const auto before = m;
    TrainConfig c;
    c.epochs = 2;
    c.batch = 4;
    c.lr = 0.0;
    c.standardize_inputs = false;
    const Eigen::MatrixXd X = Eigen::MatrixXd::Random(16, 9);
    fit(m, [&](int) { return EpochData{X, {0, 1, 2, 0, 1, 2, 0, 1, 2}}; }, c, 1);
    auto p0 = parameters(const_cast<EmbedModel&>(before));
    auto p1 = parameters(m);
    for (std::size_t i = 0; i < p0.size(); ++i) {
        EXPECT_EQ(*p0[i], *p1[i]);
    }
}

TEST(Fit, DivergenceIsReported) {
    ModelShape s{4, {4}, 0, 2, HeadKind::softmax, 8.0, 0.0};
    auto m = make_model(s, 5);
    TrainConfig c;
    c.epochs = 50;
    c.batch = 2;
    c.lr = 1e30;
    c.momentum = 0.0;
    c.standardize_inputs = false;
    const Eigen::MatrixXd X = Eigen::MatrixXd::Random(4, 4) * 100.0;
    EXPECT_THROW(fit(m, [&](int) { return EpochData{X, {0, 1, 0, 1}}; }, c, 1), TrainingDiverged);
}

TEST(Fit, SeparableGaussiansAreLearned) {
    ModelShape s{10, {16}, 8, 3, HeadKind::arcface, 8.0, 0.3};
    auto m = make_model(s, 6);
    TrainConfig c;
    c.epochs = 15;
    c.batch = 16;
    c.lr = 0.05;
    c.lr_drops = {};
    const auto source = [](int epoch) {
        Rng rng(static_cast<std::uint64_t>(epoch));
        std::normal_distribution<double> n(0.0, 0.3);
        EpochData d{Eigen::MatrixXd(10, 90), std::vector<int>(90)};
        for (Eigen::Index j = 0; j < 90; ++j) {
            const int cls = static_cast<int>(j % 3);
            for (Eigen::Index i = 0; i < 10; ++i) {
                d.features(i, j) = n(rng) + (i == cls ? 2.0 : 0.0);
            }
            d.labels[static_cast<std::size_t>(j)] = cls;
        }
        return d;
    };
    const auto h = fit(m, source, c, 3);
    EXPECT_LT(h.back().loss, h.front().loss);
    EXPECT_GE(h.back().accuracy, 0.95);
}

TEST(Fit, DeterministicForSeed) {
    ModelShape s{8, {8}, 4, 2, HeadKind::norm_softmax, 8.0, 0.0};
    const Eigen::MatrixXd X = Eigen::MatrixXd::Random(8, 20);
    std::vector<int> y(20);
    for (int i = 0; i < 20; ++i) {
        y[static_cast<std::size_t>(i)] = i % 2;
    }
    TrainConfig c;
    c.epochs = 3;
    c.batch = 5;
    auto a = make_model(s, 1);
    auto b = make_model(s, 1);
    fit(a, [&](int) { return EpochData{X, y}; }, c, 7);
    fit(b, [&](int) { return EpochData{X, y}; }, c, 7);
    EXPECT_EQ(a.head.W, b.head.W);
    EXPECT_EQ(a.hidden[0].W, b.hidden[0].W);
}

TEST(Epoch, GenerationIsOrderedAndIndependentOfJobs) {
    const auto p = protocols(3, 40);
    SignalTrainingConfig c;
    c.instances_per_class = 4;
    c.n_samples = 2048;
    const auto a = generate_epoch(p, c, 99, 1);
    c.jobs = 4;
    const auto b = generate_epoch(p, c, 99, 1);
    EXPECT_EQ(a.features, b.features);
    EXPECT_EQ(a.labels, (std::vector<int>{0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2}));
    const auto e2 = generate_epoch(p, c, 99, 2);
    EXPECT_NE(a.features, e2.features);
}

TEST(Embed, UnitNormDeterministicAndRepetitionStable) {
    ModelShape s;
    s.classes = 4;
    const auto m = make_model(s, 8);
    const auto x = white(4096, 9);
    const auto e = embed(m, x);
    EXPECT_EQ(e.size(), 128);
    EXPECT_NEAR(e.norm(), 1.0, 1e-12);
    EXPECT_EQ(e, embed(m, x));
    std::vector<cdouble> rep;
    for (int k = 0; k < 3; ++k) {
        rep.insert(rep.end(), x.begin(), x.end());
    }
    EXPECT_GT(e.dot(embed(m, rep)), 0.99);
}

TEST(Embed, DeskTrainingSeparatesProtocols) {
    const auto p = protocols(4, 2024);
    SignalTrainingConfig sc;
    sc.instances_per_class = 24;
    sc.n_samples = 4096;
    sc.augment.snr_db = {15.0, 25.0};
    ModelShape s;
    s.input_dim = 512;
    s.hidden = {128};
    s.embedding_dim = 32;
    s.classes = 4;
    auto m = make_model(s, 1);
    TrainConfig c;
    c.epochs = 6;
    c.batch = 16;
    c.lr = 0.02;
    c.lr_drops = {};
    const auto h = fit(m, [&](int e) { return generate_epoch(p, sc, 5, e); }, c, 5);
    EXPECT_LT(h.back().loss, h.front().loss);

    // Fresh instances: intra-class cosine should beat inter-class by a margin.
    const auto test = generate_epoch(p, sc, 777, 1);
    const Eigen::MatrixXd E = embed_features(m, test.features);
    double same = 0.0, diff = 0.0;
    std::size_t ns = 0, nd = 0;
    for (Eigen::Index i = 0; i < E.cols(); ++i) {
        for (Eigen::Index j = i + 1; j < E.cols(); ++j) {
            const double cs = E.col(i).dot(E.col(j));
            if (test.labels[static_cast<std::size_t>(i)] == test.labels[static_cast<std::size_t>(j)]) {
                same += cs;
                ++ns;
            } else {
                diff += cs;
                ++nd;
            }
        }
    }
    EXPECT_GE(same / static_cast<double>(ns) - diff / static_cast<double>(nd), 0.2);
}
