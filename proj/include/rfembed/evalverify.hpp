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

#ifndef RFEMBED_EVALVERIFY_HPP
#define RFEMBED_EVALVERIFY_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rfembed/embednet.hpp"
#include "rfembed/error.hpp"
#include "rfembed/featcsp.hpp"
#include "rfembed/impair.hpp"
#include "rfembed/parallel.hpp"
#include "rfembed/signal.hpp"

namespace rfembed {

// Rows of `vectors` are items.
struct LabeledSet {
    Eigen::MatrixXd vectors;
    std::vector<int> labels;
    std::vector<double> snr_db;  // optional per-item tag, empty or one per row
};

inline void validate(const LabeledSet& s) {
    require(s.vectors.rows() >= 2, "need at least two items");
    require(static_cast<std::size_t>(s.vectors.rows()) == s.labels.size(), "one label per row required");
    require(s.snr_db.empty() || s.snr_db.size() == s.labels.size(), "SNR tags must match the item count");
    require(s.vectors.allFinite(), "representations contain non-finite values");
}

// --- pair bookkeeping -----------------------------------------------------------------

struct PairCounts {
    std::uint64_t same = 0;
    std::uint64_t different = 0;
    bool operator==(const PairCounts&) const = default;
};

inline PairCounts pair_counts(const std::vector<int>& labels) {
    require(labels.size() >= 2, "pair counts need at least two items");
    std::map<int, std::uint64_t> n;
    for (int l : labels) {
        ++n[l];
    }
    PairCounts c;
    for (const auto& [label, k] : n) {
        c.same += k * (k - 1) / 2;
    }
    const auto N = static_cast<std::uint64_t>(labels.size());
    c.different = N * (N - 1) / 2 - c.same;
    return c;
}

// --- distances ---------------------------------------------------------------------------

enum class Metric { euclidean, cosine };

inline std::string to_string(Metric m) { return m == Metric::cosine ? "cosine" : "euclidean"; }

inline Metric parse_metric(const std::string& s) {
    if (s == "cosine") {
        return Metric::cosine;
    }
    if (s == "euclidean") {
        return Metric::euclidean;
    }
    throw ConfigError("unknown metric '" + s + "' (expected cosine or euclidean)");
}

namespace detail {

// Rows prepared for the metric: unit rows for cosine, untouched otherwise.
inline Eigen::MatrixXd prepare_rows(const Eigen::MatrixXd& v, Metric m) {
    if (m == Metric::euclidean) {
        return v;
    }
    Eigen::MatrixXd u = v;
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
        const double n = u.row(i).norm();
        if (!(n > 0.0)) {
            throw ValidationError("cosine distance needs nonzero vectors (row " + std::to_string(i) + " is zero)");
        }
        u.row(i) /= n;
    }
    return u;
}

inline double distance(const Eigen::MatrixXd& rows, Eigen::Index i, Eigen::Index j, Metric m) {
    if (m == Metric::cosine) {
        return 1.0 - rows.row(i).dot(rows.row(j));
    }
    return (rows.row(i) - rows.row(j)).norm();
}

// Number of pairs whose row index is below `i`, i.e. the offset of row i.
inline std::uint64_t pairs_before(std::uint64_t i, std::uint64_t N) { return i * N - i * (i + 1) / 2; }

}  // namespace detail

// --- verification -------------------------------------------------------------------------

struct OperatingPoint {
    double target_fpr = 0.0;
    double threshold = 0.0;      // pairs with distance <= threshold are positive
    double tpr = 0.0;
    double achieved_fpr = 0.0;   // never above target_fpr
    bool operator==(const OperatingPoint&) const = default;
};

struct VerificationReport {
    Metric metric = Metric::cosine;
    PairCounts counts;
    std::vector<OperatingPoint> points;
    bool degenerate = false;  // every pair at the same distance
    bool streamed = false;
    double same_mean = 0.0;   // mean distance per pair type
    double different_mean = 0.0;

    double tpr_at(double fpr) const {
        for (const auto& p : points) {
            if (p.target_fpr == fpr) {
                return p.tpr;
            }
        }
        throw ValidationError("no operating point at the requested FPR");
    }
};

struct VerifyOptions {
    Metric metric = Metric::cosine;
    std::vector<double> fprs{1e-3, 1e-4};
    std::size_t exact_limit = 5000;  // above this N the streaming path runs
    int jobs = 1;
};

namespace detail {

// Largest threshold admitting at most floor(f * D) different-class pairs,
// given the k + 1 smallest different-class distances in ascending order.
inline double threshold_for(double f, std::uint64_t D, const std::vector<double>& smallest) {
    const auto k = static_cast<std::uint64_t>(std::floor(f * static_cast<double>(D) + 1e-9));
    if (k >= D) {
        return std::numeric_limits<double>::infinity();
    }
    return std::nextafter(smallest[static_cast<std::size_t>(k)], -std::numeric_limits<double>::infinity());
}

// Runs body(i, j, same, d) for every pair i < j, rows split into `jobs`
// contiguous chunks; body receives the chunk index as well.
template <typename Body>
void for_each_pair(const Eigen::MatrixXd& rows, const std::vector<int>& labels, Metric m, std::size_t chunks,
                   Body&& body) {
    const auto N = static_cast<std::size_t>(rows.rows());
    parallel_for(chunks, static_cast<int>(chunks), [&](std::size_t c) {
        // Balanced by pair count: row i owns N - 1 - i pairs.
        const auto total = static_cast<double>(N) * static_cast<double>(N - 1) / 2.0;
        auto bound = [&](std::size_t q) {
            if (q == chunks) {
                return N;
            }
            const double target = total * static_cast<double>(q) / static_cast<double>(chunks);
            std::size_t i = 0;
            while (i < N && static_cast<double>(pairs_before(i, N)) < target) {
                ++i;
            }
            return i;
        };
        const std::size_t lo = bound(c);
        const std::size_t hi = bound(c + 1);
        for (std::size_t i = lo; i < hi; ++i) {
            for (std::size_t j = i + 1; j < N; ++j) {
                body(c, i, j, labels[i] == labels[j],
                     distance(rows, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j), m));
            }
        }
    });
}

}  // namespace detail

// One-to-one verification over all N(N-1)/2 pairs. Ties at the threshold
// count as positive; the threshold never lets the FPR exceed its target.
inline VerificationReport pairwise_verify(const LabeledSet& set, const VerifyOptions& opt = {}) {
    validate(set);
    for (double f : opt.fprs) {
        require(f >= 0.0 && f <= 1.0, "FPR targets must lie in [0, 1]");
    }
    VerificationReport r;
    r.metric = opt.metric;
    r.counts = pair_counts(set.labels);
    if (r.counts.different == 0) {
        throw VerificationUndefined("verification needs at least two distinct labels");
    }
    const auto rows = detail::prepare_rows(set.vectors, opt.metric);
    const auto N = static_cast<std::size_t>(rows.rows());
    const auto chunks = static_cast<std::size_t>(std::max(1, opt.jobs));
    const std::uint64_t D = r.counts.different;
    const std::uint64_t S = r.counts.same;

    std::uint64_t k_max = 0;
    for (double f : opt.fprs) {
        k_max = std::max(k_max, static_cast<std::uint64_t>(std::floor(f * static_cast<double>(D) + 1e-9)));
    }
    const std::size_t keep = static_cast<std::size_t>(std::min<std::uint64_t>(k_max + 1, D));

    std::vector<double> same_sorted;
    std::vector<double> smallest_diff;  // ascending, the `keep` smallest
    // Sums are kept per row and added in row order, so they do not depend on the job count.
    std::vector<double> same_sum(N, 0.0), diff_sum(N, 0.0);
    std::vector<double> dmin(chunks, std::numeric_limits<double>::infinity());
    std::vector<double> dmax(chunks, -std::numeric_limits<double>::infinity());
    auto track = [&](std::size_t c, std::size_t i, bool same, double d) {
        (same ? same_sum : diff_sum)[i] += d;
        dmin[c] = std::min(dmin[c], d);
        dmax[c] = std::max(dmax[c], d);
    };

    if (N <= opt.exact_limit) {
        std::vector<double> same_all(S), diff_all(D);
        // Write each pair to its slot so the arrays are identical for any job count.
        std::vector<std::uint64_t> same_before(N + 1, 0);
        for (std::size_t i = 0; i < N; ++i) {
            std::uint64_t s = 0;
            for (std::size_t j = i + 1; j < N; ++j) {
                s += set.labels[i] == set.labels[j] ? 1 : 0;
            }
            same_before[i + 1] = same_before[i] + s;
        }
        std::vector<std::uint64_t> cursor_same(N), cursor_diff(N);
        for (std::size_t i = 0; i < N; ++i) {
            cursor_same[i] = same_before[i];
            cursor_diff[i] = detail::pairs_before(i, N) - same_before[i];
        }
        detail::for_each_pair(rows, set.labels, opt.metric, chunks, [&](std::size_t c, std::size_t i, std::size_t, bool same, double d) {
            track(c, i, same, d);
            if (same) {
                same_all[cursor_same[i]++] = d;
            } else {
                diff_all[cursor_diff[i]++] = d;
            }
        });
        std::sort(same_all.begin(), same_all.end());
        std::partial_sort(diff_all.begin(), diff_all.begin() + static_cast<std::ptrdiff_t>(keep), diff_all.end());
        diff_all.resize(keep);
        same_sorted = std::move(same_all);
        smallest_diff = std::move(diff_all);
    } else {
        // Streaming: a bounded max-heap per chunk keeps the smallest
        // different-class distances; same-class distances are kept in full
        // because the TPR needs them all.
        r.streamed = true;
        std::vector<std::priority_queue<double>> heaps(chunks);
        std::vector<std::vector<double>> same_parts(chunks);
        detail::for_each_pair(rows, set.labels, opt.metric, chunks, [&](std::size_t c, std::size_t i, std::size_t, bool same, double d) {
            track(c, i, same, d);
            if (same) {
                same_parts[c].push_back(d);
                return;
            }
            auto& h = heaps[c];
            if (h.size() < keep) {
                h.push(d);
            } else if (d < h.top()) {
                h.pop();
                h.push(d);
            }
        });
        for (std::size_t c = 0; c < chunks; ++c) {
            same_sorted.insert(same_sorted.end(), same_parts[c].begin(), same_parts[c].end());
            while (!heaps[c].empty()) {
                smallest_diff.push_back(heaps[c].top());
                heaps[c].pop();
            }
        }
        std::sort(same_sorted.begin(), same_sorted.end());
        std::sort(smallest_diff.begin(), smallest_diff.end());
        smallest_diff.resize(keep);
    }

    const double lo = *std::min_element(dmin.begin(), dmin.end());
    const double hi = *std::max_element(dmax.begin(), dmax.end());
    r.degenerate = lo == hi;
    r.same_mean = S > 0 ? std::accumulate(same_sum.begin(), same_sum.end(), 0.0) / static_cast<double>(S) : 0.0;
    r.different_mean = std::accumulate(diff_sum.begin(), diff_sum.end(), 0.0) / static_cast<double>(D);

    std::vector<double> fprs = opt.fprs;
    std::sort(fprs.begin(), fprs.end());
    fprs.erase(std::unique(fprs.begin(), fprs.end()), fprs.end());
    for (double f : fprs) {
        OperatingPoint p;
        p.target_fpr = f;
        p.threshold = detail::threshold_for(f, D, smallest_diff);
        const auto tp = std::upper_bound(same_sorted.begin(), same_sorted.end(), p.threshold) - same_sorted.begin();
        p.tpr = S > 0 ? static_cast<double>(tp) / static_cast<double>(S) : 0.0;
        const auto fp = std::upper_bound(smallest_diff.begin(), smallest_diff.end(), p.threshold) - smallest_diff.begin();
        p.achieved_fpr = std::isinf(p.threshold) ? 1.0 : static_cast<double>(fp) / static_cast<double>(D);
        r.points.push_back(p);
    }
    return r;
}

// --- statistics -----------------------------------------------------------------------------

namespace detail {

inline std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> rank(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) {
            ++j;
        }
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            rank[idx[k]] = r;
        }
        i = j + 1;
    }
    return rank;
}

}  // namespace detail

// Spearman rank correlation with average ranks for ties; 0 when either side
// is constant.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && x.size() >= 2, "Spearman needs two equal-length samples of size >= 2");
    const auto rx = detail::average_ranks(x);
    const auto ry = detail::average_ranks(y);
    const Eigen::Map<const Eigen::VectorXd> a(rx.data(), static_cast<Eigen::Index>(rx.size()));
    const Eigen::Map<const Eigen::VectorXd> b(ry.data(), static_cast<Eigen::Index>(ry.size()));
    const Eigen::VectorXd ca = a.array() - a.mean();
    const Eigen::VectorXd cb = b.array() - b.mean();
    const double den = ca.norm() * cb.norm();
    return den > 0.0 ? ca.dot(cb) / den : 0.0;
}

struct RunSummary {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation
    double max = 0.0;
};

// Mean, spread and best of repeated runs.
inline RunSummary summarize_runs(const std::vector<double>& v) {
    require(!v.empty(), "no runs to summarize");
    RunSummary s;
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    s.max = *std::max_element(v.begin(), v.end());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) {
            ss += (x - s.mean) * (x - s.mean);
        }
        s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return s;
}

// --- robustness sweeps -------------------------------------------------------------------------

enum class SweepAxis { snr, sigma_rfo, channel };

inline std::string to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::snr: return "snr";
        case SweepAxis::sigma_rfo: return "sigma_rfo";
        case SweepAxis::channel: return "channel";
    }
    return "?";
}

inline SweepAxis parse_sweep_axis(const std::string& s) {
    if (s == "snr") {
        return SweepAxis::snr;
    }
    if (s == "sigma_rfo" || s == "cfo") {
        return SweepAxis::sigma_rfo;
    }
    if (s == "channel") {
        return SweepAxis::channel;
    }
    throw ConfigError("unknown sweep axis '" + s + "' (expected snr, sigma_rfo or channel)");
}

// Clean signals plus what is needed to re-impair them.
struct CleanDataset {
    std::vector<ComplexSignal> signals;
    std::vector<int> labels;
    std::vector<double> bandwidth;  // per item, fraction of the sample rate
};

struct SweepPoint {
    std::string label;  // axis value as text
    ImpairmentConfig impairment;
};

// Grid points for an axis. Values are dB for snr (+inf for no noise),
// normalized sigma for sigma_rfo, and model indices into `channels` otherwise.
inline std::vector<SweepPoint> sweep_points(SweepAxis axis, const ImpairmentConfig& base,
                                            const std::vector<double>& values,
                                            const std::vector<ChannelModel>& channels = {}) {
    std::vector<SweepPoint> pts;
    if (axis == SweepAxis::channel) {
        require(!channels.empty(), "channel sweep needs at least one channel model");
        for (auto c : channels) {
            SweepPoint p{to_string(c), base};
            p.impairment.channel = c;
            pts.push_back(p);
        }
        return pts;
    }
    require(!values.empty(), "sweep grid is empty");
    for (double v : values) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.9g", v);
        SweepPoint p{buf, base};
        if (axis == SweepAxis::snr) {
            p.impairment.snr_db = std::isinf(v) && v > 0.0 ? std::nullopt : std::optional<double>(v);
        } else {
            require(v >= 0.0 && std::isfinite(v), "sigma_rfo grid values must be finite and >= 0");
            p.impairment.cfo_sigma = v;
        }
        pts.push_back(p);
    }
    return pts;
}

using RepresentationHook = std::function<Eigen::VectorXd(const ComplexSignal&)>;

struct SweepResult {
    std::string axis_value;
    VerificationReport report;
};

// Re-impairs the clean set at every grid point, extracts representations
// and verifies. Item i at grid point g uses derive_seed(seed, g, 0, i), so
// the draws do not depend on the worker count. The hook must be reentrant.
inline std::vector<SweepResult> robustness_sweep(const CleanDataset& data, const RepresentationHook& hook,
                                                 const std::vector<SweepPoint>& grid, const VerifyOptions& opt,
                                                 std::uint64_t seed, const TdlTable* profiles = nullptr) {
    const std::size_t n = data.signals.size();
    require(n >= 2 && data.labels.size() == n && data.bandwidth.size() == n, "sweep dataset is inconsistent");
    std::vector<SweepResult> out;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const auto& cfg = grid[g].impairment;
        validate(cfg);
        const TdlProfile* profile = nullptr;
        if (profiles && cfg.channel != ChannelModel::none) {
            const auto it = profiles->find(cfg.channel);
            if (it == profiles->end()) {
                throw ConfigError("no tap table loaded for " + to_string(cfg.channel));
            }
            profile = &it->second;
        }
        std::vector<Eigen::VectorXd> reps(n);
        parallel_for(n, opt.jobs, [&](std::size_t i) {
            Rng rng = make_rng(derive_seed(seed, g, 0, i), Stream::impairment);
            reps[i] = hook(impair(data.signals[i], cfg, data.bandwidth[i], rng, profile));
        });
        LabeledSet set;
        set.vectors.resize(static_cast<Eigen::Index>(n), reps.front().size());
        for (std::size_t i = 0; i < n; ++i) {
            require(reps[i].size() == reps.front().size(), "representation length varies across items");
            set.vectors.row(static_cast<Eigen::Index>(i)) = reps[i].transpose();
        }
        set.labels = data.labels;
        out.push_back({grid[g].label, pairwise_verify(set, opt)});
    }
    return out;
}

// --- downstream classifier ------------------------------------------------------------------

struct ClassifierConfig {
    double train_fraction = 0.54;
    std::vector<std::size_t> hidden{128, 128};
    TrainConfig train{40, 32, 0.01, 0.9, 5e-4, {}, true, 1};
    bool shuffle_labels = false;  // permutation null
    std::uint64_t seed = 0;
};

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Per-class split: each class contributes round(fraction * n_c) items to
// training, drawn by a seeded shuffle.
inline Split stratified_split(const std::vector<int>& labels, double fraction, std::uint64_t seed) {
    require(fraction > 0.0 && fraction < 1.0, "train fraction must lie in (0, 1)");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        by_class[labels[i]].push_back(i);
    }
    Rng rng = make_rng(seed, Stream::split);
    Split s;
    for (auto& [label, idx] : by_class) {
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto k = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(idx.size())));
        if (k == 0) {
            throw ValidationError("class " + std::to_string(label) + " has no items in the training split");
        }
        s.train.insert(s.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
        s.test.insert(s.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

inline std::vector<int> predict(const EmbedModel& m, const Eigen::MatrixXd& rows) {
    const auto logits = forward(m, rows.transpose()).logits;
    std::vector<int> out(static_cast<std::size_t>(logits.cols()));
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
        Eigen::Index arg = 0;
        logits.col(j).maxCoeff(&arg);
        out[static_cast<std::size_t>(j)] = static_cast<int>(arg);
    }
    return out;
}

struct ClassifierResult {
    EmbedModel model;
    std::vector<int> classes;  // original label of each output index
    Split split;
    std::vector<int> labels;   // labels used, after any shuffling
    double test_accuracy = 0.0;
    std::vector<EpochMetrics> history;
};

inline double accuracy(const ClassifierResult& c, const Eigen::MatrixXd& rows, const std::vector<int>& labels) {
    require(static_cast<std::size_t>(rows.rows()) == labels.size() && !labels.empty(), "rows and labels disagree");
    const auto pred = predict(c.model, rows);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        hit += c.classes[static_cast<std::size_t>(pred[i])] == labels[i] ? 1 : 0;
    }
    return static_cast<double>(hit) / static_cast<double>(labels.size());
}

// Dense classifier (plain softmax head on the last hidden layer) trained on
// the training split; accuracy is top-1 on the held-out split.
inline ClassifierResult train_feature_classifier(const LabeledSet& set, const ClassifierConfig& cfg) {
    validate(set);
    ClassifierResult r;
    r.labels = set.labels;
    if (cfg.shuffle_labels) {
        Rng rng = make_rng(cfg.seed, Stream::shuffle);
        std::shuffle(r.labels.begin(), r.labels.end(), rng);
    }
    const std::set<int> distinct(r.labels.begin(), r.labels.end());
    if (distinct.size() < 2) {
        throw ValidationError("classifier needs at least two classes");
    }
    r.classes.assign(distinct.begin(), distinct.end());
    std::map<int, int> index;
    for (std::size_t k = 0; k < r.classes.size(); ++k) {
        index[r.classes[k]] = static_cast<int>(k);
    }
    r.split = stratified_split(r.labels, cfg.train_fraction, cfg.seed);
    require(!r.split.test.empty(), "test split is empty");

    EpochData train;
    train.features.resize(set.vectors.cols(), static_cast<Eigen::Index>(r.split.train.size()));
    for (std::size_t k = 0; k < r.split.train.size(); ++k) {
        const auto i = r.split.train[k];
        train.features.col(static_cast<Eigen::Index>(k)) = set.vectors.row(static_cast<Eigen::Index>(i)).transpose();
        train.labels.push_back(index[r.labels[i]]);
    }
    ModelShape shape;
    shape.input_dim = static_cast<std::size_t>(set.vectors.cols());
    shape.hidden = cfg.hidden;
    shape.embedding_dim = 0;
    shape.classes = r.classes.size();
    shape.head = HeadKind::softmax;
    r.model = make_model(shape, cfg.seed, 0);
    r.history = fit(r.model, [&](int) { return train; }, cfg.train, cfg.seed);

    Eigen::MatrixXd test(static_cast<Eigen::Index>(r.split.test.size()), set.vectors.cols());
    std::vector<int> test_labels;
    for (std::size_t k = 0; k < r.split.test.size(); ++k) {
        test.row(static_cast<Eigen::Index>(k)) = set.vectors.row(static_cast<Eigen::Index>(r.split.test[k]));
        test_labels.push_back(r.labels[r.split.test[k]]);
    }
    r.test_accuracy = accuracy(r, test, test_labels);
    return r;
}

// --- 2-D projection ------------------------------------------------------------------------------

inline Eigen::MatrixXd project_2d(const Eigen::MatrixXd& rows) {
    require(rows.rows() >= 3, "2-D projection needs at least three items");
    require(rows.cols() >= 2, "2-D projection needs at least two dimensions");
    const auto m = pca_fit(rows, 2);
    Eigen::MatrixXd out(rows.rows(), 2);
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        out.row(i) = pca_project(m, Eigen::VectorXd(rows.row(i).transpose())).transpose();
    }
    return out;
}

}  // namespace rfembed

#endif
