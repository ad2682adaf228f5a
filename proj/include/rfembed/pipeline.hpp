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

// Compositions of the modules used by the command-line tool and the
// acceptance run: representation extraction over a manifest and training
// the embedder on freshly sampled protocols.

#ifndef RFEMBED_PIPELINE_HPP
#define RFEMBED_PIPELINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "rfembed/config.hpp"
#include "rfembed/dataio.hpp"
#include "rfembed/embednet.hpp"
#include "rfembed/evalverify.hpp"
#include "rfembed/featcsp.hpp"
#include "rfembed/featstat.hpp"

namespace rfembed {

enum class Representation { features, scf, scf_pca, embeddings };

inline std::string to_string(Representation r) {
    switch (r) {
        case Representation::features: return "features";
        case Representation::scf: return "scf";
        case Representation::scf_pca: return "scf-pca";
        case Representation::embeddings: return "embeddings";
    }
    return "?";
}

inline Representation parse_representation(const std::string& s) {
    for (auto r : {Representation::features, Representation::scf, Representation::scf_pca,
                   Representation::embeddings}) {
        if (s == to_string(r)) {
            return r;
        }
    }
    throw ConfigError("unknown representation '" + s + "' (expected features, scf, scf-pca or embeddings)");
}

// Default metric: cosine for learned embeddings, Euclidean otherwise.
inline Metric default_metric(Representation r) {
    return r == Representation::embeddings ? Metric::cosine : Metric::euclidean;
}

struct Extractor {
    Representation kind = Representation::features;
    std::optional<PcaModel> pca;        // scf-pca
    std::optional<EmbedModel> network;  // embeddings

    std::vector<std::string> names() const {
        std::vector<std::string> n;
        switch (kind) {
            case Representation::features:
                n.assign(kModFeatureNames.begin(), kModFeatureNames.end());
                break;
            case Representation::scf:
                for (std::size_t f = 0; f < kScfFreqBins; ++f) {
                    for (std::size_t a = 0; a < kScfAlphaBins; ++a) {
                        n.push_back("scf_f" + std::to_string(f) + "_a" + std::to_string(a));
                    }
                }
                break;
            case Representation::scf_pca:
                for (std::size_t i = 0; i < pca->k(); ++i) {
                    n.push_back("pc" + std::to_string(i));
                }
                break;
            case Representation::embeddings:
                for (std::size_t i = 0; i < network->output_dim(); ++i) {
                    n.push_back("e" + std::to_string(i));
                }
                break;
        }
        return n;
    }

    // Reentrant: safe to call from several workers at once.
    Eigen::VectorXd operator()(const ComplexSignal& x) const {
        switch (kind) {
            case Representation::features: {
                const auto f = modulation_features(x);
                return Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
            }
            case Representation::scf:
                return flatten(estimate_scf_fsm(x));
            case Representation::scf_pca:
                return pca_project(*pca, estimate_scf_fsm(x));
            case Representation::embeddings:
                return embed(*network, x);
        }
        throw ValidationError("unknown representation");
    }
};

inline Extractor make_extractor(Representation kind, std::optional<PcaModel> pca = std::nullopt,
                                std::optional<EmbedModel> network = std::nullopt) {
    if (kind == Representation::scf_pca && !pca) {
        throw ConfigError("the scf-pca representation needs a PCA model (--pca)");
    }
    if (kind == Representation::embeddings && !network) {
        throw ConfigError("the embeddings representation needs a trained model (--model)");
    }
    return {kind, std::move(pca), std::move(network)};
}

inline std::vector<Eigen::VectorXd> extract_all(const std::vector<ComplexSignal>& signals, const Extractor& ex,
                                                int jobs = 1) {
    std::vector<Eigen::VectorXd> out(signals.size());
    parallel_for(signals.size(), jobs, [&](std::size_t i) { out[i] = ex(signals[i]); });
    return out;
}

inline LabeledSet to_labeled_set(const std::vector<Eigen::VectorXd>& rows, const std::vector<int>& labels) {
    require(!rows.empty() && rows.size() == labels.size(), "one representation per label required");
    LabeledSet s;
    s.vectors.resize(static_cast<Eigen::Index>(rows.size()), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        s.vectors.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    }
    s.labels = labels;
    return s;
}

inline CleanDataset clean_dataset(const Manifest& m, int jobs = 1) {
    CleanDataset d;
    d.signals = load_signals(m, jobs);
    for (const auto& e : m.entries) {
        if (!e.bandwidth_fraction) {
            throw ValidationError("entry " + e.file + " has no bandwidth_fraction; sweeps need it");
        }
        d.labels.push_back(e.label);
        d.bandwidth.push_back(*e.bandwidth_fraction);
    }
    return d;
}

// --- embedder training on synthetic protocols ---------------------------------------------

struct EmbedderTraining {
    int protocols = 20;
    std::uint64_t protocol_seed = 0;  // protocols are sample_protocol(protocol_seed, 0..n-1)
    SignalTrainingConfig data;
    ModelShape shape;                 // input_dim and classes are filled in
    TrainConfig train;
    GeneratorConfig generator;
    std::size_t fft_size = 128;
};

struct TrainedEmbedder {
    EmbedModel model;
    std::vector<ProtocolSpec> protocols;
    std::vector<EpochMetrics> history;
};

// Every epoch draws fresh instances of the same protocols (seed derived from
// the master seed, class, epoch and instance index).
inline TrainedEmbedder train_embedder(const EmbedderTraining& t, std::uint64_t seed,
                                      const TdlTable* profiles = nullptr) {
    require(t.protocols >= 2, "training needs at least two protocols");
    TrainedEmbedder out;
    for (int p = 0; p < t.protocols; ++p) {
        out.protocols.push_back(sample_protocol(t.protocol_seed, p, t.generator));
    }
    ModelShape shape = t.shape;
    shape.input_dim = 4 * t.fft_size;
    shape.classes = out.protocols.size();
    out.model = make_model(shape, seed, t.fft_size);
    out.history = fit(
        out.model,
        [&](int epoch) { return generate_epoch(out.protocols, t.data, seed, epoch, t.fft_size, profiles); },
        t.train, seed);
    return out;
}

}  // namespace rfembed

#endif
