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

#ifndef RFEMBED_CLI_HPP
#define RFEMBED_CLI_HPP

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rfembed/config.hpp"
#include "rfembed/dataio.hpp"
#include "rfembed/pipeline.hpp"

namespace rfembed::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

// Parsed command line. Everything optional falls back to the config file
// and then to library defaults.
struct Options {
    std::uint64_t seed = 0;
    std::string config;
    int jobs = 1;
    std::string out = ".";
    std::string tdl;

    // generate
    std::optional<int> protocols;
    std::optional<int> instances;
    std::optional<std::size_t> samples;
    std::optional<double> sample_rate;
    bool clean = false;

    // impair
    std::string snr;
    std::optional<double> cfo_sigma;
    std::string channels;

    // shared by the per-manifest commands
    std::string manifest;
    std::string table;
    std::string repr = "features";
    std::string model;
    std::string pca;
    std::optional<std::size_t> pca_k;
    std::string metric;
    std::string fpr;

    // train
    std::optional<int> epochs;
    std::optional<double> lr;
    std::optional<std::size_t> batch;
    std::string head;
    std::optional<int> train_instances;

    // sweep
    std::string axis = "snr";
    std::string grid;

    // classify
    bool shuffle_labels = false;
    std::optional<double> train_fraction;
};

namespace detail {

inline std::vector<double> parse_reals(const std::string& s, const char* what) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "inf" || item == "+inf") {
            v.push_back(std::numeric_limits<double>::infinity());
            continue;
        }
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw ValidationError(std::string("cannot parse '") + item + "' in " + what);
        }
    }
    require(!v.empty(), std::string(what) + " is empty");
    return v;
}

inline std::vector<std::string> parse_words(const std::string& s) {
    std::vector<std::string> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        v.push_back(item);
    }
    return v;
}

class Context {
public:
    Context(const Options& o, std::ostream& out) : opt(o), log(out) {
        if (!o.config.empty()) {
            cfg = load_config(o.config);
        }
        require(o.jobs >= 1, "--jobs must be >= 1");
        cfg.train.jobs = o.jobs;
        cfg.verify.jobs = o.jobs;
        cfg.classifier.train.jobs = o.jobs;
        if (!o.tdl.empty()) {
            tdl = load_tdl_table(o.tdl);
        } else if (const fs::path shipped = fs::path(RFEMBED_DATA_DIR) / "tdl_profiles.json"; fs::exists(shipped)) {
            tdl = load_tdl_table(shipped);
        } else {
            tdl = builtin_tdl_table();
        }
        if (!o.metric.empty()) {
            cfg.verify.metric = parse_metric(o.metric);
        }
        if (!o.fpr.empty()) {
            cfg.verify.fprs = parse_reals(o.fpr, "--fpr");
        }
    }

    fs::path out_dir() const {
        const fs::path p(opt.out);
        std::error_code ec;
        fs::create_directories(p, ec);
        if (!fs::is_directory(p)) {
            throw IoError("cannot create output directory " + p.string());
        }
        return p;
    }

    Manifest manifest() const {
        require(!opt.manifest.empty(), "--manifest is required");
        return read_manifest(opt.manifest);
    }

    Extractor extractor() const {
        const auto kind = parse_representation(opt.repr);
        std::optional<PcaModel> pca;
        std::optional<EmbedModel> net;
        if (!opt.pca.empty()) {
            pca = pca_from_container(load_container(opt.pca));
        }
        if (!opt.model.empty()) {
            net = model_from_container(load_container(opt.model));
        }
        return make_extractor(kind, std::move(pca), std::move(net));
    }

    // A labeled representation set from --table, or from --manifest + --repr.
    LabeledSet labeled_set(Metric* metric_default = nullptr) const {
        if (!opt.table.empty()) {
            return labeled_set_from_table(read_table(opt.table, 2));
        }
        const auto m = manifest();
        const auto ex = extractor();
        if (metric_default && opt.metric.empty()) {
            *metric_default = default_metric(ex.kind);
        }
        return to_labeled_set(extract_all(load_signals(m, opt.jobs), ex, opt.jobs), m.labels());
    }

    void augment_overrides(AugmentConfig& a) const {
        if (!opt.snr.empty()) {
            const auto colon = opt.snr.find(':');
            if (opt.snr == "none") {
                a.noise = false;
            } else if (colon == std::string::npos) {
                const double v = parse_reals(opt.snr, "--snr").front();
                a.snr_db = {v, v};
            } else {
                a.snr_db = {parse_reals(opt.snr.substr(0, colon), "--snr").front(),
                            parse_reals(opt.snr.substr(colon + 1), "--snr").front()};
            }
        }
        if (opt.cfo_sigma) {
            a.cfo_sigma = *opt.cfo_sigma;
        }
        if (!opt.channels.empty()) {
            a.channels.clear();
            for (const auto& w : parse_words(opt.channels)) {
                a.channels.push_back(parse_channel_model(w));
            }
        }
        validate(a);
    }

    const Options& opt;
    std::ostream& log;
    RunConfig cfg;
    TdlTable tdl;
};

// --- subcommands ------------------------------------------------------------------------

inline void cmd_generate(Context& c) {
    DatasetRequest r;
    r.master_seed = c.opt.seed;
    r.sizes = c.cfg.dataset;
    if (c.opt.protocols) {
        r.sizes.protocols = *c.opt.protocols;
    }
    if (c.opt.instances) {
        r.sizes.instances = *c.opt.instances;
    }
    if (c.opt.samples) {
        r.sizes.n_samples = *c.opt.samples;
    }
    if (c.opt.sample_rate) {
        r.sizes.sample_rate = *c.opt.sample_rate;
    }
    require(r.sizes.protocols >= 1 && r.sizes.instances >= 1 && r.sizes.n_samples >= 1,
            "--protocols, --instances and --samples must be positive");
    r.generator = c.cfg.generator;
    r.augment = c.cfg.augment;
    if (c.opt.clean) {
        r.augment.noise = false;
        r.augment.cfo_sigma = 0.0;
        r.augment.random_phase = false;
        r.augment.channels = {ChannelModel::none};
    }
    c.augment_overrides(r.augment);
    r.jobs = c.opt.jobs;
    const auto m = build_synthetic_dataset(r, c.out_dir(), &c.tdl);
    c.log << "wrote " << m.entries.size() << " instances to " << (c.out_dir() / kManifestFile).string() << "\n";
}

inline void cmd_impair(Context& c) {
    AugmentConfig a = c.cfg.augment;
    c.augment_overrides(a);
    const auto m = reimpair_dataset(c.manifest(), a, c.opt.seed, c.out_dir(), c.opt.jobs, &c.tdl);
    c.log << "re-impaired " << m.entries.size() << " instances into " << c.out_dir().string() << "\n";
}

inline void write_representations(Context& c, const Manifest& m, const Extractor& ex, const fs::path& path) {
    const auto rows = extract_all(load_signals(m, c.opt.jobs), ex, c.opt.jobs);
    write_table(path, representation_table(m, ex.names(), rows));
    c.log << "wrote " << rows.size() << " rows to " << path.string() << "\n";
}

inline void cmd_features(Context& c) {
    write_representations(c, c.manifest(), make_extractor(Representation::features), c.out_dir() / "features.csv");
}

inline void cmd_scf(Context& c) {
    const auto m = c.manifest();
    const auto signals = load_signals(m, c.opt.jobs);
    std::vector<ScfMatrix> scf(signals.size());
    parallel_for(signals.size(), c.opt.jobs, [&](std::size_t i) { scf[i] = estimate_scf_fsm(signals[i]); });
    std::vector<Eigen::VectorXd> flat;
    for (const auto& s : scf) {
        flat.push_back(flatten(s));
    }
    const auto dir = c.out_dir();
    write_table(dir / "scf.csv", representation_table(m, make_extractor(Representation::scf).names(), flat));
    std::optional<PcaModel> pca;
    if (c.opt.pca_k) {
        // Project with the stored (float32) model so later --pca runs reproduce this table.
        const auto stored = pca_container(pca_fit(scf, *c.opt.pca_k));
        save_container(dir / "pca.json", stored);
        pca = pca_from_container(stored);
    } else if (!c.opt.pca.empty()) {
        pca = pca_from_container(load_container(c.opt.pca));
    }
    if (pca) {
        std::vector<Eigen::VectorXd> proj;
        for (const auto& s : scf) {
            proj.push_back(pca_project(*pca, s));
        }
        const auto ex = make_extractor(Representation::scf_pca, pca);
        write_table(dir / "scf_pca.csv", representation_table(m, ex.names(), proj));
    }
    c.log << "wrote SCF for " << scf.size() << " instances to " << dir.string() << "\n";
}

inline void cmd_train(Context& c) {
    EmbedderTraining t;
    t.protocols = c.opt.protocols.value_or(c.cfg.dataset.protocols);
    t.protocol_seed = c.opt.seed;
    t.generator = c.cfg.generator;
    t.data.instances_per_class =
        static_cast<std::size_t>(c.opt.train_instances.value_or(c.cfg.train_instances));
    t.data.n_samples = c.opt.samples.value_or(c.cfg.dataset.n_samples);
    t.data.sample_rate = c.opt.sample_rate.value_or(c.cfg.dataset.sample_rate);
    t.data.augment = c.cfg.augment;
    c.augment_overrides(t.data.augment);
    t.data.jobs = c.opt.jobs;
    t.shape = c.cfg.model;
    if (!c.opt.head.empty()) {
        t.shape.head = parse_head_kind(c.opt.head);
    }
    t.train = c.cfg.train;
    if (c.opt.epochs) {
        t.train.epochs = *c.opt.epochs;
    }
    if (c.opt.lr) {
        t.train.lr = *c.opt.lr;
    }
    if (c.opt.batch) {
        t.train.batch = *c.opt.batch;
    }
    const auto r = train_embedder(t, c.opt.seed, &c.tdl);
    const auto dir = c.out_dir();
    save_container(dir / "model.json",
                   model_container(r.model, "embedmodel",
                                   {{"seed", c.opt.seed},
                                    {"protocols", t.protocols},
                                    {"epochs", t.train.epochs},
                                    {"lr", t.train.lr},
                                    {"batch", t.train.batch},
                                    {"instances_per_class", t.data.instances_per_class}}));
    Table log;
    log.header = {"epoch", "lr", "loss", "accuracy"};
    for (const auto& h : r.history) {
        log.keys.push_back({std::to_string(h.epoch)});
        log.values.push_back({h.lr, h.loss, h.accuracy});
        c.log << "epoch " << h.epoch << " loss " << format_real(h.loss) << " acc " << format_real(h.accuracy)
              << "\n";
    }
    write_table(dir / "train_log.csv", log);
}

inline void cmd_embed(Context& c) {
    require(!c.opt.model.empty(), "embed needs --model");
    const auto net = model_from_container(load_container(c.opt.model));
    write_representations(c, c.manifest(), make_extractor(Representation::embeddings, std::nullopt, net),
                          c.out_dir() / "embeddings.csv");
}

inline void cmd_verify(Context& c) {
    VerifyOptions o = c.cfg.verify;
    Metric m = o.metric;
    const auto set = c.labeled_set(&m);
    if (c.opt.metric.empty() && c.opt.table.empty()) {
        o.metric = m;
    }
    const auto r = pairwise_verify(set, o);
    write_json(c.out_dir() / "report.json", to_json(r));
    for (const auto& p : r.points) {
        c.log << "tpr@fpr=" << format_real(p.target_fpr) << " " << format_real(p.tpr) << "\n";
    }
}

inline void cmd_sweep(Context& c) {
    const auto axis = parse_sweep_axis(c.opt.axis);
    const auto ex = c.extractor();
    VerifyOptions o = c.cfg.verify;
    if (c.opt.metric.empty()) {
        o.metric = default_metric(ex.kind);
    }
    ImpairmentConfig base;
    base.cfo_sigma = c.cfg.augment.cfo_sigma;
    base.delay_spread = c.cfg.augment.delay_spread;
    std::vector<SweepPoint> grid;
    if (axis == SweepAxis::channel) {
        std::vector<ChannelModel> models;
        for (const auto& w : parse_words(c.opt.grid.empty() ? "none,TDL-A,TDL-B,TDL-C,TDL-D,TDL-E" : c.opt.grid)) {
            models.push_back(parse_channel_model(w));
        }
        grid = sweep_points(axis, base, {}, models);
    } else {
        const std::string def = axis == SweepAxis::snr ? "-3,0,3,6,9,12,15,18,21" : "0.001,0.00316,0.01,0.0316,0.1";
        grid = sweep_points(axis, base, parse_reals(c.opt.grid.empty() ? def : c.opt.grid, "--grid"));
    }
    const auto results = robustness_sweep(clean_dataset(c.manifest(), c.opt.jobs), std::cref(ex), grid, o,
                                          c.opt.seed, &c.tdl);
    const auto dir = c.out_dir();
    write_table(dir / "sweep.csv", sweep_table(to_string(axis), results));
    json all = json::array();
    for (const auto& r : results) {
        all.push_back({{"axis", to_string(axis)}, {"value", r.axis_value}, {"report", to_json(r.report)}});
        c.log << to_string(axis) << "=" << r.axis_value << " tpr " << format_real(r.report.points.front().tpr)
              << "\n";
    }
    write_json(dir / "sweep.json", all);
}

inline void cmd_classify(Context& c) {
    const auto set = c.labeled_set();
    ClassifierConfig cc = c.cfg.classifier;
    cc.seed = c.opt.seed;
    cc.shuffle_labels = c.opt.shuffle_labels;
    if (c.opt.train_fraction) {
        cc.train_fraction = *c.opt.train_fraction;
    }
    if (c.opt.epochs) {
        cc.train.epochs = *c.opt.epochs;
    }
    if (c.opt.lr) {
        cc.train.lr = *c.opt.lr;
    }
    const auto r = train_feature_classifier(set, cc);
    const auto dir = c.out_dir();
    save_container(dir / "classifier.json", model_container(r.model, "classifier", {{"classes", r.classes.size()},
                                                                                    {"labels", r.classes}}));
    write_json(dir / "classify.json", {{"test_accuracy", r.test_accuracy},
                                       {"train_items", r.split.train.size()},
                                       {"test_items", r.split.test.size()},
                                       {"classes", r.classes.size()},
                                       {"shuffled_labels", cc.shuffle_labels}});
    c.log << "test accuracy " << format_real(r.test_accuracy) << "\n";
}

}  // namespace detail

// Runs the tool with argv-style arguments (args[0] is the program name).
// Exit codes: 0 success, 1 validation or usage error, 2 I/O error.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    Options o;
    CLI::App app{"rfembed: synthetic RF protocols, features, embeddings and verification", "rfembed"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--seed", o.seed, "master seed");
    app.add_option("--config", o.config, "JSON config file");
    app.add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", o.out, "output directory");
    app.add_option("--tdl", o.tdl, "TDL tap table (defaults to the shipped data file)");

    auto manifest_opt = [&](CLI::App* s) { s->add_option("--manifest", o.manifest, "dataset directory or manifest file"); };
    auto repr_opts = [&](CLI::App* s) {
        s->add_option("--repr", o.repr, "features, scf, scf-pca or embeddings");
        s->add_option("--model", o.model, "trained embedding model");
        s->add_option("--pca", o.pca, "PCA model for scf-pca");
    };
    auto impair_opts = [&](CLI::App* s) {
        s->add_option("--snr", o.snr, "in-band SNR in dB: value, lo:hi, or none");
        s->add_option("--cfo-sigma", o.cfo_sigma, "normalized CFO standard deviation");
        s->add_option("--channels", o.channels, "comma list of none, TDL-A .. TDL-E");
    };
    auto sizes = [&](CLI::App* s) {
        s->add_option("--protocols", o.protocols, "number of protocols");
        s->add_option("--samples", o.samples, "samples per instance");
        s->add_option("--sample-rate", o.sample_rate, "sample rate in Hz");
    };

    auto* gen = app.add_subcommand("generate", "build a synthetic dataset");
    sizes(gen);
    gen->add_option("--instances", o.instances, "instances per protocol");
    gen->add_flag("--clean", o.clean, "no impairments (for later sweeps)");
    impair_opts(gen);

    auto* imp = app.add_subcommand("impair", "re-impair an existing dataset");
    manifest_opt(imp);
    impair_opts(imp);

    auto* feat = app.add_subcommand("features", "26 statistical features per instance");
    manifest_opt(feat);

    auto* scf = app.add_subcommand("scf", "SCF per instance, optional PCA fit or projection");
    manifest_opt(scf);
    scf->add_option("--pca-k", o.pca_k, "fit a PCA with this many components");
    scf->add_option("--pca", o.pca, "project with an existing PCA model");

    auto* train = app.add_subcommand("train", "train the embedder on synthetic protocols");
    sizes(train);
    impair_opts(train);
    train->add_option("--instances", o.train_instances, "instances per class and epoch");
    train->add_option("--epochs", o.epochs, "epochs");
    train->add_option("--lr", o.lr, "initial learning rate");
    train->add_option("--batch", o.batch, "batch size");
    train->add_option("--head", o.head, "softmax, norm_softmax or arcface");

    auto* emb = app.add_subcommand("embed", "embeddings for every instance");
    manifest_opt(emb);
    emb->add_option("--model", o.model, "trained embedding model")->required();

    auto* ver = app.add_subcommand("verify", "pairwise verification report");
    manifest_opt(ver);
    repr_opts(ver);
    ver->add_option("--table", o.table, "precomputed representation table");
    ver->add_option("--metric", o.metric, "cosine or euclidean");
    ver->add_option("--fpr", o.fpr, "comma list of FPR targets");

    auto* sw = app.add_subcommand("sweep", "verification across an impairment grid");
    manifest_opt(sw);
    repr_opts(sw);
    sw->add_option("--axis", o.axis, "snr, sigma_rfo or channel");
    sw->add_option("--grid", o.grid, "comma list of grid values");
    sw->add_option("--metric", o.metric, "cosine or euclidean");
    sw->add_option("--fpr", o.fpr, "comma list of FPR targets");

    auto* cls = app.add_subcommand("classify", "downstream classifier on representations");
    manifest_opt(cls);
    repr_opts(cls);
    cls->add_option("--table", o.table, "precomputed representation table");
    cls->add_flag("--shuffle-labels", o.shuffle_labels, "permutation null");
    cls->add_option("--train-fraction", o.train_fraction, "training share (default 0.54)");
    cls->add_option("--epochs", o.epochs, "epochs");
    cls->add_option("--lr", o.lr, "initial learning rate");

    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kExitValidation;
    }

    try {
        detail::Context c(o, out);
        const auto* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        if (name == "generate") {
            detail::cmd_generate(c);
        } else if (name == "impair") {
            detail::cmd_impair(c);
        } else if (name == "features") {
            detail::cmd_features(c);
        } else if (name == "scf") {
            detail::cmd_scf(c);
        } else if (name == "train") {
            detail::cmd_train(c);
        } else if (name == "embed") {
            detail::cmd_embed(c);
        } else if (name == "verify") {
            detail::cmd_verify(c);
        } else if (name == "sweep") {
            detail::cmd_sweep(c);
        } else if (name == "classify") {
            detail::cmd_classify(c);
        }
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace rfembed::cli

#endif
