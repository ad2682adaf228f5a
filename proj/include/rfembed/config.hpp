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

#ifndef RFEMBED_CONFIG_HPP
#define RFEMBED_CONFIG_HPP

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rfembed/embednet.hpp"
#include "rfembed/error.hpp"
#include "rfembed/evalverify.hpp"
#include "rfembed/instance.hpp"
#include "rfembed/protogen.hpp"

namespace rfembed {

using json = nlohmann::json;

// Dataset-generation settings shared by the generate subcommand and training.
struct DatasetConfig {
    int protocols = 10;
    int instances = 5;
    std::size_t n_samples = 16384;
    double sample_rate = 20e6;
    bool operator==(const DatasetConfig&) const = default;
};

// Everything a config file can set. Each section is optional; missing keys
// keep their defaults and unknown keys are rejected so typos surface.
struct RunConfig {
    GeneratorConfig generator;
    AugmentConfig augment;
    DatasetConfig dataset;
    ModelShape model;
    TrainConfig train;
    int train_instances = 50;  // per class and epoch
    VerifyOptions verify;
    ClassifierConfig classifier;
};

inline SchemeFamily parse_scheme_family(const std::string& s) {
    for (auto f : {SchemeFamily::linear, SchemeFamily::mfsk, SchemeFamily::ofdm, SchemeFamily::fdm, SchemeFamily::css,
                   SchemeFamily::dsss}) {
        if (s == to_string(f)) {
            return f;
        }
    }
    throw ConfigError("unknown scheme family '" + s + "'");
}

inline LinearFamily parse_linear_family(const std::string& s) {
    for (auto f : {LinearFamily::ask, LinearFamily::psk, LinearFamily::apsk, LinearFamily::qam}) {
        if (s == to_string(f)) {
            return f;
        }
    }
    throw ConfigError("unknown linear family '" + s + "'");
}

namespace detail {

// Reads typed keys from one JSON object and remembers which were used.
class Section {
public:
    Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object()) {
            throw ConfigError("config section '" + name_ + "' must be an object");
        }
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) {
            return;
        }
        guard(key, [&] { read(j_.at(key), out); });
    }

    template <typename T, typename Parse>
    void get_enum_list(const char* key, std::vector<T>& out, Parse parse) {
        seen_.insert(key);
        if (!j_.contains(key)) {
            return;
        }
        guard(key, [&] {
            out.clear();
            for (const auto& v : j_.at(key)) {
                out.push_back(parse(v.get<std::string>()));
            }
        });
    }

    template <typename T, typename Parse>
    void get_enum(const char* key, T& out, Parse parse) {
        seen_.insert(key);
        if (j_.contains(key)) {
            guard(key, [&] { out = parse(j_.at(key).get<std::string>()); });
        }
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) {
                throw ConfigError("unknown config key " + name_ + "." + key);
            }
        }
    }

private:
    template <typename F>
    void guard(const char* key, F&& f) const {
        try {
            f();
        } catch (const json::exception& e) {
            throw ConfigError("config key " + name_ + "." + key + ": " + e.what());
        }
    }

    template <typename T>
    static void read(const json& v, T& out) {
        out = v.get<T>();
    }
    static void read(const json& v, IntRange& out) {
        out = v.is_array() ? IntRange{v.at(0).get<int>(), v.at(1).get<int>()}
                           : IntRange{v.at("min").get<int>(), v.at("max").get<int>()};
    }
    static void read(const json& v, RealRange& out) {
        out = v.is_array() ? RealRange{v.at(0).get<double>(), v.at(1).get<double>()}
                           : RealRange{v.at("min").get<double>(), v.at("max").get<double>()};
    }

    const json& j_;
    std::string name_;
    std::set<std::string> seen_;
};

inline void read_generator(const json& j, GeneratorConfig& c) {
    Section s(j, "generator");
    s.get_enum_list("families", c.families, parse_scheme_family);
    s.get_enum_list("linear_families", c.linear_families, parse_linear_family);
    s.get("ask_orders", c.ask_orders);
    s.get("psk_orders", c.psk_orders);
    s.get("apsk_orders", c.apsk_orders);
    s.get("qam_orders", c.qam_orders);
    s.get("mfsk_orders", c.mfsk_orders);
    s.get("mfsk_modulation_indices", c.mfsk_modulation_indices);
    s.get("ofdm_carriers", c.ofdm_carriers);
    s.get("ofdm_cp_fractions", c.ofdm_cp_fractions);
    s.get("carrier_psk_orders", c.carrier_psk_orders);
    s.get("carrier_qam_orders", c.carrier_qam_orders);
    s.get("fdm_subchannels", c.fdm_subchannels);
    s.get("fdm_guard", c.fdm_guard);
    s.get("css_spreading_factors", c.css_spreading_factors);
    s.get("css_oversampling", c.css_oversampling);
    s.get("barker_lengths", c.barker_lengths);
    s.get("pn_degrees", c.pn_degrees);
    s.get("samples_per_symbol", c.samples_per_symbol);
    s.get("samples_per_chip", c.samples_per_chip);
    s.get("rolloff", c.rolloff);
    s.get("burst_probability", c.burst_probability);
    s.get("sync_lengths", c.sync_lengths);
    s.get("pattern_lengths", c.pattern_lengths);
    s.get("header_bits", c.header_bits);
    s.get("header_fixed_probability", c.header_fixed_probability);
    s.get("continuous_payload_bits", c.continuous_payload_bits);
    s.get("burst_payload_min_bits", c.burst_payload_min_bits);
    s.get("burst_payload_span", c.burst_payload_span);
    s.get("mid_sync_probability", c.mid_sync_probability);
    s.get("end_sync_probability", c.end_sync_probability);
    s.get("pause_frames", c.pause_frames);
    s.get("bandwidth_fraction", c.bandwidth_fraction);
    s.get("max_generation_bandwidth", c.max_generation_bandwidth);
    s.finish();
    validate(c);
}

inline void read_augment(const json& j, AugmentConfig& a) {
    Section s(j, "augment");
    s.get("snr_db", a.snr_db);
    s.get("noise", a.noise);
    s.get("cfo_sigma", a.cfo_sigma);
    s.get("random_phase", a.random_phase);
    s.get_enum_list("channels", a.channels, parse_channel_model);
    s.get("delay_spread", a.delay_spread);
    s.finish();
    validate(a);
}

inline void read_dataset(const json& j, DatasetConfig& d) {
    Section s(j, "dataset");
    s.get("protocols", d.protocols);
    s.get("instances", d.instances);
    s.get("n_samples", d.n_samples);
    s.get("sample_rate", d.sample_rate);
    s.finish();
    if (d.protocols < 1 || d.instances < 1 || d.n_samples < 1 || !(d.sample_rate > 0.0)) {
        throw ConfigError("dataset sizes and sample_rate must be positive");
    }
}

inline void read_model(const json& j, ModelShape& m) {
    Section s(j, "model");
    s.get("hidden", m.hidden);
    s.get("embedding_dim", m.embedding_dim);
    s.get_enum("head", m.head, parse_head_kind);
    s.get("scale", m.scale);
    s.get("margin", m.margin);
    s.finish();
}

inline void read_train(const json& j, TrainConfig& t, int& instances) {
    Section s(j, "train");
    s.get("epochs", t.epochs);
    s.get("batch", t.batch);
    s.get("lr", t.lr);
    s.get("momentum", t.momentum);
    s.get("weight_decay", t.weight_decay);
    s.get("lr_drops", t.lr_drops);
    s.get("standardize_inputs", t.standardize_inputs);
    s.get("instances_per_class", instances);
    s.finish();
    validate(t);
    if (instances < 1) {
        throw ConfigError("train.instances_per_class must be >= 1");
    }
}

inline void read_verify(const json& j, VerifyOptions& v) {
    Section s(j, "verify");
    s.get_enum("metric", v.metric, parse_metric);
    s.get("fprs", v.fprs);
    s.get("exact_limit", v.exact_limit);
    s.finish();
}

inline void read_classifier(const json& j, ClassifierConfig& c) {
    Section s(j, "classifier");
    s.get("train_fraction", c.train_fraction);
    s.get("hidden", c.hidden);
    s.get("epochs", c.train.epochs);
    s.get("batch", c.train.batch);
    s.get("lr", c.train.lr);
    s.get("momentum", c.train.momentum);
    s.get("weight_decay", c.train.weight_decay);
    s.get("lr_drops", c.train.lr_drops);
    s.finish();
    validate(c.train);
}

}  // namespace detail

inline RunConfig parse_config(const json& j) {
    if (!j.is_object()) {
        throw ConfigError("config document must be a JSON object");
    }
    RunConfig c;
    static const std::set<std::string> sections{"generator", "augment",    "dataset", "model",
                                                "train",     "verify", "classifier"};
    for (const auto& [key, value] : j.items()) {
        if (!sections.count(key)) {
            throw ConfigError("unknown config section '" + key + "'");
        }
    }
    if (j.contains("generator")) {
        detail::read_generator(j.at("generator"), c.generator);
    }
    if (j.contains("augment")) {
        detail::read_augment(j.at("augment"), c.augment);
    }
    if (j.contains("dataset")) {
        detail::read_dataset(j.at("dataset"), c.dataset);
    }
    if (j.contains("model")) {
        detail::read_model(j.at("model"), c.model);
    }
    if (j.contains("train")) {
        detail::read_train(j.at("train"), c.train, c.train_instances);
    }
    if (j.contains("verify")) {
        detail::read_verify(j.at("verify"), c.verify);
    }
    if (j.contains("classifier")) {
        detail::read_classifier(j.at("classifier"), c.classifier);
    }
    return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file " + path.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

}  // namespace rfembed

#endif
