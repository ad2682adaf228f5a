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

#ifndef RFEMBED_INSTANCE_HPP
#define RFEMBED_INSTANCE_HPP

#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "rfembed/impair.hpp"
#include "rfembed/protogen.hpp"
#include "rfembed/waveform.hpp"

namespace rfembed {

// How impairments are drawn per instance: SNR uniform in dB, Gaussian CFO,
// uniform random phase and one channel picked uniformly from the list.
struct AugmentConfig {
    RealRange snr_db{3.0, 30.0};
    bool noise = true;
    double cfo_sigma = 0.02;
    bool random_phase = true;
    std::vector<ChannelModel> channels{ChannelModel::tdl_a, ChannelModel::tdl_b, ChannelModel::tdl_c,
                                       ChannelModel::tdl_d, ChannelModel::tdl_e};
    double delay_spread = 100e-9;
    bool operator==(const AugmentConfig&) const = default;
};

inline void validate(const AugmentConfig& a) {
    if (a.noise && (!std::isfinite(a.snr_db.min) || !std::isfinite(a.snr_db.max) || a.snr_db.min > a.snr_db.max)) {
        throw ConfigError("snr_db range must be finite with min <= max");
    }
    if (!(a.cfo_sigma >= 0.0) || !std::isfinite(a.cfo_sigma)) {
        throw ConfigError("cfo_sigma must be finite and >= 0");
    }
    if (a.channels.empty()) {
        throw ConfigError("channels must list at least one model (use none for a clean channel)");
    }
    if (!(a.delay_spread > 0.0) || !std::isfinite(a.delay_spread)) {
        throw ConfigError("delay_spread must be > 0");
    }
}

inline ImpairmentConfig draw_impairment(const AugmentConfig& a, Rng& rng) {
    ImpairmentConfig c;
    if (!a.random_phase) {
        c.phase = 0.0;
    }
    c.cfo_sigma = a.cfo_sigma;
    c.channel = pick(rng, a.channels);
    c.delay_spread = a.delay_spread;
    if (a.noise) {
        c.snr_db = a.snr_db.min == a.snr_db.max ? a.snr_db.min : uniform(rng, a.snr_db.min, a.snr_db.max);
    }
    return c;
}

// Tap tables keyed by model, e.g. loaded from a data file.
using TdlTable = std::map<ChannelModel, TdlProfile>;

struct Instance {
    ComplexSignal signal;
    std::optional<double> snr_db;
};

// Synthesis and impairment draw from separate streams of one instance seed,
// so changing the augmentation never changes the clean waveform.
inline Instance generate_instance(const ProtocolSpec& spec, std::size_t n_samples, double sample_rate,
                                  const AugmentConfig& augment, std::uint64_t instance_seed,
                                  const TdlTable* profiles = nullptr) {
    Rng frame_rng = make_rng(instance_seed, Stream::frame);
    const auto clean = synthesize_instance(spec, n_samples, frame_rng, sample_rate);
    Rng imp_rng = make_rng(instance_seed, Stream::impairment);
    const auto cfg = draw_impairment(augment, imp_rng);
    const TdlProfile* profile = nullptr;
    if (profiles && cfg.channel != ChannelModel::none) {
        const auto it = profiles->find(cfg.channel);
        if (it == profiles->end()) {
            throw ConfigError("no tap table loaded for " + to_string(cfg.channel));
        }
        profile = &it->second;
    }
    return {impair(clean, cfg, spec.bandwidth_fraction, imp_rng, profile), cfg.snr_db};
}

}  // namespace rfembed

#endif
