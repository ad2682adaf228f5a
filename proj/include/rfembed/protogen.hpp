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

#ifndef RFEMBED_PROTOGEN_HPP
#define RFEMBED_PROTOGEN_HPP

// Synthetic physical-layer protocols: the data model and a seeded sampler
// that draws internally consistent protocol instances.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"
#include "signal.hpp"

namespace rfembed {

using Bits = std::vector<std::uint8_t>;

enum class LinearFamily { ask, psk, apsk, qam };

struct Linear {
    LinearFamily family = LinearFamily::psk;
    int order = 2;
    bool operator==(const Linear&) const = default;
};

struct Mfsk {
    int order = 2;
    double modulation_index = 1.0;
    double tone_spacing = 0.0;  // cycles/sample at the generation rate
    bool operator==(const Mfsk&) const = default;
};

struct Ofdm {
    int carriers = 64;
    int cyclic_prefix = 16;
    LinearFamily carrier_family = LinearFamily::qam;
    int carrier_order = 4;
    bool operator==(const Ofdm&) const = default;
};

enum class SubchannelKind { psk, qam, fsk2 };

struct Fdm {
    int subchannels = 2;
    SubchannelKind kind = SubchannelKind::psk;
    int order = 2;
    double spacing = 0.0;  // cycles/sample at the generation rate
    bool operator==(const Fdm&) const = default;
};

struct Css {
    int spreading_factor = 7;
    double chirp_bandwidth = 0.5;  // cycles/sample at the generation rate
    bool operator==(const Css&) const = default;
};

enum class CodeKind { barker, pn };

struct SpreadingCode {
    CodeKind kind = CodeKind::barker;
    int length = 11;
    std::uint32_t polynomial = 0;  // PN only: generator with x^n and 1 terms set
    bool operator==(const SpreadingCode&) const = default;
};

struct Dsss {
    SpreadingCode code;
    LinearFamily chip_family = LinearFamily::psk;
    int chip_order = 2;
    bool operator==(const Dsss&) const = default;
};

using ModulationScheme = std::variant<Linear, Mfsk, Ofdm, Fdm, Css, Dsss>;

// Index order of the variant alternatives, used for family bookkeeping.
enum class SchemeFamily { linear = 0, mfsk, ofdm, fdm, css, dsss };

inline SchemeFamily family_of(const ModulationScheme& m) {
    return static_cast<SchemeFamily>(m.index());
}

inline std::string to_string(SchemeFamily f) {
    switch (f) {
        case SchemeFamily::linear: return "linear";
        case SchemeFamily::mfsk: return "mfsk";
        case SchemeFamily::ofdm: return "ofdm";
        case SchemeFamily::fdm: return "fdm";
        case SchemeFamily::css: return "css";
        case SchemeFamily::dsss: return "dsss";
    }
    return "?";
}

inline std::string to_string(LinearFamily f) {
    switch (f) {
        case LinearFamily::ask: return "ask";
        case LinearFamily::psk: return "psk";
        case LinearFamily::apsk: return "apsk";
        case LinearFamily::qam: return "qam";
    }
    return "?";
}

// --- synchronization ---------------------------------------------------------

struct AllZero {
    bool operator==(const AllZero&) const = default;
};
struct AllOne {
    bool operator==(const AllOne&) const = default;
};
struct AlternatingZeroOne {
    bool operator==(const AlternatingZeroOne&) const = default;
};
struct RepeatedPattern {
    Bits pattern;
    int repetitions = 1;
    bool operator==(const RepeatedPattern&) const = default;
};
// OFDM only. One OFDM symbol carries the sequence on the active carriers.
struct ZadoffChu {
    int root = 1;
    int length = 1;
    bool operator==(const ZadoffChu&) const = default;
};
// OFDM only. Mask over the active carriers; inactive ones send zero during sync.
struct PartialCarriers {
    Bits mask;
    bool operator==(const PartialCarriers&) const = default;
};

using SyncKind =
    std::variant<AllZero, AllOne, AlternatingZeroOne, RepeatedPattern, ZadoffChu, PartialCarriers>;

struct SyncSpec {
    SyncKind kind;
    int length_bits = 16;
    bool operator==(const SyncSpec&) const = default;
};

enum class Mode { continuous, burst };

struct FrameSpec {
    SyncSpec sync;
    int header_bits = 16;
    std::vector<int> fixed_positions;  // sorted, < header_bits
    Bits fixed_values;                 // parallel to fixed_positions
    int payload_min = 128;             // equal to payload_max in continuous mode
    int payload_max = 128;
    std::optional<SyncSpec> mid_sync;  // burst mode only, centre of the payload
    std::optional<SyncSpec> end_sync;  // burst mode only, after the payload
    int pause_min = 0;                 // burst mode only, samples at generation rate
    int pause_max = 0;
    bool operator==(const FrameSpec&) const = default;
};

struct ProtocolSpec {
    int id = 0;
    ModulationScheme modulation;
    Mode mode = Mode::continuous;
    FrameSpec frame;
    // Generation oversampling: samples per symbol (linear, MFSK, FDM), per chip
    // (DSSS, CSS) or per OFDM symbol including the cyclic prefix.
    int samples_per_symbol = 4;
    double bandwidth_fraction = 0.25;
    std::optional<double> rolloff;  // root-raised-cosine; linear, DSSS and FDM
    std::uint64_t seed = 0;
    bool operator==(const ProtocolSpec&) const = default;
};

// --- configuration -----------------------------------------------------------

struct IntRange {
    int min = 0;
    int max = 0;
    bool operator==(const IntRange&) const = default;
};

struct RealRange {
    double min = 0.0;
    double max = 0.0;
    bool operator==(const RealRange&) const = default;
};

struct GeneratorConfig {
    std::vector<SchemeFamily> families{SchemeFamily::linear, SchemeFamily::mfsk, SchemeFamily::ofdm,
                                       SchemeFamily::fdm,    SchemeFamily::css,  SchemeFamily::dsss};
    std::vector<LinearFamily> linear_families{LinearFamily::ask, LinearFamily::psk, LinearFamily::apsk,
                                              LinearFamily::qam};
    std::vector<int> ask_orders{2, 4, 8};
    std::vector<int> psk_orders{2, 4, 8, 16};
    std::vector<int> apsk_orders{16, 32};
    std::vector<int> qam_orders{4, 16, 64, 256};
    std::vector<int> mfsk_orders{2, 4, 8, 16};
    std::vector<double> mfsk_modulation_indices{0.5, 1.0};
    std::vector<int> ofdm_carriers{16, 32, 64, 128, 256};
    std::vector<double> ofdm_cp_fractions{0.0625, 0.125, 0.25};
    // Orders for OFDM carriers, FDM subchannels and DSSS chips.
    std::vector<int> carrier_psk_orders{2, 4, 8};
    std::vector<int> carrier_qam_orders{4, 16, 64};
    IntRange fdm_subchannels{2, 8};
    RealRange fdm_guard{1.1, 1.5};
    std::vector<int> css_spreading_factors{5, 6, 7, 8, 9};
    std::vector<int> css_oversampling{2, 4};
    std::vector<int> barker_lengths{7, 11, 13};
    std::vector<int> pn_degrees{3, 4, 5, 6};
    std::vector<int> samples_per_symbol{4, 8};
    std::vector<int> samples_per_chip{2, 4};
    RealRange rolloff{0.1, 0.9};
    double burst_probability = 0.5;
    std::vector<int> sync_lengths{8, 16, 32, 64};
    std::vector<int> pattern_lengths{4, 8, 16};
    IntRange header_bits{8, 64};
    double header_fixed_probability = 0.5;
    IntRange continuous_payload_bits{64, 512};
    IntRange burst_payload_min_bits{32, 256};
    double burst_payload_span = 2.0;  // payload_max drawn in [min, span * min]
    double mid_sync_probability = 0.5;
    double end_sync_probability = 0.5;
    RealRange pause_frames{0.25, 4.0};  // pause as a multiple of the nominal frame duration
    RealRange bandwidth_fraction{0.05, 0.95};
    double max_generation_bandwidth = 0.8;
};

// Primitive generator polynomials accepted for PN spreading codes, keyed by
// degree. Bit i is the coefficient of x^i.
inline const std::vector<std::uint32_t>& primitive_polynomials(int degree) {
    static const std::vector<std::vector<std::uint32_t>> table{
        {},
        {},
        {0b111},
        {0b1011, 0b1101},
        {0b10011, 0b11001},
        {0b100101, 0b101001, 0b101111, 0b110111, 0b111011, 0b111101},
        {0b1000011, 0b1100001, 0b1100111, 0b1101101, 0b1110011, 0b1011011},
        {0b10000011, 0b10001001, 0b10001111, 0b10010001},
    };
    static const std::vector<std::uint32_t> none;
    if (degree < 0 || degree >= static_cast<int>(table.size())) {
        return none;
    }
    return table[static_cast<std::size_t>(degree)];
}

inline bool is_power_of_two(int v) { return v > 0 && std::has_single_bit(static_cast<unsigned>(v)); }

inline int bits_per_symbol(int order) { return std::countr_zero(static_cast<unsigned>(order)); }

namespace detail {

inline void check_orders(const std::vector<int>& orders, const char* key) {
    if (orders.empty()) {
        throw ConfigError(std::string("empty order set: ") + key);
    }
    for (int o : orders) {
        if (!is_power_of_two(o) || o < 2 || o > 256) {
            throw ConfigError(std::string("order must be a power of two in [2, 256]: ") + key);
        }
    }
}

template <typename T>
void check_nonempty(const std::vector<T>& v, const char* key) {
    if (v.empty()) {
        throw ConfigError(std::string("empty set: ") + key);
    }
}

template <typename R>
void check_range(const R& r, const char* key) {
    if (!(r.min <= r.max)) {
        throw ConfigError(std::string("range min exceeds max: ") + key);
    }
}

inline void check_probability(double p, const char* key) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ConfigError(std::string("probability outside [0, 1]: ") + key);
    }
}

}  // namespace detail

inline void validate(const GeneratorConfig& c) {
    using namespace detail;
    check_nonempty(c.families, "families");
    check_nonempty(c.linear_families, "linear_families");
    for (auto f : c.linear_families) {
        switch (f) {
            case LinearFamily::ask: check_orders(c.ask_orders, "ask_orders"); break;
            case LinearFamily::psk: check_orders(c.psk_orders, "psk_orders"); break;
            case LinearFamily::qam: check_orders(c.qam_orders, "qam_orders"); break;
            case LinearFamily::apsk:
                check_orders(c.apsk_orders, "apsk_orders");
                for (int o : c.apsk_orders) {
                    if (o != 16 && o != 32) {
                        throw ConfigError("apsk_orders supports 16 and 32 only");
                    }
                }
                break;
        }
    }
    check_orders(c.mfsk_orders, "mfsk_orders");
    check_nonempty(c.mfsk_modulation_indices, "mfsk_modulation_indices");
    for (double h : c.mfsk_modulation_indices) {
        if (!(h > 0.0 && h <= 2.0)) {
            throw ConfigError("mfsk_modulation_indices must lie in (0, 2]");
        }
    }
    check_nonempty(c.ofdm_carriers, "ofdm_carriers");
    for (int n : c.ofdm_carriers) {
        if (!is_power_of_two(n) || n < 8 || n > 4096) {
            throw ConfigError("ofdm_carriers must be powers of two in [8, 4096]");
        }
    }
    check_nonempty(c.ofdm_cp_fractions, "ofdm_cp_fractions");
    for (double f : c.ofdm_cp_fractions) {
        if (!(f > 0.0 && f < 1.0)) {
            throw ConfigError("ofdm_cp_fractions must lie in (0, 1)");
        }
    }
    check_orders(c.carrier_psk_orders, "carrier_psk_orders");
    check_orders(c.carrier_qam_orders, "carrier_qam_orders");
    check_range(c.fdm_subchannels, "fdm_subchannels");
    if (c.fdm_subchannels.min < 2) {
        throw ConfigError("fdm_subchannels must be at least 2");
    }
    check_range(c.fdm_guard, "fdm_guard");
    if (c.fdm_guard.min < 1.0) {
        throw ConfigError("fdm_guard must be at least 1");
    }
    check_nonempty(c.css_spreading_factors, "css_spreading_factors");
    for (int sf : c.css_spreading_factors) {
        if (sf < 2 || sf > 12) {
            throw ConfigError("css_spreading_factors must lie in [2, 12]");
        }
    }
    check_nonempty(c.css_oversampling, "css_oversampling");
    for (int os : c.css_oversampling) {
        if (os < 2) {
            throw ConfigError("css_oversampling must be at least 2");
        }
    }
    if (c.barker_lengths.empty() && c.pn_degrees.empty()) {
        throw ConfigError("no spreading codes enabled");
    }
    for (int l : c.barker_lengths) {
        if (l != 7 && l != 11 && l != 13) {
            throw ConfigError("barker_lengths supports 7, 11 and 13");
        }
    }
    for (int d : c.pn_degrees) {
        if (primitive_polynomials(d).empty() || d < 3) {
            throw ConfigError("pn_degrees must lie in [3, 7]");
        }
    }
    check_nonempty(c.samples_per_symbol, "samples_per_symbol");
    check_nonempty(c.samples_per_chip, "samples_per_chip");
    for (int s : c.samples_per_symbol) {
        if (s < 2) {
            throw ConfigError("samples_per_symbol must be at least 2");
        }
    }
    for (int s : c.samples_per_chip) {
        if (s < 2) {
            throw ConfigError("samples_per_chip must be at least 2");
        }
    }
    check_range(c.rolloff, "rolloff");
    if (c.rolloff.min < 0.1 || c.rolloff.max > 0.9) {
        throw ConfigError("rolloff must lie in [0.1, 0.9]");
    }
    check_probability(c.burst_probability, "burst_probability");
    check_probability(c.header_fixed_probability, "header_fixed_probability");
    check_probability(c.mid_sync_probability, "mid_sync_probability");
    check_probability(c.end_sync_probability, "end_sync_probability");
    check_nonempty(c.sync_lengths, "sync_lengths");
    check_nonempty(c.pattern_lengths, "pattern_lengths");
    for (int l : c.sync_lengths) {
        if (l < 1) {
            throw ConfigError("sync_lengths must be positive");
        }
    }
    for (int l : c.pattern_lengths) {
        if (l < 1) {
            throw ConfigError("pattern_lengths must be positive");
        }
    }
    check_range(c.header_bits, "header_bits");
    if (c.header_bits.min < 1) {
        throw ConfigError("header_bits must be positive");
    }
    check_range(c.continuous_payload_bits, "continuous_payload_bits");
    check_range(c.burst_payload_min_bits, "burst_payload_min_bits");
    if (c.continuous_payload_bits.min < 1 || c.burst_payload_min_bits.min < 1) {
        throw ConfigError("payload lengths must be positive");
    }
    if (!(c.burst_payload_span >= 1.0)) {
        throw ConfigError("burst_payload_span must be at least 1");
    }
    check_range(c.pause_frames, "pause_frames");
    if (!(c.pause_frames.min > 0.0)) {
        throw ConfigError("pause_frames must be positive");
    }
    check_range(c.bandwidth_fraction, "bandwidth_fraction");
    if (!(c.bandwidth_fraction.min > 0.0 && c.bandwidth_fraction.max <= 1.0)) {
        throw ConfigError("bandwidth_fraction must lie in (0, 1]");
    }
    if (!(c.max_generation_bandwidth > 0.05 && c.max_generation_bandwidth < 1.0)) {
        throw ConfigError("max_generation_bandwidth must lie in (0.05, 1)");
    }
}

// --- derived protocol quantities ----------------------------------------------

// Active OFDM carriers: +-1..+-half around DC, DC and band edges left empty.
// Carriers +-1..+-h are active; DC and the band edges stay empty. Small FFT
// sizes keep the occupied band, (2h + 1) / carriers, at or below 0.8.
inline int ofdm_half_active(int carriers) {
    const int h = static_cast<int>(std::floor(0.375 * carriers));
    return std::max(1, std::min(h, static_cast<int>(std::floor((0.8 * carriers - 1.0) / 2.0))));
}
inline int ofdm_active_carriers(int carriers) { return 2 * ofdm_half_active(carriers); }

// Symbol-domain width of one FDM subchannel, times samples per symbol.
inline double fdm_subchannel_width_symbols(SubchannelKind kind, double rolloff) {
    return kind == SubchannelKind::fsk2 ? 3.0 : 1.0 + rolloff;
}

inline int mfsk_samples_per_symbol(int order, double h, int base_sps, double max_bandwidth) {
    int sps = base_sps;
    while (((order - 1) * h + 2.0) / sps > max_bandwidth) {
        sps *= 2;
    }
    return sps;
}

// Occupied bandwidth in cycles/sample at the generation rate.
inline double generation_bandwidth(const ProtocolSpec& spec) {
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            const double sps = spec.samples_per_symbol;
            if constexpr (std::is_same_v<T, Linear> || std::is_same_v<T, Dsss>) {
                return (1.0 + spec.rolloff.value_or(0.0)) / sps;
            } else if constexpr (std::is_same_v<T, Mfsk>) {
                return (m.order - 1) * m.tone_spacing + 2.0 / sps;
            } else if constexpr (std::is_same_v<T, Ofdm>) {
                return (ofdm_active_carriers(m.carriers) + 1.0) / m.carriers;
            } else if constexpr (std::is_same_v<T, Fdm>) {
                const double w = fdm_subchannel_width_symbols(m.kind, spec.rolloff.value_or(0.0)) / sps;
                return (m.subchannels - 1) * m.spacing + w;
            } else {
                return m.chirp_bandwidth;
            }
        },
        spec.modulation);
}

// Samples at the generation rate occupied by one modulation symbol.
inline int generation_symbol_length(const ProtocolSpec& spec) {
    return std::visit(
        [&](const auto& m) -> int {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Ofdm>) {
                return m.carriers + m.cyclic_prefix;
            } else if constexpr (std::is_same_v<T, Css>) {
                return (1 << m.spreading_factor) * spec.samples_per_symbol;
            } else if constexpr (std::is_same_v<T, Dsss>) {
                return m.code.length * spec.samples_per_symbol;
            } else {
                return spec.samples_per_symbol;
            }
        },
        spec.modulation);
}

// Bits carried by one modulation symbol (per subchannel for FDM).
inline int symbol_bits(const ProtocolSpec& spec) {
    return std::visit(
        [&](const auto& m) -> int {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Linear>) {
                return bits_per_symbol(m.order);
            } else if constexpr (std::is_same_v<T, Mfsk>) {
                return bits_per_symbol(m.order);
            } else if constexpr (std::is_same_v<T, Ofdm>) {
                return bits_per_symbol(m.carrier_order) * ofdm_active_carriers(m.carriers);
            } else if constexpr (std::is_same_v<T, Fdm>) {
                return (m.kind == SubchannelKind::fsk2 ? 1 : bits_per_symbol(m.order)) * m.subchannels;
            } else if constexpr (std::is_same_v<T, Css>) {
                return m.spreading_factor;
            } else {
                return bits_per_symbol(m.chip_order);
            }
        },
        spec.modulation);
}

inline int nominal_frame_bits(const FrameSpec& f) {
    int bits = f.sync.length_bits + f.header_bits + (f.payload_min + f.payload_max) / 2;
    if (f.mid_sync) {
        bits += f.mid_sync->length_bits;
    }
    if (f.end_sync) {
        bits += f.end_sync->length_bits;
    }
    return bits;
}

// --- sampling -------------------------------------------------------------------

namespace detail {

inline SyncSpec sample_sync(Rng& rng, const GeneratorConfig& c, bool ofdm, int active_carriers) {
    SyncSpec s;
    s.length_bits = pick(rng, c.sync_lengths);
    const int kinds = ofdm ? 6 : 4;
    switch (uniform_int(rng, 0, kinds - 1)) {
        case 0: s.kind = AllZero{}; break;
        case 1: s.kind = AllOne{}; break;
        case 2: s.kind = AlternatingZeroOne{}; break;
        case 3: {
            std::vector<int> fitting;
            for (int l : c.pattern_lengths) {
                if (l <= s.length_bits) {
                    fitting.push_back(l);
                }
            }
            const int base = fitting.empty() ? s.length_bits : pick(rng, fitting);
            RepeatedPattern p;
            p.pattern.resize(static_cast<std::size_t>(base));
            for (auto& b : p.pattern) {
                b = static_cast<std::uint8_t>(uniform_int(rng, 0, 1));
            }
            p.repetitions = s.length_bits / base;
            s.length_bits = base * p.repetitions;
            s.kind = p;
            break;
        }
        case 4: {
            ZadoffChu z;
            z.length = active_carriers;
            std::vector<int> roots;
            for (int r = 1; r < z.length; ++r) {
                if (std::gcd(r, z.length) == 1) {
                    roots.push_back(r);
                }
            }
            z.root = roots.empty() ? 1 : pick(rng, roots);
            s.kind = z;
            break;
        }
        default: {
            PartialCarriers p;
            p.mask.resize(static_cast<std::size_t>(active_carriers));
            for (auto& b : p.mask) {
                b = static_cast<std::uint8_t>(uniform_int(rng, 0, 1));
            }
            if (std::find(p.mask.begin(), p.mask.end(), 1) == p.mask.end()) {
                p.mask[static_cast<std::size_t>(uniform_int(rng, 0, active_carriers - 1))] = 1;
            }
            s.kind = p;
            break;
        }
    }
    return s;
}

inline std::pair<LinearFamily, int> sample_carrier_modulation(Rng& rng, const GeneratorConfig& c) {
    if (uniform_int(rng, 0, 1) == 0) {
        return {LinearFamily::psk, pick(rng, c.carrier_psk_orders)};
    }
    return {LinearFamily::qam, pick(rng, c.carrier_qam_orders)};
}

inline const std::vector<int>& linear_orders(const GeneratorConfig& c, LinearFamily f) {
    switch (f) {
        case LinearFamily::ask: return c.ask_orders;
        case LinearFamily::psk: return c.psk_orders;
        case LinearFamily::apsk: return c.apsk_orders;
        case LinearFamily::qam: return c.qam_orders;
    }
    return c.psk_orders;
}

}  // namespace detail

// Draws protocol `protocol_id` of the family seeded by `master_seed`. The
// draw order is modulation scheme, transmission mode, frame structure, rates.
inline ProtocolSpec sample_protocol(std::uint64_t master_seed, int protocol_id, const GeneratorConfig& config) {
    validate(config);
    ProtocolSpec spec;
    spec.id = protocol_id;
    spec.seed = derive_seed(master_seed, static_cast<std::uint64_t>(protocol_id));
    Rng rng = make_rng(spec.seed, Stream::protocol);

    // Modulation scheme.
    const SchemeFamily family = pick(rng, config.families);
    switch (family) {
        case SchemeFamily::linear: {
            Linear m;
            m.family = pick(rng, config.linear_families);
            m.order = pick(rng, detail::linear_orders(config, m.family));
            spec.modulation = m;
            break;
        }
        case SchemeFamily::mfsk: {
            Mfsk m;
            m.order = pick(rng, config.mfsk_orders);
            m.modulation_index = pick(rng, config.mfsk_modulation_indices);
            spec.modulation = m;
            break;
        }
        case SchemeFamily::ofdm: {
            Ofdm m;
            m.carriers = pick(rng, config.ofdm_carriers);
            const double cp = pick(rng, config.ofdm_cp_fractions);
            m.cyclic_prefix = std::clamp(static_cast<int>(std::lround(cp * m.carriers)), 1, m.carriers - 1);
            std::tie(m.carrier_family, m.carrier_order) = detail::sample_carrier_modulation(rng, config);
            spec.modulation = m;
            break;
        }
        case SchemeFamily::fdm: {
            Fdm m;
            m.subchannels = uniform_int(rng, config.fdm_subchannels.min, config.fdm_subchannels.max);
            switch (uniform_int(rng, 0, 2)) {
                case 0: m.kind = SubchannelKind::psk; m.order = pick(rng, config.carrier_psk_orders); break;
                case 1: m.kind = SubchannelKind::qam; m.order = pick(rng, config.carrier_qam_orders); break;
                default: m.kind = SubchannelKind::fsk2; m.order = 2; break;
            }
            spec.modulation = m;
            break;
        }
        case SchemeFamily::css: {
            Css m;
            m.spreading_factor = pick(rng, config.css_spreading_factors);
            spec.modulation = m;
            break;
        }
        case SchemeFamily::dsss: {
            Dsss m;
            const bool barker =
                config.pn_degrees.empty() || (!config.barker_lengths.empty() && uniform_int(rng, 0, 1) == 0);
            if (barker) {
                m.code.kind = CodeKind::barker;
                m.code.length = pick(rng, config.barker_lengths);
            } else {
                const int degree = pick(rng, config.pn_degrees);
                m.code.kind = CodeKind::pn;
                m.code.length = (1 << degree) - 1;
                m.code.polynomial = pick(rng, primitive_polynomials(degree));
            }
            std::tie(m.chip_family, m.chip_order) = detail::sample_carrier_modulation(rng, config);
            spec.modulation = m;
            break;
        }
    }

    // Transmission mode.
    spec.mode = uniform(rng, 0.0, 1.0) < config.burst_probability ? Mode::burst : Mode::continuous;
    const bool burst = spec.mode == Mode::burst;

    // Frame structure.
    const auto* ofdm = std::get_if<Ofdm>(&spec.modulation);
    const int active = ofdm ? ofdm_active_carriers(ofdm->carriers) : 0;
    FrameSpec& f = spec.frame;
    f.sync = detail::sample_sync(rng, config, ofdm != nullptr, active);
    f.header_bits = uniform_int(rng, config.header_bits.min, config.header_bits.max);
    for (int i = 0; i < f.header_bits; ++i) {
        if (uniform(rng, 0.0, 1.0) < config.header_fixed_probability) {
            f.fixed_positions.push_back(i);
            f.fixed_values.push_back(static_cast<std::uint8_t>(uniform_int(rng, 0, 1)));
        }
    }
    if (burst) {
        f.payload_min = uniform_int(rng, config.burst_payload_min_bits.min, config.burst_payload_min_bits.max);
        const int hi = static_cast<int>(std::floor(config.burst_payload_span * f.payload_min));
        f.payload_max = uniform_int(rng, f.payload_min, std::max(f.payload_min, hi));
        if (uniform(rng, 0.0, 1.0) < config.mid_sync_probability) {
            f.mid_sync = detail::sample_sync(rng, config, ofdm != nullptr, active);
        }
        if (uniform(rng, 0.0, 1.0) < config.end_sync_probability) {
            f.end_sync = detail::sample_sync(rng, config, ofdm != nullptr, active);
        }
    } else {
        f.payload_min = uniform_int(rng, config.continuous_payload_bits.min, config.continuous_payload_bits.max);
        f.payload_max = f.payload_min;
    }

    // Rates and pulse shaping.
    std::visit(
        [&](auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Linear>) {
                int sps = pick(rng, config.samples_per_symbol);
                spec.rolloff = uniform(rng, config.rolloff.min, config.rolloff.max);
                while ((1.0 + *spec.rolloff) / sps > config.max_generation_bandwidth) {
                    sps *= 2;
                }
                spec.samples_per_symbol = sps;
            } else if constexpr (std::is_same_v<T, Dsss>) {
                int spc = pick(rng, config.samples_per_chip);
                spec.rolloff = uniform(rng, config.rolloff.min, config.rolloff.max);
                while ((1.0 + *spec.rolloff) / spc > config.max_generation_bandwidth) {
                    spc *= 2;
                }
                spec.samples_per_symbol = spc;
            } else if constexpr (std::is_same_v<T, Mfsk>) {
                spec.samples_per_symbol = mfsk_samples_per_symbol(
                    m.order, m.modulation_index, pick(rng, config.samples_per_symbol), config.max_generation_bandwidth);
                m.tone_spacing = m.modulation_index / spec.samples_per_symbol;
            } else if constexpr (std::is_same_v<T, Fdm>) {
                const double roll = uniform(rng, config.rolloff.min, config.rolloff.max);
                const double guard = uniform(rng, config.fdm_guard.min, config.fdm_guard.max);
                const double width = fdm_subchannel_width_symbols(m.kind, roll);
                // (K-1) * guard * width / sps + width / sps must fit the budget.
                const double need = ((m.subchannels - 1) * guard + 1.0) * width / config.max_generation_bandwidth;
                int sps = pick(rng, config.samples_per_symbol);
                while (sps < need) {
                    sps *= 2;
                }
                spec.samples_per_symbol = sps;
                spec.rolloff = roll;
                m.spacing = guard * width / sps;
            } else if constexpr (std::is_same_v<T, Css>) {
                spec.samples_per_symbol = pick(rng, config.css_oversampling);
                m.chirp_bandwidth = 1.0 / spec.samples_per_symbol;
            } else {
                spec.samples_per_symbol = m.carriers + m.cyclic_prefix;
            }
        },
        spec.modulation);
    spec.bandwidth_fraction = uniform(rng, config.bandwidth_fraction.min, config.bandwidth_fraction.max);

    if (burst) {
        const double symbols = std::ceil(static_cast<double>(nominal_frame_bits(f)) / symbol_bits(spec));
        const double frame_samples = symbols * generation_symbol_length(spec);
        f.pause_min = std::max(1, static_cast<int>(std::lround(config.pause_frames.min * frame_samples)));
        f.pause_max = std::max(f.pause_min, static_cast<int>(std::lround(config.pause_frames.max * frame_samples)));
    }
    return spec;
}

// --- frames -----------------------------------------------------------------------

enum class SegmentKind { sync, header, payload, mid_sync, end_sync };

struct FrameSegment {
    SegmentKind kind;
    std::size_t offset = 0;
    std::size_t length = 0;
};

struct FrameBits {
    Bits bits;
    std::vector<FrameSegment> segments;
};

// Bits of a sync field. Zadoff-Chu fields are rendered by the OFDM modulator
// and carry zero placeholders; partial-carrier fields carry an alternating
// pattern that the modulator places on the masked carriers.
inline Bits sync_bits(const SyncSpec& s) {
    Bits out(static_cast<std::size_t>(s.length_bits), 0);
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, AllOne>) {
                std::fill(out.begin(), out.end(), 1);
            } else if constexpr (std::is_same_v<T, AlternatingZeroOne> || std::is_same_v<T, PartialCarriers>) {
                for (std::size_t i = 0; i < out.size(); ++i) {
                    out[i] = static_cast<std::uint8_t>(i & 1U);
                }
            } else if constexpr (std::is_same_v<T, RepeatedPattern>) {
                for (std::size_t i = 0; i < out.size(); ++i) {
                    out[i] = k.pattern[i % k.pattern.size()];
                }
            }
        },
        s.kind);
    return out;
}

// One frame: sync | header | payload, with the optional burst-mode sync
// fields at the payload centre and at the end.
inline FrameBits frame_bits(const ProtocolSpec& spec, Rng& rng) {
    const FrameSpec& f = spec.frame;
    FrameBits out;
    auto append = [&](SegmentKind kind, const Bits& bits) {
        out.segments.push_back({kind, out.bits.size(), bits.size()});
        out.bits.insert(out.bits.end(), bits.begin(), bits.end());
    };
    std::bernoulli_distribution coin(0.5);

    append(SegmentKind::sync, sync_bits(f.sync));

    Bits header(static_cast<std::size_t>(f.header_bits));
    for (auto& b : header) {
        b = static_cast<std::uint8_t>(coin(rng));
    }
    for (std::size_t i = 0; i < f.fixed_positions.size(); ++i) {
        header[static_cast<std::size_t>(f.fixed_positions[i])] = f.fixed_values[i];
    }
    append(SegmentKind::header, header);

    const int payload_len = spec.mode == Mode::burst ? uniform_int(rng, f.payload_min, f.payload_max) : f.payload_min;
    Bits payload(static_cast<std::size_t>(payload_len));
    for (auto& b : payload) {
        b = static_cast<std::uint8_t>(coin(rng));
    }
    if (spec.mode == Mode::burst && f.mid_sync) {
        const auto half = payload.size() / 2;
        append(SegmentKind::payload, Bits(payload.begin(), payload.begin() + static_cast<std::ptrdiff_t>(half)));
        append(SegmentKind::mid_sync, sync_bits(*f.mid_sync));
        append(SegmentKind::payload, Bits(payload.begin() + static_cast<std::ptrdiff_t>(half), payload.end()));
    } else {
        append(SegmentKind::payload, payload);
    }
    if (spec.mode == Mode::burst && f.end_sync) {
        append(SegmentKind::end_sync, sync_bits(*f.end_sync));
    }
    return out;
}

// Payload length of a generated frame.
inline std::size_t payload_length(const FrameBits& frame) {
    std::size_t n = 0;
    for (const auto& s : frame.segments) {
        if (s.kind == SegmentKind::payload) {
            n += s.length;
        }
    }
    return n;
}

}  // namespace rfembed

#endif
