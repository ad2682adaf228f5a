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

#ifndef RFEMBED_DATAIO_HPP
#define RFEMBED_DATAIO_HPP

#include <sodium.h>

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rfembed/config.hpp"
#include "rfembed/embednet.hpp"
#include "rfembed/error.hpp"
#include "rfembed/evalverify.hpp"
#include "rfembed/featcsp.hpp"
#include "rfembed/impair.hpp"
#include "rfembed/instance.hpp"
#include "rfembed/parallel.hpp"
#include "rfembed/protogen.hpp"
#include "rfembed/signal.hpp"
#include "rfembed/waveform.hpp"

namespace rfembed {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "raw I/Q files assume a little-endian host");

// --- raw I/Q ---------------------------------------------------------------------

// Interleaved little-endian float32, I then Q per sample.
inline std::vector<cdouble> read_iq(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open I/Q file " + path.string());
    }
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.empty()) {
        throw CorruptFile("I/Q file " + path.string() + " is empty");
    }
    if (bytes.size() % 8 != 0) {
        throw CorruptFile("I/Q file " + path.string() + " holds " + std::to_string(bytes.size()) +
                          " bytes, not a whole number of I/Q float pairs");
    }
    std::vector<cdouble> x(bytes.size() / 8);
    for (std::size_t i = 0; i < x.size(); ++i) {
        float re = 0.0F;
        float im = 0.0F;
        std::memcpy(&re, bytes.data() + 8 * i, 4);
        std::memcpy(&im, bytes.data() + 8 * i + 4, 4);
        if (!std::isfinite(re) || !std::isfinite(im)) {
            throw ValidationError("I/Q file " + path.string() + " has a non-finite value at sample " +
                                  std::to_string(i));
        }
        x[i] = {re, im};
    }
    return x;
}

inline void write_iq(const fs::path& path, std::span<const cdouble> x) {
    require(all_finite(x), "refusing to write non-finite samples");
    std::vector<float> buf(2 * x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        buf[2 * i] = static_cast<float>(x[i].real());
        buf[2 * i + 1] = static_cast<float>(x[i].imag());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write I/Q file " + path.string());
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

// --- text helpers -------------------------------------------------------------------

inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw CorruptFile(path.string() + " is not valid JSON: " + e.what());
    }
}

inline void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

inline void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// --- manifest -----------------------------------------------------------------------

struct ManifestEntry {
    std::string file;  // relative to the manifest directory, or absolute
    int label = 0;
    double sample_rate_hz = 0.0;
    std::optional<std::string> emitter_id;
    std::optional<double> snr_db;
    std::optional<double> bandwidth_fraction;  // occupied band, when known
    std::size_t sample_count = 0;
    bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
    std::string name;
    std::string description;
    std::uint64_t creation_seed = 0;
    std::vector<ManifestEntry> entries;
    fs::path root;  // directory the entry paths are relative to (not serialized)

    fs::path path_of(const ManifestEntry& e) const {
        const fs::path p(e.file);
        return p.is_absolute() ? p : root / p;
    }
    std::vector<int> labels() const {
        std::vector<int> l;
        for (const auto& e : entries) {
            l.push_back(e.label);
        }
        return l;
    }
};

inline constexpr const char* kManifestFile = "manifest.json";

inline json to_json(const Manifest& m) {
    json entries = json::array();
    for (const auto& e : m.entries) {
        json j{{"file", e.file}, {"label", e.label}, {"sample_rate_hz", e.sample_rate_hz},
               {"sample_count", e.sample_count}};
        if (e.emitter_id) {
            j["emitter_id"] = *e.emitter_id;
        }
        if (e.snr_db) {
            j["snr_db"] = *e.snr_db;
        }
        if (e.bandwidth_fraction) {
            j["bandwidth_fraction"] = *e.bandwidth_fraction;
        }
        entries.push_back(j);
    }
    return {{"name", m.name},
            {"description", m.description},
            {"creation_seed", m.creation_seed},
            {"entries", entries}};
}

// Checks the invariants that need no file access.
inline void validate(const Manifest& m) {
    require(!m.entries.empty(), "manifest has no entries");
    for (const auto& e : m.entries) {
        require(!e.file.empty(), "manifest entry without a file");
        require(e.sample_count >= 1, "manifest entry " + e.file + " has no samples");
        require(e.sample_rate_hz > 0.0 && std::isfinite(e.sample_rate_hz),
                "manifest entry " + e.file + " has an invalid sample rate");
        require(!e.bandwidth_fraction || (*e.bandwidth_fraction > 0.0 && *e.bandwidth_fraction <= 1.0),
                "manifest entry " + e.file + " has an invalid bandwidth fraction");
    }
}

inline Manifest manifest_from_json(const json& j, const fs::path& root) {
    Manifest m;
    m.root = root;
    try {
        m.name = j.value("name", "");
        m.description = j.value("description", "");
        m.creation_seed = j.value("creation_seed", std::uint64_t{0});
        for (const auto& e : j.at("entries")) {
            ManifestEntry x;
            x.file = e.at("file").get<std::string>();
            x.label = e.at("label").get<int>();
            x.sample_rate_hz = e.at("sample_rate_hz").get<double>();
            x.sample_count = e.at("sample_count").get<std::size_t>();
            if (e.contains("emitter_id") && !e.at("emitter_id").is_null()) {
                x.emitter_id = e.at("emitter_id").is_string() ? e.at("emitter_id").get<std::string>()
                                                              : e.at("emitter_id").dump();
            }
            if (e.contains("snr_db") && !e.at("snr_db").is_null()) {
                x.snr_db = e.at("snr_db").get<double>();
            }
            if (e.contains("bandwidth_fraction") && !e.at("bandwidth_fraction").is_null()) {
                x.bandwidth_fraction = e.at("bandwidth_fraction").get<double>();
            }
            m.entries.push_back(std::move(x));
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed manifest: ") + e.what());
    }
    validate(m);
    return m;
}

// Accepts the manifest file itself or the directory holding manifest.json.
// Every referenced file must exist with exactly 8 bytes per sample.
inline Manifest read_manifest(const fs::path& where) {
    const fs::path file = fs::is_directory(where) ? where / kManifestFile : where;
    if (!fs::exists(file)) {
        throw IoError("manifest not found: " + file.string());
    }
    Manifest m = manifest_from_json(read_json(file), file.parent_path());
    for (const auto& e : m.entries) {
        const auto p = m.path_of(e);
        std::error_code ec;
        const auto size = fs::file_size(p, ec);
        if (ec) {
            throw IoError("manifest entry missing on disk: " + p.string());
        }
        if (size != 8 * e.sample_count) {
            throw ValidationError("manifest entry " + e.file + " declares " + std::to_string(e.sample_count) +
                                  " samples but the file holds " + std::to_string(size) + " bytes");
        }
    }
    return m;
}

inline void write_manifest(const fs::path& dir, const Manifest& m) {
    validate(m);
    write_json(dir / kManifestFile, to_json(m));
}

inline ComplexSignal load_entry(const Manifest& m, const ManifestEntry& e) {
    ComplexSignal s{read_iq(m.path_of(e)), e.sample_rate_hz};
    if (s.size() != e.sample_count) {
        throw ValidationError("sample count mismatch for " + e.file);
    }
    return s;
}

inline std::vector<ComplexSignal> load_signals(const Manifest& m, int jobs = 1) {
    std::vector<ComplexSignal> out(m.entries.size());
    parallel_for(m.entries.size(), jobs, [&](std::size_t i) { out[i] = load_entry(m, m.entries[i]); });
    return out;
}

// --- synthetic datasets ------------------------------------------------------------------

inline std::string instance_file_name(int protocol, std::size_t instance) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "p%05d_i%05zu.cf32", protocol, instance);
    return buf;
}

struct DatasetRequest {
    std::uint64_t master_seed = 0;
    DatasetConfig sizes;
    GeneratorConfig generator;
    AugmentConfig augment;
    int jobs = 1;
    std::string name = "synthetic";
};

// Protocol p is sample_protocol(seed, p); instance i of p is seeded by
// derive_seed(seed, p, 0, i). Files are written by their own worker and the
// manifest after all workers finish, so the output does not depend on jobs.
inline Manifest build_synthetic_dataset(const DatasetRequest& r, const fs::path& out_dir,
                                        const TdlTable* profiles = nullptr) {
    validate(r.generator);
    validate(r.augment);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) {
        throw IoError("cannot create output directory " + out_dir.string());
    }
    std::vector<ProtocolSpec> specs;
    for (int p = 0; p < r.sizes.protocols; ++p) {
        specs.push_back(sample_protocol(r.master_seed, p, r.generator));
    }
    const auto per = static_cast<std::size_t>(r.sizes.instances);
    const std::size_t total = specs.size() * per;
    Manifest m;
    m.name = r.name;
    m.description = std::to_string(r.sizes.protocols) + " synthetic protocols x " +
                    std::to_string(r.sizes.instances) + " instances";
    m.creation_seed = r.master_seed;
    m.root = out_dir;
    m.entries.resize(total);
    parallel_for(total, r.jobs, [&](std::size_t k) {
        const auto& spec = specs[k / per];
        const std::size_t i = k % per;
        const auto seed = derive_seed(r.master_seed, static_cast<std::uint64_t>(spec.id), 0, i);
        const auto inst = generate_instance(spec, r.sizes.n_samples, r.sizes.sample_rate, r.augment, seed, profiles);
        auto& e = m.entries[k];
        e.file = instance_file_name(spec.id, i);
        e.label = spec.id;
        e.sample_rate_hz = r.sizes.sample_rate;
        e.snr_db = inst.snr_db;
        e.bandwidth_fraction = spec.bandwidth_fraction;
        e.sample_count = inst.signal.size();
        write_iq(out_dir / e.file, inst.signal.samples);
    });
    write_manifest(out_dir, m);
    return m;
}

// Re-impairs every entry of a (typically clean) dataset into a new directory.
// Entry k uses derive_seed(seed, k) on the impairment stream.
inline Manifest reimpair_dataset(const Manifest& in, const AugmentConfig& augment, std::uint64_t seed,
                                 const fs::path& out_dir, int jobs = 1, const TdlTable* profiles = nullptr) {
    validate(augment);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) {
        throw IoError("cannot create output directory " + out_dir.string());
    }
    Manifest m = in;
    m.root = out_dir;
    m.creation_seed = seed;
    parallel_for(m.entries.size(), jobs, [&](std::size_t k) {
        auto& e = m.entries[k];
        if (!e.bandwidth_fraction) {
            throw ValidationError("entry " + e.file + " has no bandwidth_fraction; it is needed to set the in-band SNR");
        }
        const auto x = load_entry(in, in.entries[k]);
        Rng rng = make_rng(derive_seed(seed, k), Stream::impairment);
        const auto cfg = draw_impairment(augment, rng);
        const TdlProfile* profile = nullptr;
        if (profiles && cfg.channel != ChannelModel::none) {
            const auto it = profiles->find(cfg.channel);
            if (it == profiles->end()) {
                throw ConfigError("no tap table loaded for " + to_string(cfg.channel));
            }
            profile = &it->second;
        }
        const auto y = impair(x, cfg, *e.bandwidth_fraction, rng, profile);
        e.file = fs::path(e.file).filename().string();
        e.snr_db = cfg.snr_db;
        write_iq(out_dir / e.file, y.samples);
    });
    write_manifest(out_dir, m);
    return m;
}

// --- tables -------------------------------------------------------------------------------

// Comma-delimited, header row, reals with 9 significant digits. The first
// `key_columns` columns are text, the rest numeric.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> keys;  // per row
    std::vector<std::vector<double>> values;     // per row
};

inline std::string to_csv(const Table& t) {
    std::ostringstream os;
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        os << (i ? "," : "") << t.header[i];
    }
    os << "\n";
    for (std::size_t r = 0; r < t.values.size(); ++r) {
        bool first = true;
        for (const auto& k : t.keys[r]) {
            os << (first ? "" : ",") << k;
            first = false;
        }
        for (double v : t.values[r]) {
            os << (first ? "" : ",") << format_real(v);
            first = false;
        }
        os << "\n";
    }
    return os.str();
}

inline void write_table(const fs::path& path, const Table& t) { write_text(path, to_csv(t)); }

inline Table read_table(const fs::path& path, std::size_t key_columns) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open table " + path.string());
    }
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) {
            cells.push_back(c);
        }
        return cells;
    };
    Table t;
    std::string line;
    if (!std::getline(in, line)) {
        throw CorruptFile("table " + path.string() + " is empty");
    }
    t.header = split(line);
    require(t.header.size() >= key_columns, "table has fewer columns than key columns");
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != t.header.size()) {
            throw CorruptFile("table " + path.string() + " row " + std::to_string(row) + " has " +
                              std::to_string(cells.size()) + " cells, header has " + std::to_string(t.header.size()));
        }
        t.keys.emplace_back(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(key_columns));
        std::vector<double> v;
        for (std::size_t c = key_columns; c < cells.size(); ++c) {
            try {
                std::size_t used = 0;
                v.push_back(std::stod(cells[c], &used));
                if (used != cells[c].size()) {
                    throw std::invalid_argument("trailing characters");
                }
            } catch (const std::exception&) {
                throw CorruptFile("table " + path.string() + " row " + std::to_string(row) + " has a non-numeric cell '" +
                                  cells[c] + "'");
            }
        }
        t.values.push_back(std::move(v));
    }
    return t;
}

// Representation table: columns file,label,<name...>.
inline Table representation_table(const Manifest& m, const std::vector<std::string>& names,
                                  const std::vector<Eigen::VectorXd>& rows) {
    require(rows.size() == m.entries.size(), "one representation per manifest entry required");
    Table t;
    t.header = {"file", "label"};
    t.header.insert(t.header.end(), names.begin(), names.end());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(static_cast<std::size_t>(rows[i].size()) == names.size(), "representation width mismatch");
        t.keys.push_back({m.entries[i].file, std::to_string(m.entries[i].label)});
        t.values.emplace_back(rows[i].data(), rows[i].data() + rows[i].size());
    }
    return t;
}

inline LabeledSet labeled_set_from_table(const Table& t) {
    require(!t.values.empty(), "table has no rows");
    require(t.header.size() >= 2 && t.header[1] == "label", "table must have file,label leading columns");
    LabeledSet s;
    const auto d = static_cast<Eigen::Index>(t.values.front().size());
    s.vectors.resize(static_cast<Eigen::Index>(t.values.size()), d);
    for (std::size_t r = 0; r < t.values.size(); ++r) {
        s.vectors.row(static_cast<Eigen::Index>(r)) =
            Eigen::Map<const Eigen::RowVectorXd>(t.values[r].data(), d);
        try {
            s.labels.push_back(std::stoi(t.keys[r].at(1)));
        } catch (const std::exception&) {
            throw CorruptFile("table row " + std::to_string(r + 2) + " has a non-integer label");
        }
    }
    return s;
}

// --- reports ------------------------------------------------------------------------------

namespace detail {

// JSON has no infinities; they travel as strings.
inline json real_to_json(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return v;
}

inline double real_from_json(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") {
            return std::numeric_limits<double>::infinity();
        }
        if (s == "-inf") {
            return -std::numeric_limits<double>::infinity();
        }
        throw ValidationError("expected a number, got '" + s + "'");
    }
    return j.get<double>();
}

}  // namespace detail

inline json to_json(const VerificationReport& r) {
    json pts = json::array();
    for (const auto& p : r.points) {
        pts.push_back({{"fpr", p.target_fpr},
                       {"threshold", detail::real_to_json(p.threshold)},
                       {"tpr", p.tpr},
                       {"achieved_fpr", p.achieved_fpr}});
    }
    return {{"metric", to_string(r.metric)},
            {"same_pairs", r.counts.same},
            {"different_pairs", r.counts.different},
            {"degenerate", r.degenerate},
            {"streamed", r.streamed},
            {"same_mean_distance", r.same_mean},
            {"different_mean_distance", r.different_mean},
            {"operating_points", pts}};
}

inline VerificationReport report_from_json(const json& j) {
    VerificationReport r;
    try {
        r.metric = parse_metric(j.at("metric").get<std::string>());
        r.counts = {j.at("same_pairs").get<std::uint64_t>(), j.at("different_pairs").get<std::uint64_t>()};
        r.degenerate = j.at("degenerate").get<bool>();
        r.streamed = j.at("streamed").get<bool>();
        r.same_mean = j.at("same_mean_distance").get<double>();
        r.different_mean = j.at("different_mean_distance").get<double>();
        for (const auto& p : j.at("operating_points")) {
            r.points.push_back({p.at("fpr").get<double>(), detail::real_from_json(p.at("threshold")),
                                p.at("tpr").get<double>(), p.at("achieved_fpr").get<double>()});
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed report: ") + e.what());
    }
    return r;
}

// Plot-ready sweep table: axis value, fpr, tpr, threshold.
inline Table sweep_table(const std::string& axis, const std::vector<SweepResult>& results) {
    Table t;
    t.header = {axis, "fpr", "tpr", "threshold"};
    for (const auto& r : results) {
        for (const auto& p : r.report.points) {
            t.keys.push_back({r.axis_value});
            t.values.push_back({p.target_fpr, p.tpr, p.threshold});
        }
    }
    return t;
}

// --- model containers ---------------------------------------------------------------------

inline constexpr int kModelFormatVersion = 1;

struct NamedArray {
    std::vector<std::size_t> shape;
    std::vector<float> data;
};

struct ModelContainer {
    std::string kind;  // pca, embedmodel, classifier
    json metadata = json::object();
    std::map<std::string, NamedArray> arrays;

    const NamedArray& at(const std::string& name) const {
        const auto it = arrays.find(name);
        if (it == arrays.end()) {
            throw ValidationError("model container has no array '" + name + "'");
        }
        return it->second;
    }
};

namespace detail {

inline void sodium_ready() {
    if (sodium_init() < 0) {
        throw Error("libsodium failed to initialize");
    }
}

inline std::string base64_encode(const std::vector<float>& v) {
    sodium_ready();
    const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
    const std::size_t n = v.size() * sizeof(float);
    std::string out(sodium_base64_ENCODED_LEN(n, sodium_base64_VARIANT_ORIGINAL), '\0');
    sodium_bin2base64(out.data(), out.size(), bytes, n, sodium_base64_VARIANT_ORIGINAL);
    out.resize(std::strlen(out.c_str()));
    return out;
}

inline std::vector<float> base64_decode(const std::string& s, std::size_t count) {
    sodium_ready();
    std::vector<float> v(count);
    std::size_t written = 0;
    if (sodium_base642bin(reinterpret_cast<unsigned char*>(v.data()), count * sizeof(float), s.data(), s.size(),
                          nullptr, &written, nullptr, sodium_base64_VARIANT_ORIGINAL) != 0 ||
        written != count * sizeof(float)) {
        throw CorruptFile("array payload does not decode to " + std::to_string(count) + " float32 values");
    }
    return v;
}

inline NamedArray to_array(const Eigen::MatrixXd& m) {
    NamedArray a;
    a.shape = {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())};
    a.data.resize(static_cast<std::size_t>(m.size()));
    // Row-major on disk.
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            a.data[static_cast<std::size_t>(r * m.cols() + c)] = static_cast<float>(m(r, c));
        }
    }
    return a;
}

inline Eigen::MatrixXd to_matrix(const NamedArray& a) {
    require(a.shape.size() == 2, "expected a 2-D array");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(a.shape[0]), static_cast<Eigen::Index>(a.shape[1]));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            m(r, c) = a.data[static_cast<std::size_t>(r * m.cols() + c)];
        }
    }
    return m;
}

inline NamedArray to_array(const Eigen::VectorXd& v) {
    NamedArray a;
    a.shape = {static_cast<std::size_t>(v.size())};
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        a.data.push_back(static_cast<float>(v(i)));
    }
    return a;
}

inline Eigen::VectorXd to_vector(const NamedArray& a) {
    require(a.shape.size() == 1, "expected a 1-D array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.data.size()));
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = a.data[i];
    }
    return v;
}

}  // namespace detail

inline json to_json(const ModelContainer& c) {
    json arrays = json::object();
    for (const auto& [name, a] : c.arrays) {
        arrays[name] = {{"shape", a.shape}, {"dtype", "float32le"}, {"data", detail::base64_encode(a.data)}};
    }
    return {{"format_version", kModelFormatVersion}, {"kind", c.kind}, {"metadata", c.metadata}, {"arrays", arrays}};
}

inline ModelContainer container_from_json(const json& j) {
    ModelContainer c;
    try {
        if (!j.contains("format_version")) {
            throw ValidationError("model container has no format_version");
        }
        const int v = j.at("format_version").get<int>();
        if (v != kModelFormatVersion) {
            throw ValidationError("unsupported model format_version " + std::to_string(v));
        }
        c.kind = j.at("kind").get<std::string>();
        c.metadata = j.at("metadata");
        for (const auto& [name, a] : j.at("arrays").items()) {
            if (a.at("dtype").get<std::string>() != "float32le") {
                throw ValidationError("array " + name + " has unsupported dtype");
            }
            NamedArray na;
            na.shape = a.at("shape").get<std::vector<std::size_t>>();
            std::size_t count = 1;
            for (auto s : na.shape) {
                count *= s;
            }
            na.data = detail::base64_decode(a.at("data").get<std::string>(), count);
            c.arrays.emplace(name, std::move(na));
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed model container: ") + e.what());
    }
    return c;
}

inline void save_container(const fs::path& path, const ModelContainer& c) { write_json(path, to_json(c)); }

inline ModelContainer load_container(const fs::path& path) { return container_from_json(read_json(path)); }

// PCA: mean (D), components (k x D), variances (k).
inline ModelContainer pca_container(const PcaModel& m) {
    ModelContainer c;
    c.kind = "pca";
    c.metadata = {{"dim", m.dim()}, {"k", m.k()}};
    c.arrays["mean"] = detail::to_array(m.mean);
    c.arrays["components"] = detail::to_array(m.components);
    c.arrays["variances"] = detail::to_array(m.variances);
    return c;
}

inline PcaModel pca_from_container(const ModelContainer& c) {
    require(c.kind == "pca", "model container holds a " + c.kind + ", not a pca model");
    PcaModel m;
    m.mean = detail::to_vector(c.at("mean"));
    m.components = detail::to_matrix(c.at("components"));
    m.variances = detail::to_vector(c.at("variances"));
    require(static_cast<std::size_t>(m.components.cols()) == m.dim(), "pca arrays disagree on dimension");
    return m;
}

inline ModelContainer model_container(const EmbedModel& m, const std::string& kind = "embedmodel",
                                      const json& extra = json::object()) {
    ModelContainer c;
    c.kind = kind;
    const auto& s = m.shape;
    c.metadata = {{"input_dim", s.input_dim}, {"hidden", s.hidden},         {"embedding_dim", s.embedding_dim},
                  {"classes", s.classes},     {"head", to_string(s.head)}, {"scale", s.scale},
                  {"margin", s.margin},       {"fft_size", m.fft_size}};
    for (const auto& [k, v] : extra.items()) {
        c.metadata[k] = v;
    }
    c.arrays["input_mean"] = detail::to_array(m.input_mean);
    c.arrays["input_scale"] = detail::to_array(m.input_scale);
    auto put = [&](const std::string& prefix, const DenseLayer& l) {
        c.arrays[prefix + ".W"] = detail::to_array(l.W);
        if (l.b.size() > 0) {
            c.arrays[prefix + ".b"] = detail::to_array(l.b);
        }
    };
    for (std::size_t i = 0; i < m.hidden.size(); ++i) {
        put("hidden." + std::to_string(i), m.hidden[i]);
    }
    if (!m.embedding.empty()) {
        put("embedding", m.embedding.front());
    }
    put("head", m.head);
    return c;
}

inline EmbedModel model_from_container(const ModelContainer& c) {
    require(c.kind == "embedmodel" || c.kind == "classifier",
            "model container holds a " + c.kind + ", not a network");
    EmbedModel m;
    try {
        const auto& md = c.metadata;
        m.shape.input_dim = md.at("input_dim").get<std::size_t>();
        m.shape.hidden = md.at("hidden").get<std::vector<std::size_t>>();
        m.shape.embedding_dim = md.at("embedding_dim").get<std::size_t>();
        m.shape.classes = md.at("classes").get<std::size_t>();
        m.shape.head = parse_head_kind(md.at("head").get<std::string>());
        m.shape.scale = md.at("scale").get<double>();
        m.shape.margin = md.at("margin").get<double>();
        m.fft_size = md.at("fft_size").get<std::size_t>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("model metadata incomplete: ") + e.what());
    }
    validate(m.shape);
    m.input_mean = detail::to_vector(c.at("input_mean"));
    m.input_scale = detail::to_vector(c.at("input_scale"));
    auto get = [&](const std::string& prefix) {
        DenseLayer l;
        l.W = detail::to_matrix(c.at(prefix + ".W"));
        if (c.arrays.count(prefix + ".b")) {
            l.b = detail::to_matrix(c.at(prefix + ".b"));
        }
        return l;
    };
    std::size_t width = m.shape.input_dim;
    for (std::size_t i = 0; i < m.shape.hidden.size(); ++i) {
        m.hidden.push_back(get("hidden." + std::to_string(i)));
        require(static_cast<std::size_t>(m.hidden.back().W.cols()) == width &&
                    static_cast<std::size_t>(m.hidden.back().W.rows()) == m.shape.hidden[i],
                "hidden layer " + std::to_string(i) + " has the wrong shape");
        width = m.shape.hidden[i];
    }
    if (m.shape.embedding_dim > 0) {
        m.embedding.push_back(get("embedding"));
        require(static_cast<std::size_t>(m.embedding.front().W.cols()) == width, "embedding layer has the wrong shape");
        width = m.shape.embedding_dim;
    }
    m.head = get("head");
    require(static_cast<std::size_t>(m.head.W.cols()) == width &&
                static_cast<std::size_t>(m.head.W.rows()) == m.shape.classes,
            "head has the wrong shape");
    require(static_cast<std::size_t>(m.input_mean.size()) == m.shape.input_dim &&
                static_cast<std::size_t>(m.input_scale.size()) == m.shape.input_dim,
            "input standardization has the wrong length");
    return m;
}

// --- TDL tap tables ----------------------------------------------------------------------------

inline json to_json(const TdlTable& t) {
    json profiles = json::object();
    for (const auto& [model, p] : t) {
        json taps = json::array();
        for (const auto& tap : p.taps) {
            taps.push_back({{"delay", tap.delay}, {"power_db", tap.power_db}, {"los", tap.los}});
        }
        json entry{{"taps", taps}};
        const auto k = k_factor_db(p);
        entry["k_factor_db"] = k ? json(*k) : json(nullptr);
        profiles[to_string(model)] = entry;
    }
    return {{"format_version", 1},
            {"description", "Tapped-delay-line profiles. Delays are normalized and scale with the delay spread; "
                            "powers are in dB before normalization to unit total power."},
            {"profiles", profiles}};
}

inline TdlTable tdl_table_from_json(const json& j) {
    TdlTable t;
    try {
        for (const auto& [name, entry] : j.at("profiles").items()) {
            TdlProfile p;
            p.model = parse_channel_model(name);
            for (const auto& tap : entry.at("taps")) {
                p.taps.push_back({tap.at("delay").get<double>(), tap.at("power_db").get<double>(),
                                  tap.value("los", false)});
            }
            validate(p);
            t[p.model] = std::move(p);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed TDL table: ") + e.what());
    }
    return t;
}

inline TdlTable builtin_tdl_table() {
    TdlTable t;
    for (auto m : {ChannelModel::tdl_a, ChannelModel::tdl_b, ChannelModel::tdl_c, ChannelModel::tdl_d,
                   ChannelModel::tdl_e}) {
        t[m] = builtin_tdl_profile(m);
    }
    return t;
}

inline TdlTable load_tdl_table(const fs::path& path) { return tdl_table_from_json(read_json(path)); }

}  // namespace rfembed

#endif
