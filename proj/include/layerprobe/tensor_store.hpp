#ifndef LAYERPROBE_TENSOR_STORE_HPP_
#define LAYERPROBE_TENSOR_STORE_HPP_

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "layerprobe/error.hpp"
#include "layerprobe/io_util.hpp"

// FTD ("feature tensor dump") files hold one N x D float matrix:
//
//   offset  size  field
//   0       4     magic "FTD1"
//   4       1     format code, 1 = IEEE-754 binary32 little-endian
//   5       1     ndim, always 2
//   6       8     n_samples, u64 little-endian
//   14      8     dim, u64 little-endian
//   22      4*N*D payload, row-major
//
// No padding, no trailer.

namespace layerprobe {

inline constexpr char kFtdMagic[4] = {'F', 'T', 'D', '1'};
inline constexpr std::uint8_t kFtdFormatF32LE = 1;
inline constexpr std::size_t kFtdHeaderSize = 4 + 1 + 1 + 8 + 8;
inline constexpr int kManifestSchemaVersion = 1;

class FeatureTensor {
public:
    FeatureTensor() = default;

    FeatureTensor(std::size_t n_samples, std::size_t dim)
        : n_samples_(n_samples), dim_(dim), data_(n_samples * dim, 0.0f) {
        check_shape();
    }

    FeatureTensor(std::size_t n_samples, std::size_t dim, std::vector<float> data)
        : n_samples_(n_samples), dim_(dim), data_(std::move(data)) {
        check_shape();
        if (data_.size() != n_samples_ * dim_)
            throw ContractViolation("FeatureTensor: data length " + std::to_string(data_.size()) +
                                    " != " + std::to_string(n_samples_) + " x " + std::to_string(dim_));
    }

    std::size_t n_samples() const noexcept { return n_samples_; }
    std::size_t dim() const noexcept { return dim_; }
    std::span<const float> data() const noexcept { return data_; }
    std::span<float> data() noexcept { return data_; }

    std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    std::span<float> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }

    float& operator()(std::size_t i, std::size_t j) { return data_[i * dim_ + j]; }
    float operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }

    // Throws ValidationError naming the first non-finite flat index.
    void validate_finite() const {
        for (std::size_t k = 0; k < data_.size(); ++k) {
            if (!std::isfinite(data_[k])) {
                throw ValidationError("non-finite value at index " + std::to_string(k) + " (row " +
                                          std::to_string(k / dim_) + ", col " + std::to_string(k % dim_) + ")",
                                      k);
            }
        }
    }

    // Rows selected by index, in the given order.
    FeatureTensor gather_rows(std::span<const std::size_t> rows) const {
        FeatureTensor out(rows.size(), dim_);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            auto src = row(rows[r]);
            std::copy(src.begin(), src.end(), out.row(r).begin());
        }
        return out;
    }

    friend bool operator==(const FeatureTensor& a, const FeatureTensor& b) {
        if (a.n_samples_ != b.n_samples_ || a.dim_ != b.dim_) return false;
        // bitwise comparison so round-trips are checked exactly
        for (std::size_t k = 0; k < a.data_.size(); ++k)
            if (std::bit_cast<std::uint32_t>(a.data_[k]) != std::bit_cast<std::uint32_t>(b.data_[k])) return false;
        return true;
    }

private:
    void check_shape() const {
        if (n_samples_ < 1 || dim_ < 1) throw ContractViolation("FeatureTensor: n_samples and dim must be >= 1");
    }

    std::size_t n_samples_ = 0;
    std::size_t dim_ = 0;
    std::vector<float> data_;
};

namespace detail {

inline void put_u64_le(std::string& out, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

inline std::uint64_t get_u64_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b) v = (v << 8) | p[b];
    return v;
}

}  // namespace detail

inline std::string encode_ftd(const FeatureTensor& tensor) {
    tensor.validate_finite();
    std::string out;
    out.reserve(kFtdHeaderSize + 4 * tensor.data().size());
    out.append(kFtdMagic, 4);
    out.push_back(static_cast<char>(kFtdFormatF32LE));
    out.push_back(static_cast<char>(2));
    detail::put_u64_le(out, tensor.n_samples());
    detail::put_u64_le(out, tensor.dim());
    for (float v : tensor.data()) {
        auto bits = std::bit_cast<std::uint32_t>(v);
        for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFFu));
    }
    return out;
}

struct FtdHeader {
    std::uint64_t n_samples = 0;
    std::uint64_t dim = 0;
};

namespace detail {

// `head` is at least the leading bytes of the file; `total_size` is the whole file length.
inline FtdHeader parse_ftd_header(std::string_view head, std::uint64_t total_size) {
    using K = FormatError::Kind;
    if (head.size() < 4 || !std::equal(kFtdMagic, kFtdMagic + 4, head.begin()))
        throw FormatError(K::bad_magic, "bad magic (expected \"FTD1\")");
    if (head.size() < kFtdHeaderSize) throw FormatError(K::truncated, "truncated header");
    auto* p = reinterpret_cast<const unsigned char*>(head.data());
    if (p[4] != kFtdFormatF32LE) throw FormatError(K::unknown_format, "unknown format code " + std::to_string(p[4]));
    if (p[5] != 2) throw FormatError(K::bad_ndim, "ndim must be 2, got " + std::to_string(p[5]));
    FtdHeader h{get_u64_le(p + 6), get_u64_le(p + 14)};
    if (h.n_samples < 1 || h.dim < 1) throw FormatError(K::bad_ndim, "zero-sized dimension");
    const std::uint64_t avail = (total_size - kFtdHeaderSize) / 4;
    if (h.n_samples > avail / h.dim)
        throw FormatError(K::truncated, "payload truncated: dims " + std::to_string(h.n_samples) + "x" +
                                            std::to_string(h.dim) + " need more than the " +
                                            std::to_string(total_size - kFtdHeaderSize) + " payload bytes present");
    if (kFtdHeaderSize + 4 * h.n_samples * h.dim != total_size)
        throw FormatError(K::trailing_bytes, "unexpected bytes after payload");
    return h;
}

}  // namespace detail

inline FeatureTensor decode_ftd(std::string_view bytes) {
    const FtdHeader h = detail::parse_ftd_header(bytes, bytes.size());
    std::vector<float> data(h.n_samples * h.dim);
    auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + kFtdHeaderSize;
    for (std::size_t k = 0; k < data.size(); ++k, p += 4) {
        std::uint32_t bits = std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
                             std::uint32_t(p[3]) << 24;
        data[k] = std::bit_cast<float>(bits);
    }
    FeatureTensor t(h.n_samples, h.dim, std::move(data));
    t.validate_finite();
    return t;
}

inline void write_ftd(const FeatureTensor& tensor, const std::filesystem::path& path) {
    write_file_atomic(path, encode_ftd(tensor));
}

inline FeatureTensor read_ftd(const std::filesystem::path& path) { return decode_ftd(read_file(path)); }

// Reads only the 22-byte header and checks it against the file size.
inline FtdHeader read_ftd_header(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(FormatError::Kind::io, "cannot open: " + path.string());
    std::string head(kFtdHeaderSize, '\0');
    in.read(head.data(), static_cast<std::streamsize>(head.size()));
    head.resize(static_cast<std::size_t>(in.gcount()));
    return detail::parse_ftd_header(head, std::filesystem::file_size(path));
}

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

enum class Module { V, C, L, FINAL };
enum class Aggregation { mean_image_tokens, last_input_token, raw };
enum class Split { train, test };

inline constexpr int kAbstain = -1;

NLOHMANN_JSON_SERIALIZE_ENUM(Module, {{Module::V, "V"}, {Module::C, "C"}, {Module::L, "L"}, {Module::FINAL, "FINAL"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Aggregation, {{Aggregation::mean_image_tokens, "mean_image_tokens"},
                                           {Aggregation::last_input_token, "last_input_token"},
                                           {Aggregation::raw, "raw"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Split, {{Split::train, "train"}, {Split::test, "test"}})

inline const char* to_string(Module m) {
    switch (m) {
        case Module::V: return "V";
        case Module::C: return "C";
        case Module::L: return "L";
        case Module::FINAL: return "FINAL";
    }
    return "?";
}

inline const char* to_string(Aggregation a) {
    switch (a) {
        case Aggregation::mean_image_tokens: return "mean_image_tokens";
        case Aggregation::last_input_token: return "last_input_token";
        case Aggregation::raw: return "raw";
    }
    return "?";
}

inline std::optional<Module> parse_module(std::string_view s) {
    if (s == "V") return Module::V;
    if (s == "C") return Module::C;
    if (s == "L") return Module::L;
    if (s == "FINAL") return Module::FINAL;
    return std::nullopt;
}

struct SiteDescriptor {
    std::string site_id;
    Module module = Module::V;
    std::size_t layer_index = 0;
    Aggregation aggregation = Aggregation::mean_image_tokens;
    std::string file;  // relative to the manifest directory

    friend bool operator==(const SiteDescriptor&, const SiteDescriptor&) = default;
};

struct RunManifest {
    int schema_version = kManifestSchemaVersion;
    std::string model_name;
    std::string dataset_name;
    std::vector<std::string> class_names;
    std::vector<int> labels;
    std::vector<Split> split;
    std::vector<SiteDescriptor> sites;
    std::optional<std::vector<int>> final_predictions;  // kAbstain for unparseable answers

    std::size_t n_samples() const noexcept { return labels.size(); }
    std::size_t num_classes() const noexcept { return class_names.size(); }

    std::vector<std::size_t> indices_of(Split s) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < split.size(); ++i)
            if (split[i] == s) out.push_back(i);
        return out;
    }

    friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

inline void to_json(nlohmann::json& j, const SiteDescriptor& s) {
    j = nlohmann::json{{"site_id", s.site_id},
                       {"module", s.module},
                       {"layer_index", s.layer_index},
                       {"aggregation", s.aggregation},
                       {"file", s.file}};
}

inline void to_json(nlohmann::json& j, const RunManifest& m) {
    j = nlohmann::json{{"schema_version", m.schema_version},
                       {"model_name", m.model_name},
                       {"dataset_name", m.dataset_name},
                       {"class_names", m.class_names},
                       {"labels", m.labels},
                       {"split", m.split},
                       {"sites", m.sites}};
    if (m.final_predictions) j["final_predictions"] = *m.final_predictions;
}

namespace detail {

template <typename T>
T required(const nlohmann::json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw ManifestError(where + ": missing field \"" + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ManifestError(where + ": field \"" + key + "\": " + e.what());
    }
}

inline Split parse_split(const nlohmann::json& v, std::size_t i) {
    if (v == "train") return Split::train;
    if (v == "test") return Split::test;
    throw ManifestError("split[" + std::to_string(i) + "]: expected \"train\" or \"test\"");
}

}  // namespace detail

// Structural parse only; semantic checks live in validate_manifest().
inline RunManifest manifest_from_json(const nlohmann::json& j) {
    using detail::required;
    if (!j.is_object()) throw ManifestError("manifest: top level must be an object");
    RunManifest m;
    m.schema_version = required<int>(j, "schema_version", "manifest");
    m.model_name = required<std::string>(j, "model_name", "manifest");
    m.dataset_name = required<std::string>(j, "dataset_name", "manifest");
    m.class_names = required<std::vector<std::string>>(j, "class_names", "manifest");
    m.labels = required<std::vector<int>>(j, "labels", "manifest");
    auto split = required<nlohmann::json>(j, "split", "manifest");
    if (!split.is_array()) throw ManifestError("manifest: \"split\" must be an array");
    for (std::size_t i = 0; i < split.size(); ++i) m.split.push_back(detail::parse_split(split[i], i));
    auto sites = required<nlohmann::json>(j, "sites", "manifest");
    if (!sites.is_array()) throw ManifestError("manifest: \"sites\" must be an array");
    for (std::size_t i = 0; i < sites.size(); ++i) {
        const std::string where = "sites[" + std::to_string(i) + "]";
        SiteDescriptor s;
        s.site_id = required<std::string>(sites[i], "site_id", where);
        auto mod = parse_module(required<std::string>(sites[i], "module", where));
        if (!mod) throw ManifestError(where + ": module must be one of V, C, L, FINAL");
        s.module = *mod;
        auto layer = required<long long>(sites[i], "layer_index", where);
        if (layer < 0) throw ManifestError(where + ": layer_index must be >= 0");
        s.layer_index = static_cast<std::size_t>(layer);
        const auto agg = required<std::string>(sites[i], "aggregation", where);
        if (agg == "mean_image_tokens") s.aggregation = Aggregation::mean_image_tokens;
        else if (agg == "last_input_token") s.aggregation = Aggregation::last_input_token;
        else if (agg == "raw") s.aggregation = Aggregation::raw;
        else throw ManifestError(where + ": unknown aggregation \"" + agg + "\"");
        s.file = required<std::string>(sites[i], "file", where);
        m.sites.push_back(std::move(s));
    }
    if (j.contains("final_predictions") && !j.at("final_predictions").is_null())
        m.final_predictions = required<std::vector<int>>(j, "final_predictions", "manifest");
    return m;
}

inline RunManifest load_manifest(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ManifestError(path.string() + ": invalid JSON: " + e.what());
    }
    return manifest_from_json(j);
}

inline void save_manifest(const RunManifest& m, const std::filesystem::path& path) {
    write_file_atomic(path, nlohmann::json(m).dump(2) + "\n");
}

struct Violation {
    std::string code;
    std::string message;
    std::string site_id;  // empty for run-level problems

    friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
    bool has(std::string_view code) const {
        return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.code == code; });
    }
};

inline void to_json(nlohmann::json& j, const ValidationReport& r) {
    j = nlohmann::json{{"schema_version", kManifestSchemaVersion}, {"ok", r.ok()}, {"violations", nlohmann::json::array()}};
    for (const auto& v : r.violations)
        j["violations"].push_back({{"code", v.code}, {"message", v.message}, {"site_id", v.site_id}});
}

// Reads FTD headers only; never touches payload values or writes anything.
inline ValidationReport validate_manifest(const RunManifest& m, const std::filesystem::path& base_dir) {
    ValidationReport r;
    auto add = [&](std::string code, std::string msg, std::string site = {}) {
        r.violations.push_back({std::move(code), std::move(msg), std::move(site)});
    };

    if (m.schema_version != kManifestSchemaVersion)
        add("schema_version", "unsupported schema_version " + std::to_string(m.schema_version));
    if (m.class_names.size() < 2) add("too_few_classes", "class_names must list at least 2 classes");
    const std::size_t n = m.labels.size();
    if (n == 0) add("no_samples", "labels is empty");
    if (m.split.size() != n)
        add("length_mismatch", "split has " + std::to_string(m.split.size()) + " entries, labels has " + std::to_string(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (m.labels[i] < 0 || static_cast<std::size_t>(m.labels[i]) >= m.class_names.size()) {
            add("label_out_of_range", "labels[" + std::to_string(i) + "] = " + std::to_string(m.labels[i]));
            break;
        }
    }
    if (m.final_predictions) {
        const auto& fp = *m.final_predictions;
        if (fp.size() != n)
            add("length_mismatch",
                "final_predictions has " + std::to_string(fp.size()) + " entries, labels has " + std::to_string(n));
        for (std::size_t i = 0; i < fp.size(); ++i) {
            if (fp[i] != kAbstain && (fp[i] < 0 || static_cast<std::size_t>(fp[i]) >= m.class_names.size())) {
                add("prediction_out_of_range", "final_predictions[" + std::to_string(i) + "] = " + std::to_string(fp[i]));
                break;
            }
        }
    }

    if (m.split.size() == n) {
        std::set<int> train_classes, test_classes;
        for (std::size_t i = 0; i < n; ++i) (m.split[i] == Split::train ? train_classes : test_classes).insert(m.labels[i]);
        if (train_classes.empty()) add("empty_train_split", "no samples in the train split");
        if (test_classes.empty()) add("empty_test_split", "no samples in the test split");
        else if (test_classes.size() < 2)
            add("degenerate_test_split", "test split contains a single class");
    }

    if (m.sites.empty()) add("no_sites", "manifest declares no sites");

    std::set<std::string> ids;
    std::map<std::pair<Module, Aggregation>, std::vector<std::size_t>> layers;
    for (const auto& s : m.sites) {
        if (!ids.insert(s.site_id).second) add("duplicate_site_id", "site_id \"" + s.site_id + "\" repeated", s.site_id);
        layers[{s.module, s.aggregation}].push_back(s.layer_index);

        const auto path = base_dir / s.file;
        std::error_code ec;
        if (!std::filesystem::is_regular_file(path, ec)) {
            add("missing_file", "missing file " + s.file, s.site_id);
            continue;
        }
        try {
            const auto h = read_ftd_header(path);
            if (h.n_samples != n)
                add("length_mismatch",
                    s.file + " has " + std::to_string(h.n_samples) + " rows, manifest has " + std::to_string(n) + " samples",
                    s.site_id);
        } catch (const FormatError& e) {
            add("bad_file", s.file + ": " + e.what(), s.site_id);
        }
    }
    for (auto& [key, idx] : layers) {
        std::sort(idx.begin(), idx.end());
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (idx[k] != k) {
                add("non_contiguous_layers", std::string("module ") + to_string(key.first) + " (" + to_string(key.second) +
                                                 ") layer indices are not 0..n-1");
                break;
            }
        }
    }
    return r;
}

}  // namespace layerprobe

#endif  // LAYERPROBE_TENSOR_STORE_HPP_
