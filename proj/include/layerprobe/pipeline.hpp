#ifndef LAYERPROBE_PIPELINE_HPP_
#define LAYERPROBE_PIPELINE_HPP_

#include <algorithm>
#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "layerprobe/diagnose.hpp"
#include "layerprobe/fhs.hpp"
#include "layerprobe/io_util.hpp"
#include "layerprobe/metrics.hpp"
#include "layerprobe/probe.hpp"
#include "layerprobe/tensor_store.hpp"

// End-to-end stages behind the command-line tool:
//
//   validate  manifest  -> validation report
//   probe     manifest  -> layer_results.{json,csv}
//   fhs       results   -> profile.json, curves.csv
//   diagnose  profile   -> diagnosis.json, summary.txt
//   compare   profiles  -> compare.{csv,json,txt}
//
// Each stage returns an exit code and writes its files atomically.

namespace layerprobe::pipeline {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int {
    kOk = 0,
    kUsageError = 1,
    kValidationFailed = 2,
    kTrainingFailed = 3,
    kPartialProfile = 4,
};

struct RunConfig {
    ProbeConfig probe;
    FhsConfig fhs;
    DiagnoseThresholds diagnose;
    MetricBasis metric_basis = MetricBasis::accuracy;
};

inline void to_json(nlohmann::json& j, const RunConfig& c) {
    j = nlohmann::json{{"probe", c.probe}, {"fhs", c.fhs}, {"diagnose", c.diagnose}, {"metric", c.metric_basis}};
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig c;
    if (!j.is_object()) throw ManifestError("config: top level must be an object");
    try {
        if (j.contains("probe")) c.probe = j.at("probe").get<ProbeConfig>();
        if (j.contains("fhs")) c.fhs = j.at("fhs").get<FhsConfig>();
        if (j.contains("diagnose")) c.diagnose = j.at("diagnose").get<DiagnoseThresholds>();
        if (j.contains("metric")) {
            auto b = parse_metric_basis(j.at("metric").get<std::string>());
            if (!b) throw ManifestError("config: unknown metric \"" + j.at("metric").get<std::string>() + "\"");
            c.metric_basis = *b;
        }
    } catch (const nlohmann::json::exception& e) {
        throw ManifestError(std::string("config: ") + e.what());
    }
    c.probe.validate();
    c.fhs.validate();
    c.diagnose.validate();
    return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    try {
        return run_config_from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::parse_error& e) {
        throw ManifestError(path.string() + ": invalid JSON: " + e.what());
    }
}

// Outcome of one stage: exit code, machine-readable error (if any) and a
// human-readable summary.
struct StageResult {
    int exit_code = kOk;
    nlohmann::json error;  // null on success
    std::string summary;
};

inline nlohmann::json error_json(const std::string& code, const std::string& message) {
    return nlohmann::json{{"schema_version", kSchemaVersion}, {"error", {{"code", code}, {"message", message}}}};
}

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

inline StageResult run_validate(const std::filesystem::path& manifest_path, ValidationReport* report_out = nullptr) {
    StageResult r;
    ValidationReport report;
    try {
        const auto m = load_manifest(manifest_path);
        report = validate_manifest(m, manifest_path.parent_path());
    } catch (const std::exception& e) {
        report.violations.push_back({"malformed_manifest", e.what(), {}});
    }
    r.summary = dump(nlohmann::json(report));
    if (!report.ok()) {
        r.exit_code = kValidationFailed;
        r.error = error_json("validation_failed", "manifest failed validation");
        r.error["error"]["violations"] = nlohmann::json(report)["violations"];
    }
    if (report_out) *report_out = std::move(report);
    return r;
}

// ---------------------------------------------------------------------------
// probe
// ---------------------------------------------------------------------------

// `jobs` only changes scheduling; outputs are identical for any value.
inline StageResult run_probe(const std::filesystem::path& manifest_path, const RunConfig& config,
                             const std::filesystem::path& out_dir, unsigned jobs = 1) {
    StageResult r = run_validate(manifest_path);
    if (r.exit_code != kOk) {
        write_file_atomic(out_dir / "error.json", dump(r.error));
        return r;
    }
    const auto manifest = load_manifest(manifest_path);
    const auto results = probe_site_sweep(manifest, manifest_path.parent_path(), config.probe, jobs);

    auto doc = layer_results_to_json(results, config.probe, manifest);
    doc["config"] = config;
    write_file_atomic(out_dir / "layer_results.json", dump(doc));
    write_file_atomic(out_dir / "layer_results.csv", layer_results_to_csv(results));

    nlohmann::json failures = nlohmann::json::array();
    for (const auto& res : results)
        if (res.error) failures.push_back({{"site_id", res.site_id}, {"message", *res.error}});

    std::ostringstream s;
    s << "probed " << results.size() << " site(s), " << failures.size() << " failed\n";
    r.summary = s.str();
    if (!failures.empty()) {
        r.exit_code = kTrainingFailed;
        r.error = error_json("training_failed", std::to_string(failures.size()) + " site(s) failed");
        r.error["error"]["sites"] = failures;
        write_file_atomic(out_dir / "error.json", dump(r.error));
    } else {
        std::filesystem::remove(out_dir / "error.json");
    }
    return r;
}

// ---------------------------------------------------------------------------
// fhs
// ---------------------------------------------------------------------------

struct CurveRecord {
    Module module = Module::V;
    Aggregation aggregation = Aggregation::mean_image_tokens;
    std::string role;  // "primary", "comprehension" or "utilization"
    std::vector<std::size_t> layer_indices;
    std::vector<std::string> site_ids;
    std::vector<double> values;

    ModuleCurve curve() const { return ModuleCurve{module, values}; }
};

inline void to_json(nlohmann::json& j, const CurveRecord& c) {
    j = nlohmann::json{{"module", c.module},         {"aggregation", c.aggregation}, {"role", c.role},
                       {"layer_indices", c.layer_indices}, {"site_ids", c.site_ids},   {"values", c.values}};
}

inline void from_json(const nlohmann::json& j, CurveRecord& c) {
    c.module = j.at("module").get<Module>();
    c.aggregation = j.at("aggregation").get<Aggregation>();
    c.role = j.at("role").get<std::string>();
    c.layer_indices = j.at("layer_indices").get<std::vector<std::size_t>>();
    c.site_ids = j.at("site_ids").get<std::vector<std::string>>();
    c.values = j.at("values").get<std::vector<double>>();
}

// A module's FHS curve uses mean_image_tokens sites when present, else raw,
// else last_input_token. For L, the mean_image_tokens and last_input_token
// curves are also returned as comprehension and utilization.
inline std::vector<CurveRecord> build_curves(const std::vector<LayerProbeResult>& results, MetricBasis basis,
                                             std::vector<std::string>& warnings) {
    std::map<std::pair<Module, Aggregation>, std::vector<const LayerProbeResult*>> groups;
    for (const auto& r : results) groups[{r.module, r.aggregation}].push_back(&r);

    auto make = [&](Module m, Aggregation a, std::string role) -> std::optional<CurveRecord> {
        auto it = groups.find({m, a});
        if (it == groups.end()) return std::nullopt;
        auto sites = it->second;
        std::sort(sites.begin(), sites.end(),
                  [](auto* x, auto* y) { return x->layer_index < y->layer_index; });
        CurveRecord c{m, a, std::move(role), {}, {}, {}};
        for (const auto* s : sites) {
            if (s->error) {
                warnings.push_back(std::string("module ") + to_string(m) + " (" + to_string(a) + "): site " +
                                   s->site_id + " failed, curve dropped");
                return std::nullopt;
            }
            c.layer_indices.push_back(s->layer_index);
            c.site_ids.push_back(s->site_id);
            c.values.push_back(s->metrics.get(basis));
        }
        return c;
    };

    std::vector<CurveRecord> out;
    for (Module m : {Module::V, Module::C, Module::L, Module::FINAL}) {
        for (Aggregation a : {Aggregation::mean_image_tokens, Aggregation::raw, Aggregation::last_input_token}) {
            if (!groups.count({m, a})) continue;
            if (auto c = make(m, a, "primary")) out.push_back(std::move(*c));
            break;
        }
    }
    if (groups.count({Module::L, Aggregation::mean_image_tokens}) && groups.count({Module::L, Aggregation::last_input_token})) {
        auto comp = make(Module::L, Aggregation::mean_image_tokens, "comprehension");
        auto util = make(Module::L, Aggregation::last_input_token, "utilization");
        if (comp && util) {
            out.push_back(std::move(*comp));
            out.push_back(std::move(*util));
        }
    }
    std::vector<std::string> unique;
    for (auto& w : warnings)
        if (std::find(unique.begin(), unique.end(), w) == unique.end()) unique.push_back(std::move(w));
    warnings = std::move(unique);
    return out;
}

inline const CurveRecord* find_curve(const std::vector<CurveRecord>& curves, Module m, std::string_view role) {
    for (const auto& c : curves)
        if (c.module == m && c.role == role) return &c;
    return nullptr;
}

// Metric of the generated answers over the test split. Abstentions count as
// wrong; for AUC they contribute a uniform score row.
inline double final_output_metric(const RunManifest& m, MetricBasis basis) {
    const auto& preds = m.final_predictions.value();
    std::vector<int> truth, pred;
    for (auto i : m.indices_of(Split::test)) {
        truth.push_back(m.labels[i]);
        pred.push_back(preds[i] == kAbstain ? metrics::kNoPrediction : preds[i]);
    }
    const std::size_t k = m.num_classes();
    const bool binary = k == 2;
    switch (basis) {
        case MetricBasis::accuracy: return metrics::accuracy(truth, pred);
        case MetricBasis::precision:
        case MetricBasis::recall:
        case MetricBasis::f1: {
            const auto prf =
                metrics::prf1(truth, pred, k, binary ? metrics::PrfAveraging::binary_positive : metrics::PrfAveraging::macro);
            return basis == MetricBasis::precision ? prf.precision : basis == MetricBasis::recall ? prf.recall : prf.f1;
        }
        case MetricBasis::auc: {
            std::vector<double> scores(truth.size() * k, 0.0);
            for (std::size_t i = 0; i < truth.size(); ++i) {
                if (pred[i] == metrics::kNoPrediction)
                    for (std::size_t c = 0; c < k; ++c) scores[i * k + c] = 1.0 / static_cast<double>(k);
                else
                    scores[i * k + static_cast<std::size_t>(pred[i])] = 1.0;
            }
            return metrics::auc(truth, scores, k, binary ? metrics::AucAveraging::binary : metrics::AucAveraging::macro_ovr)
                .value;
        }
    }
    return 0.0;
}

struct FhsOutcome {
    FhsProfile profile;
    std::vector<CurveRecord> curves;
};

inline FhsOutcome compute_fhs(const RunManifest& manifest, const std::vector<LayerProbeResult>& results,
                              const RunConfig& config) {
    FhsOutcome out;
    std::vector<std::string> warnings;
    out.curves = build_curves(results, config.metric_basis, warnings);
    auto curve_of = [&](Module m) -> std::optional<ModuleCurve> {
        if (auto* c = find_curve(out.curves, m, "primary")) return c->curve();
        return std::nullopt;
    };

    std::optional<double> p_final;
    std::string source;
    if (manifest.final_predictions) {
        p_final = final_output_metric(manifest, config.metric_basis);
        source = "final_predictions";
    } else if (auto* fin = find_curve(out.curves, Module::FINAL, "primary")) {
        p_final = fin->values.back();
        source = "final_site";
    }

    out.profile = four_score_profile(curve_of(Module::V), curve_of(Module::C), curve_of(Module::L), p_final, config.fhs,
                                     config.metric_basis);
    out.profile.model_name = manifest.model_name;
    out.profile.dataset_name = manifest.dataset_name;
    out.profile.p_final_source = source;
    out.profile.warnings.insert(out.profile.warnings.begin(), warnings.begin(), warnings.end());
    return out;
}

inline std::string curves_to_csv(const std::vector<CurveRecord>& curves) {
    std::string out = "module,layer_index,value\n";
    for (Module m : kScoredModules) {
        if (const auto* c = find_curve(curves, m, "primary")) {
            for (std::size_t i = 0; i < c->values.size(); ++i)
                out += std::string(to_string(m)) + ',' + std::to_string(c->layer_indices[i]) + ',' +
                       format_double(c->values[i]) + '\n';
        }
    }
    return out;
}

inline std::vector<LayerProbeResult> load_layer_results(const std::filesystem::path& path) {
    try {
        const auto j = nlohmann::json::parse(read_file(path));
        return j.at("results").get<std::vector<LayerProbeResult>>();
    } catch (const nlohmann::json::exception& e) {
        throw ManifestError(path.string() + ": " + e.what());
    }
}

inline StageResult run_fhs(const std::filesystem::path& results_path, const std::filesystem::path& manifest_path,
                           const RunConfig& config, const std::filesystem::path& out_dir) {
    StageResult r;
    const auto manifest = load_manifest(manifest_path);
    const auto outcome = compute_fhs(manifest, load_layer_results(results_path), config);

    nlohmann::json doc = outcome.profile;
    doc["curves"] = outcome.curves;
    doc["config"] = config;
    write_file_atomic(out_dir / "profile.json", dump(doc));
    write_file_atomic(out_dir / "curves.csv", curves_to_csv(outcome.curves));

    r.summary = outcome.profile.model_name + " / " + outcome.profile.dataset_name + ": " +
                render_profile_percent(outcome.profile) + "\n";
    if (outcome.profile.partial()) {
        r.exit_code = kPartialProfile;
        std::string missing;
        for (const auto& s : outcome.profile.missing) missing += (missing.empty() ? "" : ", ") + s;
        r.error = error_json("partial_profile", "profile is missing: " + missing);
        r.error["error"]["missing"] = outcome.profile.missing;
    }
    return r;
}

// ---------------------------------------------------------------------------
// diagnose
// ---------------------------------------------------------------------------

struct Diagnosis {
    std::map<Module, ShapeTag> shapes;
    FailureModeReport failures;
    std::optional<GapReport> gap;
};

inline Diagnosis diagnose(const FhsProfile& profile, const std::vector<CurveRecord>& curves,
                          const DiagnoseThresholds& t) {
    Diagnosis d;
    ModuleCurves mc;
    for (Module m : kScoredModules) {
        if (const auto* c = find_curve(curves, m, "primary")) {
            d.shapes[m] = classify_curve_shape(c->curve(), t);
            (m == Module::V ? mc.v : m == Module::C ? mc.c : mc.l) = c->curve();
        }
    }
    d.failures = detect_failure_modes(profile, mc, t);
    const auto* comp = find_curve(curves, Module::L, "comprehension");
    const auto* util = find_curve(curves, Module::L, "utilization");
    if (comp && util) d.gap = comprehension_utilization_gap(comp->curve(), util->curve(), t);
    return d;
}

inline std::string diagnosis_summary(const FhsProfile& profile, const Diagnosis& d, const DiagnoseThresholds& t) {
    std::ostringstream s;
    s << profile.model_name << " / " << profile.dataset_name << " (metric: " << to_string(profile.metric_basis) << ")\n";
    s << "profile (FHS_V -> FHS_C -> FHS_L -> P_final, %): " << render_profile_percent(profile) << "\n";
    for (const auto& [m, tag] : d.shapes) s << "shape " << to_string(m) << ": " << to_string(tag.tag) << "\n";
    for (const auto& f : d.failures.findings) {
        s << "mode " << to_string(f.mode) << ": ";
        if (f.status == ModeStatus::not_evaluated) {
            s << "not evaluated (" << f.reason << ")\n";
            continue;
        }
        s << (f.status == ModeStatus::triggered ? "TRIGGERED" : "ok");
        if (auto it = f.evidence.find("delta"); it != f.evidence.end()) s << " delta=" << format_fixed(it->second, 4);
        if (auto it = f.evidence.find("entry_delta"); it != f.evidence.end())
            s << " entry_delta=" << format_fixed(it->second, 4);
        if (auto it = f.evidence.find("depth_delta"); it != f.evidence.end())
            s << " depth_delta=" << format_fixed(it->second, 4);
        s << "\n";
    }
    if (d.gap) {
        s << "comprehension/utilization: crossing "
          << (d.gap->crossing_layer ? "at layer " + std::to_string(*d.gap->crossing_layer) : std::string("none"))
          << ", comprehension ceiling " << format_fixed(d.gap->comprehension_ceiling, 4)
          << (d.gap->ceiling_violation ? ", utilization exceeds ceiling" : ", within ceiling") << "\n";
    }
    s << "note: shape and failure-mode rules are operational thresholds (delta_drop=" << format_double(t.delta_drop)
      << ", flat_band=" << format_double(t.flat_band) << ", crossing_min_layers=" << t.crossing_min_layers
      << ", visual_floor=" << (t.visual_floor ? format_double(*t.visual_floor) : std::string("unset")) << ")\n";
    return s.str();
}

inline StageResult run_diagnose(const std::filesystem::path& profile_path, const RunConfig& config,
                                const std::filesystem::path& out_dir) {
    StageResult r;
    nlohmann::json doc;
    FhsProfile profile;
    std::vector<CurveRecord> curves;
    try {
        doc = nlohmann::json::parse(read_file(profile_path));
        profile = doc.get<FhsProfile>();
        curves = doc.at("curves").get<std::vector<CurveRecord>>();
    } catch (const nlohmann::json::exception& e) {
        throw ManifestError(profile_path.string() + ": " + e.what());
    }
    const auto d = diagnose(profile, curves, config.diagnose);

    nlohmann::json out{{"schema_version", kSchemaVersion},
                       {"model_name", profile.model_name},
                       {"dataset_name", profile.dataset_name},
                       {"metric_basis", profile.metric_basis},
                       {"config", config},
                       {"failure_modes", d.failures},
                       {"gap", d.gap ? nlohmann::json(*d.gap) : nlohmann::json(nullptr)}};
    nlohmann::json shapes = nlohmann::json::object();
    for (const auto& [m, tag] : d.shapes) shapes[to_string(m)] = tag;
    out["shapes"] = shapes;

    r.summary = diagnosis_summary(profile, d, config.diagnose);
    write_file_atomic(out_dir / "diagnosis.json", dump(out));
    write_file_atomic(out_dir / "summary.txt", r.summary);
    return r;
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

struct CompareRow {
    std::string model;
    std::string dataset;
    std::array<std::optional<double>, 4> values;  // fhs_v, fhs_c, fhs_l, p_final (fractions)
    std::array<bool, 4> best{};
    std::array<bool, 4> worst{};
};

struct CompareTable {
    std::vector<CompareRow> rows;      // sorted by (model, dataset)
    std::vector<CompareRow> averages;  // one per dataset, model = "Average"
};

inline constexpr std::array<const char*, 4> kCompareColumns = {"fhs_v", "fhs_c", "fhs_l", "p_final"};

// Best/worst are flagged per dataset and column. A single row is both; when
// several rows tie on every value, none is flagged.
inline CompareTable compare_profiles(const std::vector<FhsProfile>& profiles) {
    CompareTable t;
    std::map<std::pair<std::string, std::string>, int> seen;
    for (const auto& p : profiles) seen[{p.model_name, p.dataset_name}]++;
    std::string dups;
    for (const auto& [key, count] : seen)
        if (count > 1) dups += (dups.empty() ? "" : "; ") + key.first + " / " + key.second;
    if (!dups.empty()) throw ContractViolation("compare: duplicate (model, dataset) entries: " + dups);
    if (profiles.empty()) throw ContractViolation("compare: need at least one profile");

    for (const auto& p : profiles)
        t.rows.push_back({p.model_name, p.dataset_name,
                          {p.fhs(Module::V), p.fhs(Module::C), p.fhs(Module::L), p.p_final}, {}, {}});
    std::sort(t.rows.begin(), t.rows.end(),
              [](const auto& a, const auto& b) { return std::tie(a.model, a.dataset) < std::tie(b.model, b.dataset); });

    std::set<std::string> datasets;
    for (const auto& r : t.rows) datasets.insert(r.dataset);
    for (const auto& ds : datasets) {
        CompareRow avg{"Average", ds, {}, {}, {}};
        for (std::size_t c = 0; c < 4; ++c) {
            std::vector<CompareRow*> members;
            for (auto& r : t.rows)
                if (r.dataset == ds && r.values[c]) members.push_back(&r);
            if (members.empty()) continue;
            double sum = 0.0, lo = *members.front()->values[c], hi = lo;
            for (auto* r : members) {
                sum += *r->values[c];
                lo = std::min(lo, *r->values[c]);
                hi = std::max(hi, *r->values[c]);
            }
            avg.values[c] = sum / static_cast<double>(members.size());
            if (members.size() > 1 && lo == hi) continue;
            for (auto* r : members) {
                r->best[c] = *r->values[c] == hi;
                r->worst[c] = *r->values[c] == lo;
            }
        }
        t.averages.push_back(std::move(avg));
    }
    return t;
}

inline std::string compare_to_csv(const CompareTable& t) {
    std::string out = "model,dataset,fhs_v,fhs_c,fhs_l,p_final\n";
    auto emit = [&](const CompareRow& r) {
        out += r.model + ',' + r.dataset;
        for (const auto& v : r.values) out += ',' + (v ? format_fixed(*v * 100.0, 2) : std::string());
        out += '\n';
    };
    for (const auto& r : t.rows) emit(r);
    for (const auto& r : t.averages) emit(r);
    return out;
}

// Plain-text table; best values marked '*', worst values marked '_'.
inline std::string compare_to_text(const CompareTable& t) {
    std::size_t wm = 5, wd = 7;
    for (const auto& r : t.rows) {
        wm = std::max(wm, r.model.size());
        wd = std::max(wd, r.dataset.size());
    }
    auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(w, s.size()), ' ');
        return s;
    };
    std::string out = pad("model", wm) + "  " + pad("dataset", wd) + "  FHS_V    -> FHS_C    -> FHS_L    -> P_final\n";
    auto emit = [&](const CompareRow& r) {
        out += pad(r.model, wm) + "  " + pad(r.dataset, wd) + "  ";
        for (std::size_t c = 0; c < 4; ++c) {
            std::string cell = r.values[c] ? format_fixed(*r.values[c] * 100.0, 2) : "n/a";
            if (r.best[c]) cell += '*';
            if (r.worst[c]) cell += '_';
            out += pad(cell, 9);
            if (c < 3) out += "-> ";
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += '\n';
    };
    for (const auto& r : t.rows) emit(r);
    for (const auto& r : t.averages) emit(r);
    out += "(* dataset best, _ dataset worst)\n";
    return out;
}

inline nlohmann::json compare_to_json(const CompareTable& t) {
    auto row = [](const CompareRow& r) {
        nlohmann::json j{{"model", r.model}, {"dataset", r.dataset}};
        for (std::size_t c = 0; c < 4; ++c) {
            j[kCompareColumns[c]] = r.values[c] ? nlohmann::json(*r.values[c]) : nlohmann::json(nullptr);
            j[std::string(kCompareColumns[c]) + "_best"] = r.best[c];
            j[std::string(kCompareColumns[c]) + "_worst"] = r.worst[c];
        }
        return j;
    };
    nlohmann::json j{{"schema_version", kSchemaVersion}, {"rows", nlohmann::json::array()}, {"averages", nlohmann::json::array()}};
    for (const auto& r : t.rows) j["rows"].push_back(row(r));
    for (const auto& r : t.averages) j["averages"].push_back(row(r));
    return j;
}

inline StageResult run_compare(const std::vector<std::filesystem::path>& profile_paths,
                               const std::filesystem::path& out_dir) {
    std::vector<FhsProfile> profiles;
    for (const auto& p : profile_paths) {
        try {
            profiles.push_back(nlohmann::json::parse(read_file(p)).get<FhsProfile>());
        } catch (const nlohmann::json::exception& e) {
            throw ManifestError(p.string() + ": " + e.what());
        }
    }
    const auto table = compare_profiles(profiles);
    StageResult r;
    r.summary = compare_to_text(table);
    write_file_atomic(out_dir / "compare.csv", compare_to_csv(table));
    write_file_atomic(out_dir / "compare.json", dump(compare_to_json(table)));
    write_file_atomic(out_dir / "compare.txt", r.summary);
    return r;
}

}  // namespace layerprobe::pipeline

#endif  // LAYERPROBE_PIPELINE_HPP_
