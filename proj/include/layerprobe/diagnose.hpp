#ifndef LAYERPROBE_DIAGNOSE_HPP_
#define LAYERPROBE_DIAGNOSE_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "layerprobe/error.hpp"
#include "layerprobe/fhs.hpp"

namespace layerprobe {

struct DiagnoseThresholds {
    double delta_drop = 0.03;
    double flat_band = 0.01;
    std::optional<double> visual_floor;  // reference accuracy the vision tower should reach
    std::size_t crossing_min_layers = 2;

    void validate() const {
        if (!(delta_drop >= 0.0) || !(flat_band >= 0.0) || (visual_floor && !(*visual_floor >= 0.0)))
            throw ContractViolation("DiagnoseThresholds: thresholds must be >= 0");
    }
};

inline void to_json(nlohmann::json& j, const DiagnoseThresholds& t) {
    j = nlohmann::json{{"delta_drop", t.delta_drop},
                       {"flat_band", t.flat_band},
                       {"visual_floor", t.visual_floor ? nlohmann::json(*t.visual_floor) : nlohmann::json(nullptr)},
                       {"crossing_min_layers", t.crossing_min_layers}};
}

inline void from_json(const nlohmann::json& j, DiagnoseThresholds& t) {
    t.delta_drop = j.value("delta_drop", t.delta_drop);
    t.flat_band = j.value("flat_band", t.flat_band);
    if (j.contains("visual_floor")) {
        if (j.at("visual_floor").is_null()) t.visual_floor.reset();
        else t.visual_floor = j.at("visual_floor").get<double>();
    }
    t.crossing_min_layers = j.value("crossing_min_layers", t.crossing_min_layers);
}

namespace detail {
// Absorbs representation error so that a difference equal to a threshold counts as reaching it.
inline constexpr double kCompareSlack = 1e-12;
}  // namespace detail

// ---------------------------------------------------------------------------
// Curve shapes
// ---------------------------------------------------------------------------

enum class Shape { rise_and_fluctuate, sustained_decline, flat, drop_then_recover, irregular };

NLOHMANN_JSON_SERIALIZE_ENUM(Shape, {{Shape::rise_and_fluctuate, "rise_and_fluctuate"},
                                     {Shape::sustained_decline, "sustained_decline"},
                                     {Shape::flat, "flat"},
                                     {Shape::drop_then_recover, "drop_then_recover"},
                                     {Shape::irregular, "irregular"}})

inline const char* to_string(Shape s) {
    switch (s) {
        case Shape::rise_and_fluctuate: return "rise_and_fluctuate";
        case Shape::sustained_decline: return "sustained_decline";
        case Shape::flat: return "flat";
        case Shape::drop_then_recover: return "drop_then_recover";
        case Shape::irregular: return "irregular";
    }
    return "?";
}

struct ShapeTag {
    Shape tag = Shape::irregular;
    std::map<std::string, double> evidence;
};

inline void to_json(nlohmann::json& j, const ShapeTag& t) { j = nlohmann::json{{"tag", t.tag}, {"evidence", t.evidence}}; }

// Least-squares slope of values against layer position 0..n-1.
inline double fit_slope(std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    if (v.size() < 2) return 0.0;
    const double mean_x = (n - 1.0) / 2.0;
    double mean_y = 0.0;
    for (double y : v) mean_y += y;
    mean_y /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double dx = static_cast<double>(i) - mean_x;
        sxy += dx * (v[i] - mean_y);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

// Rules, first match wins:
//   flat               max - min <= flat_band (or n == 1)
//   sustained_decline  fitted slope < 0 and P_end <= P_start - delta
//   drop_then_recover  P_2 <= P_1 - delta and P_end >= P_min + delta
//   rise_and_fluctuate P_max >= P_start + delta, the plateau onset (first layer
//                      within delta of P_max) lies before the last ceil(n/4)
//                      layers, and the range from the onset on is <= 2*delta
//   irregular          otherwise
inline ShapeTag classify_curve_shape(const ModuleCurve& curve, const DiagnoseThresholds& t = {}) {
    t.validate();
    const auto& v = curve.values;
    if (v.empty()) throw ContractViolation("classify_curve_shape: empty curve");
    const double eps = detail::kCompareSlack;
    const std::size_t n = v.size();
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double p_start = v.front(), p_end = v.back(), p_min = *lo, p_max = *hi;
    ShapeTag tag;
    tag.evidence = {{"n", static_cast<double>(n)}, {"p_start", p_start}, {"p_end", p_end},
                    {"p_min", p_min},              {"p_max", p_max},     {"range", p_max - p_min}};

    if (n == 1 || p_max - p_min <= t.flat_band + eps) {
        tag.tag = Shape::flat;
        return tag;
    }

    const double slope = fit_slope(v);
    tag.evidence["slope"] = slope;
    if (slope < 0.0 && p_end <= p_start - t.delta_drop + eps) {
        tag.tag = Shape::sustained_decline;
        return tag;
    }

    if (v[1] <= v[0] - t.delta_drop + eps && p_end >= p_min + t.delta_drop - eps) {
        tag.evidence["first_step"] = v[1] - v[0];
        tag.evidence["recovery"] = p_end - p_min;
        tag.tag = Shape::drop_then_recover;
        return tag;
    }

    std::size_t onset = 0;
    while (v[onset] < p_max - t.delta_drop - eps) ++onset;
    const std::size_t last_quarter = (n + 3) / 4;
    const auto [plo, phi] = std::minmax_element(v.begin() + static_cast<std::ptrdiff_t>(onset), v.end());
    const double post_range = *phi - *plo;
    tag.evidence["plateau_onset"] = static_cast<double>(onset);
    tag.evidence["last_quarter_start"] = static_cast<double>(n - last_quarter);
    tag.evidence["post_peak_range"] = post_range;
    if (p_max >= p_start + t.delta_drop - eps && onset < n - last_quarter && post_range <= 2.0 * t.delta_drop + eps) {
        tag.tag = Shape::rise_and_fluctuate;
        return tag;
    }
    tag.tag = Shape::irregular;
    return tag;
}

// ---------------------------------------------------------------------------
// Failure modes
// ---------------------------------------------------------------------------

enum class FailureMode {
    visual_quality_limitation,
    connector_fidelity_loss,
    llm_comprehension_deficit,
    semantic_mapping_misalignment
};

NLOHMANN_JSON_SERIALIZE_ENUM(FailureMode, {{FailureMode::visual_quality_limitation, "visual_quality_limitation"},
                                           {FailureMode::connector_fidelity_loss, "connector_fidelity_loss"},
                                           {FailureMode::llm_comprehension_deficit, "llm_comprehension_deficit"},
                                           {FailureMode::semantic_mapping_misalignment, "semantic_mapping_misalignment"}})

inline const char* to_string(FailureMode m) {
    switch (m) {
        case FailureMode::visual_quality_limitation: return "visual_quality_limitation";
        case FailureMode::connector_fidelity_loss: return "connector_fidelity_loss";
        case FailureMode::llm_comprehension_deficit: return "llm_comprehension_deficit";
        case FailureMode::semantic_mapping_misalignment: return "semantic_mapping_misalignment";
    }
    return "?";
}

enum class ModeStatus { triggered, not_triggered, not_evaluated };

NLOHMANN_JSON_SERIALIZE_ENUM(ModeStatus, {{ModeStatus::triggered, "triggered"},
                                          {ModeStatus::not_triggered, "not_triggered"},
                                          {ModeStatus::not_evaluated, "not_evaluated"}})

struct ModeFinding {
    FailureMode mode;
    ModeStatus status = ModeStatus::not_evaluated;
    std::map<std::string, double> evidence;
    std::map<std::string, double> thresholds;
    std::string reason;  // set when not evaluated
};

struct FailureModeReport {
    std::vector<ModeFinding> findings;  // one per mode, in enum order

    std::vector<FailureMode> modes() const {
        std::vector<FailureMode> out;
        for (const auto& f : findings)
            if (f.status == ModeStatus::triggered) out.push_back(f.mode);
        return out;
    }

    const ModeFinding& finding(FailureMode m) const { return findings.at(static_cast<std::size_t>(m)); }
};

inline void to_json(nlohmann::json& j, const ModeFinding& f) {
    j = nlohmann::json{{"mode", f.mode}, {"status", f.status}, {"evidence", f.evidence}, {"thresholds", f.thresholds}};
    if (!f.reason.empty()) j["reason"] = f.reason;
}

inline void to_json(nlohmann::json& j, const FailureModeReport& r) {
    j = nlohmann::json{{"modes", r.modes()}, {"findings", r.findings}};
}

struct ModuleCurves {
    std::optional<ModuleCurve> v, c, l;
};

// Rules compare probe values at module boundaries; FHS values are attached as
// supporting evidence. A mode whose inputs are absent is reported as not_evaluated.
inline FailureModeReport detect_failure_modes(const FhsProfile& profile, const ModuleCurves& curves,
                                              const DiagnoseThresholds& t = {}) {
    t.validate();
    const double eps = detail::kCompareSlack;
    const double d = t.delta_drop;
    auto end_of = [](const std::optional<ModuleCurve>& c) -> std::optional<double> {
        if (!c || c->values.empty()) return std::nullopt;
        return c->values.back();
    };
    const auto v_end = end_of(curves.v), c_end = end_of(curves.c), l_end = end_of(curves.l);

    FailureModeReport r;
    auto add = [&](FailureMode m) -> ModeFinding& {
        r.findings.push_back(ModeFinding{m, ModeStatus::not_evaluated, {}, {{"delta_drop", d}}, {}});
        return r.findings.back();
    };
    auto attach_fhs = [&](ModeFinding& f, Module m, const char* key) {
        if (auto v = profile.fhs(m)) f.evidence[key] = *v;
    };
    auto set = [](ModeFinding& f, bool hit) { f.status = hit ? ModeStatus::triggered : ModeStatus::not_triggered; };

    {
        auto& f = add(FailureMode::visual_quality_limitation);
        if (!t.visual_floor) {
            f.reason = "visual_floor not supplied";
        } else if (!v_end) {
            f.reason = "vision tower curve missing";
        } else {
            f.thresholds["visual_floor"] = *t.visual_floor;
            f.evidence["p_v_end"] = *v_end;
            f.evidence["delta"] = *v_end - *t.visual_floor;
            attach_fhs(f, Module::V, "fhs_v");
            set(f, *v_end < *t.visual_floor - d - eps);
        }
    }
    {
        auto& f = add(FailureMode::connector_fidelity_loss);
        if (!v_end || !c_end) {
            f.reason = "vision tower or connector curve missing";
        } else {
            f.evidence["p_v_end"] = *v_end;
            f.evidence["p_c_end"] = *c_end;
            f.evidence["delta"] = *c_end - *v_end;
            attach_fhs(f, Module::V, "fhs_v");
            attach_fhs(f, Module::C, "fhs_c");
            set(f, *c_end <= *v_end - d + eps);
        }
    }
    {
        auto& f = add(FailureMode::llm_comprehension_deficit);
        if (!c_end || !curves.l || curves.l->values.empty()) {
            f.reason = "connector or LLM curve missing";
        } else {
            const double first = curves.l->values.front(), last = curves.l->values.back();
            const double entry = first - *c_end;
            const double depth = last - first;
            f.evidence["p_c_end"] = *c_end;
            f.evidence["p_l_first"] = first;
            f.evidence["p_l_end"] = last;
            f.evidence["entry_delta"] = entry;
            f.evidence["depth_delta"] = depth;
            attach_fhs(f, Module::L, "fhs_l");
            set(f, entry <= -d + eps || depth < 0.0);
        }
    }
    {
        auto& f = add(FailureMode::semantic_mapping_misalignment);
        if (!l_end || !profile.p_final) {
            f.reason = "LLM curve or P_final missing";
        } else {
            const double delta = *profile.p_final - *l_end;
            f.evidence["p_l_end"] = *l_end;
            f.evidence["p_final"] = *profile.p_final;
            f.evidence["delta"] = delta;
            f.evidence["abs_delta"] = std::abs(delta);
            set(f, std::abs(delta) >= d - eps);
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Comprehension vs utilization
// ---------------------------------------------------------------------------

struct GapReport {
    std::vector<double> gaps;                  // util - comp per layer
    std::optional<std::size_t> crossing_layer;  // 1-based layer position
    double comprehension_ceiling = 0.0;
    double utilization_max = 0.0;
    bool ceiling_violation = false;
    std::size_t crossing_min_layers = 0;
};

inline void to_json(nlohmann::json& j, const GapReport& g) {
    j = nlohmann::json{{"gaps", g.gaps},
                       {"crossing_layer", g.crossing_layer ? nlohmann::json(*g.crossing_layer) : nlohmann::json(nullptr)},
                       {"comprehension_ceiling", g.comprehension_ceiling},
                       {"utilization_max", g.utilization_max},
                       {"ceiling_violation", g.ceiling_violation},
                       {"crossing_min_layers", g.crossing_min_layers}};
}

// The crossing is the first layer i from which util >= comp holds for
// min(crossing_min_layers, n) consecutive layers.
inline GapReport comprehension_utilization_gap(const ModuleCurve& comp, const ModuleCurve& util,
                                               const DiagnoseThresholds& t = {}) {
    t.validate();
    const auto& c = comp.values;
    const auto& u = util.values;
    if (c.size() != u.size()) throw ContractViolation("comprehension_utilization_gap: curves differ in length");
    if (c.empty()) throw ContractViolation("comprehension_utilization_gap: empty curves");
    const std::size_t n = c.size();

    GapReport g;
    g.crossing_min_layers = t.crossing_min_layers;
    for (std::size_t i = 0; i < n; ++i) g.gaps.push_back(u[i] - c[i]);
    const std::size_t window = std::clamp<std::size_t>(t.crossing_min_layers, 1, n);
    for (std::size_t i = 0; i + window <= n && !g.crossing_layer; ++i) {
        bool sustained = true;
        for (std::size_t k = i; k < i + window; ++k) sustained = sustained && u[k] >= c[k];
        if (sustained) g.crossing_layer = i + 1;
    }
    g.comprehension_ceiling = *std::max_element(c.begin(), c.end());
    g.utilization_max = *std::max_element(u.begin(), u.end());
    g.ceiling_violation = g.utilization_max > g.comprehension_ceiling + t.delta_drop + detail::kCompareSlack;
    return g;
}

}  // namespace layerprobe

#endif  // LAYERPROBE_DIAGNOSE_HPP_
