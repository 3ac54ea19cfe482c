#ifndef LAYERPROBE_FHS_HPP_
#define LAYERPROBE_FHS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "layerprobe/error.hpp"
#include "layerprobe/io_util.hpp"
#include "layerprobe/probe.hpp"
#include "layerprobe/tensor_store.hpp"

// Feature health scoring of per-layer probe curves.
//
// For a module curve P_1..P_n (fractions in (0,1]):
//
//   GF  = ln( P_end / sqrt(P_start * P_min) )
//   VP  = exp( -lambda * sum_i |P_{i+1} - P_i| / P_end )
//   FHS = P_end * (1 + GF) * VP
//
// GF rewards net improvement over the early and worst layers, VP penalises
// total variation. All values are fractions internally; percent only appears
// when rendering.

namespace layerprobe {

struct ModuleCurve {
    Module module = Module::V;
    std::vector<double> values;  // ordered by layer

    friend bool operator==(const ModuleCurve&, const ModuleCurve&) = default;
};

struct FhsConfig {
    double lambda = 0.2;
    double epsilon_clamp = 1e-6;

    void validate() const {
        if (!(lambda >= 0.0)) throw ContractViolation("FhsConfig: lambda must be >= 0");
        if (!(epsilon_clamp > 0.0)) throw ContractViolation("FhsConfig: epsilon_clamp must be > 0");
    }

    friend bool operator==(const FhsConfig&, const FhsConfig&) = default;
};

inline void to_json(nlohmann::json& j, const FhsConfig& c) {
    j = nlohmann::json{{"lambda", c.lambda}, {"epsilon_clamp", c.epsilon_clamp}};
}

inline void from_json(const nlohmann::json& j, FhsConfig& c) {
    c.lambda = j.value("lambda", c.lambda);
    c.epsilon_clamp = j.value("epsilon_clamp", c.epsilon_clamp);
}

// Curve values after clamping non-positive entries to epsilon_clamp.
struct ClampedCurve {
    std::vector<double> values;
    bool clamped = false;
};

inline ClampedCurve clamp_curve(const ModuleCurve& curve, const FhsConfig& config) {
    config.validate();
    if (curve.values.empty()) throw ContractViolation("ModuleCurve: empty curve");
    ClampedCurve out{curve.values, false};
    for (double& v : out.values) {
        if (!std::isfinite(v) || v > 1.0)
            throw ContractViolation("ModuleCurve: value " + format_double(v) + " outside (0, 1]");
        if (v <= 0.0) {
            v = config.epsilon_clamp;
            out.clamped = true;
        }
    }
    return out;
}

inline double growth_factor(const ModuleCurve& curve, const FhsConfig& config = {}) {
    const auto c = clamp_curve(curve, config);
    const double start = c.values.front();
    const double end = c.values.back();
    const double min = *std::min_element(c.values.begin(), c.values.end());
    return std::log(end / std::sqrt(start * min));
}

inline double total_variation(std::span<const double> values) {
    double tv = 0.0;
    for (std::size_t i = 1; i < values.size(); ++i) tv += std::abs(values[i] - values[i - 1]);
    return tv;
}

inline double volatility_penalty(const ModuleCurve& curve, const FhsConfig& config = {}) {
    const auto c = clamp_curve(curve, config);
    return std::exp(-config.lambda * total_variation(c.values) / c.values.back());
}

struct ModuleHealth {
    double gf = 0.0;
    double vp = 1.0;
    double fhs = 0.0;
    double p_start = 0.0;
    double p_min = 0.0;
    double p_end = 0.0;
    std::size_t n = 0;
    bool clamped = false;

    friend bool operator==(const ModuleHealth&, const ModuleHealth&) = default;
};

inline ModuleHealth feature_health_score(const ModuleCurve& curve, const FhsConfig& config = {}) {
    const auto c = clamp_curve(curve, config);
    ModuleHealth h;
    h.n = c.values.size();
    h.clamped = c.clamped;
    h.p_start = c.values.front();
    h.p_end = c.values.back();
    h.p_min = *std::min_element(c.values.begin(), c.values.end());
    h.gf = std::log(h.p_end / std::sqrt(h.p_start * h.p_min));
    h.vp = std::exp(-config.lambda * total_variation(c.values) / h.p_end);
    h.fhs = h.p_end * (1.0 + h.gf) * h.vp;
    return h;
}

inline constexpr std::array<Module, 3> kScoredModules = {Module::V, Module::C, Module::L};

inline std::size_t module_slot(Module m) {
    switch (m) {
        case Module::V: return 0;
        case Module::C: return 1;
        case Module::L: return 2;
        case Module::FINAL: break;
    }
    throw ContractViolation("FINAL is not a scored module");
}

struct FhsProfile {
    std::string model_name;
    std::string dataset_name;
    MetricBasis metric_basis = MetricBasis::accuracy;
    FhsConfig config;
    std::array<std::optional<ModuleHealth>, 3> modules;  // V, C, L
    std::optional<double> p_final;
    std::string p_final_source;  // "final_predictions", "final_site" or empty
    std::vector<std::string> missing;
    std::vector<std::string> warnings;

    bool partial() const noexcept { return !missing.empty(); }

    const std::optional<ModuleHealth>& module(Module m) const { return modules[module_slot(m)]; }
    std::optional<double> fhs(Module m) const {
        const auto& h = module(m);
        return h ? std::optional<double>(h->fhs) : std::nullopt;
    }
};

// Absent curves or p_final mark the profile partial and are listed in `missing`.
inline FhsProfile four_score_profile(const std::optional<ModuleCurve>& curve_v, const std::optional<ModuleCurve>& curve_c,
                                     const std::optional<ModuleCurve>& curve_l, std::optional<double> p_final,
                                     const FhsConfig& config = {}, MetricBasis basis = MetricBasis::accuracy) {
    config.validate();
    FhsProfile p;
    p.metric_basis = basis;
    p.config = config;
    const std::array<const std::optional<ModuleCurve>*, 3> curves = {&curve_v, &curve_c, &curve_l};
    for (std::size_t s = 0; s < 3; ++s) {
        const char* name = to_string(kScoredModules[s]);
        if (!*curves[s] || (*curves[s])->values.empty()) {
            p.missing.emplace_back(name);
            continue;
        }
        p.modules[s] = feature_health_score(**curves[s], config);
        if (p.modules[s]->clamped)
            p.warnings.push_back(std::string("module ") + name + ": non-positive values clamped to " +
                                 format_double(config.epsilon_clamp));
    }
    if (p_final) {
        if (!(*p_final >= 0.0 && *p_final <= 1.0)) throw ContractViolation("four_score_profile: p_final outside [0,1]");
        p.p_final = p_final;
    } else {
        p.missing.emplace_back("P_final");
    }
    return p;
}

// "FHS_V → FHS_C → FHS_L → P_final" in percent with two decimals; "n/a" for absent entries.
inline std::string render_profile_percent(const FhsProfile& p) {
    auto cell = [](std::optional<double> v) { return v ? format_fixed(*v * 100.0, 2) : std::string("n/a"); };
    return cell(p.fhs(Module::V)) + " → " + cell(p.fhs(Module::C)) + " → " + cell(p.fhs(Module::L)) +
           " → " + cell(p.p_final);
}

inline void to_json(nlohmann::json& j, const ModuleHealth& h) {
    j = nlohmann::json{{"gf", h.gf},         {"vp", h.vp},       {"fhs", h.fhs}, {"p_start", h.p_start},
                       {"p_min", h.p_min},   {"p_end", h.p_end}, {"n", h.n},     {"clamped", h.clamped}};
}

inline void from_json(const nlohmann::json& j, ModuleHealth& h) {
    h.gf = j.at("gf").get<double>();
    h.vp = j.at("vp").get<double>();
    h.fhs = j.at("fhs").get<double>();
    h.p_start = j.at("p_start").get<double>();
    h.p_min = j.at("p_min").get<double>();
    h.p_end = j.at("p_end").get<double>();
    h.n = j.at("n").get<std::size_t>();
    h.clamped = j.value("clamped", false);
}

inline void to_json(nlohmann::json& j, const FhsProfile& p) {
    j = nlohmann::json{{"schema_version", 1},
                       {"model_name", p.model_name},
                       {"dataset_name", p.dataset_name},
                       {"metric_basis", p.metric_basis},
                       {"fhs_config", p.config},
                       {"partial", p.partial()},
                       {"missing", p.missing},
                       {"warnings", p.warnings},
                       {"p_final_source", p.p_final_source}};
    nlohmann::json mods = nlohmann::json::object();
    for (std::size_t s = 0; s < 3; ++s)
        mods[to_string(kScoredModules[s])] = p.modules[s] ? nlohmann::json(*p.modules[s]) : nlohmann::json(nullptr);
    j["modules"] = mods;
    j["p_final"] = p.p_final ? nlohmann::json(*p.p_final) : nlohmann::json(nullptr);
    j["rendered_percent"] = render_profile_percent(p);
}

inline void from_json(const nlohmann::json& j, FhsProfile& p) {
    p.model_name = j.at("model_name").get<std::string>();
    p.dataset_name = j.at("dataset_name").get<std::string>();
    p.metric_basis = j.value("metric_basis", MetricBasis::accuracy);
    if (j.contains("fhs_config")) p.config = j.at("fhs_config").get<FhsConfig>();
    const auto& mods = j.at("modules");
    for (std::size_t s = 0; s < 3; ++s) {
        const char* name = to_string(kScoredModules[s]);
        if (mods.contains(name) && !mods.at(name).is_null()) p.modules[s] = mods.at(name).get<ModuleHealth>();
        else p.modules[s].reset();
    }
    if (j.contains("p_final") && !j.at("p_final").is_null()) p.p_final = j.at("p_final").get<double>();
    p.p_final_source = j.value("p_final_source", std::string{});
    p.missing = j.value("missing", std::vector<std::string>{});
    p.warnings = j.value("warnings", std::vector<std::string>{});
}

}  // namespace layerprobe

#endif  // LAYERPROBE_FHS_HPP_
