// layerprobe: layer-wise probing diagnostics for multimodal model feature dumps.
//
//   layerprobe validate --manifest run/manifest.json
//   layerprobe probe    --manifest run/manifest.json --out results [--config cfg.json] [--seed N] [--jobs N]
//   layerprobe fhs      --manifest run/manifest.json --out results [--metric accuracy]
//   layerprobe diagnose --out results
//   layerprobe compare  --out table a/profile.json b/profile.json ...
//   layerprobe synth    --out demo_run
//
// Errors are printed to stdout as JSON; exit codes: 1 usage/input error,
// 2 manifest validation failure, 3 probe training failure, 4 partial profile.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "layerprobe/pipeline.hpp"
#include "layerprobe/synthetic.hpp"

namespace fs = std::filesystem;
namespace pl = layerprobe::pipeline;

namespace {

struct CommonOptions {
    std::string manifest;
    std::string config;
    std::uint64_t seed = 0;
    bool seed_set = false;
    unsigned jobs = 1;
    std::string metric;
    std::string out = ".";
};

pl::RunConfig effective_config(const CommonOptions& o) {
    pl::RunConfig c = o.config.empty() ? pl::RunConfig{} : pl::load_run_config(o.config);
    if (o.seed_set) c.probe.seed = o.seed;
    if (!o.metric.empty()) {
        auto b = layerprobe::parse_metric_basis(o.metric);
        if (!b) throw layerprobe::ManifestError("unknown --metric \"" + o.metric + "\"");
        c.metric_basis = *b;
    }
    return c;
}

int report(const pl::StageResult& r) {
    if (r.exit_code == pl::kOk) {
        std::cout << r.summary;
    } else {
        std::cerr << r.summary;
        std::cout << r.error.dump(2) << "\n";
    }
    return r.exit_code;
}

int fail(const std::string& code, const std::string& message) {
    std::cout << pl::error_json(code, message).dump(2) << "\n";
    return pl::kUsageError;
}

layerprobe::SyntheticSpec demo_spec() {
    using layerprobe::Aggregation;
    using layerprobe::Module;
    layerprobe::SyntheticSpec spec;
    spec.modules = {
        {Module::V, Aggregation::mean_image_tokens, {0.15, 0.35, 0.6, 1.0, 1.0, 0.95, 1.0, 1.0}},
        {Module::C, Aggregation::mean_image_tokens, {0.9, 0.85}},
        {Module::L, Aggregation::mean_image_tokens, {0.4, 0.55, 0.7, 0.8, 0.8, 0.75}},
        {Module::L, Aggregation::last_input_token, {0.1, 0.3, 0.5, 0.7, 0.8, 0.8}},
    };
    spec.final_accuracy = 0.85;
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"layerprobe: layer-wise probing and feature health diagnostics"};
    app.require_subcommand(1);

    CommonOptions o;
    std::string results_path, profile_path;
    std::vector<std::string> profiles;

    auto add_out = [&](CLI::App* sub) { sub->add_option("--out", o.out, "Output directory")->capture_default_str(); };
    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Run configuration JSON (probe, fhs, diagnose, metric)");
        sub->add_option("--metric", o.metric, "Curve metric: accuracy|f1|precision|recall|auc");
    };

    auto* validate = app.add_subcommand("validate", "Check a run manifest and its feature dumps");
    validate->add_option("--manifest", o.manifest, "Run manifest JSON")->required();

    auto* probe = app.add_subcommand("probe", "Train probes at every site and write layer_results.{json,csv}");
    probe->add_option("--manifest", o.manifest, "Run manifest JSON")->required();
    auto* seed_opt = probe->add_option("--seed", o.seed, "Base seed for probe training");
    probe->add_option("--jobs", o.jobs, "Sites probed in parallel")->capture_default_str()->check(CLI::PositiveNumber);
    add_config(probe);
    add_out(probe);

    auto* fhs = app.add_subcommand("fhs", "Build module curves and the four-score profile");
    fhs->add_option("--manifest", o.manifest, "Run manifest JSON")->required();
    fhs->add_option("--results", results_path, "layer_results.json (default: <out>/layer_results.json)");
    add_config(fhs);
    add_out(fhs);

    auto* diag = app.add_subcommand("diagnose", "Tag curve shapes, failure modes and the comprehension gap");
    diag->add_option("--profile", profile_path, "profile.json (default: <out>/profile.json)");
    add_config(diag);
    add_out(diag);

    auto* compare = app.add_subcommand("compare", "Tabulate several profiles");
    compare->add_option("profiles", profiles, "profile.json files")->required()->check(CLI::ExistingFile);
    add_out(compare);

    auto* synth = app.add_subcommand("synth", "Write a small planted-signal demo run");
    std::uint64_t synth_seed = 7;
    synth->add_option("--seed", synth_seed, "Data seed")->capture_default_str();
    add_out(synth);

    CLI11_PARSE(app, argc, argv);
    o.seed_set = seed_opt->count() > 0;

    try {
        if (*validate) {
            auto r = pl::run_validate(o.manifest);
            std::cout << (r.exit_code == pl::kOk ? r.summary : r.error.dump(2) + "\n");
            return r.exit_code;
        }
        if (*probe) return report(pl::run_probe(o.manifest, effective_config(o), o.out, o.jobs));
        if (*fhs) {
            const fs::path results = results_path.empty() ? fs::path(o.out) / "layer_results.json" : fs::path(results_path);
            return report(pl::run_fhs(results, o.manifest, effective_config(o), o.out));
        }
        if (*diag) {
            const fs::path profile = profile_path.empty() ? fs::path(o.out) / "profile.json" : fs::path(profile_path);
            return report(pl::run_diagnose(profile, effective_config(o), o.out));
        }
        if (*compare) {
            std::vector<fs::path> paths(profiles.begin(), profiles.end());
            return report(pl::run_compare(paths, o.out));
        }
        if (*synth) {
            auto spec = demo_spec();
            spec.seed = synth_seed;
            layerprobe::write_synthetic_run(spec, o.out);
            std::cout << "wrote " << (fs::path(o.out) / "manifest.json").string() << "\n";
            return pl::kOk;
        }
    } catch (const layerprobe::ManifestError& e) {
        return fail("invalid_input", e.what());
    } catch (const layerprobe::FormatError& e) {
        return fail("io_error", e.what());
    } catch (const layerprobe::ContractViolation& e) {
        return fail("invalid_input", e.what());
    } catch (const std::exception& e) {
        return fail("internal_error", e.what());
    }
    return pl::kUsageError;
}
