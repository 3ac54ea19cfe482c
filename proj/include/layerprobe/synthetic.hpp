#ifndef LAYERPROBE_SYNTHETIC_HPP_
#define LAYERPROBE_SYNTHETIC_HPP_

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "layerprobe/rng.hpp"
#include "layerprobe/tensor_store.hpp"

// Planted-signal runs for demos and tests. Each site's features are
//
//   x = strength * mu_y + noise,  noise ~ N(0, I)
//
// with class means mu_k of norm separation/2 drawn per site, so a larger
// strength means more linearly decodable class signal at that layer.

namespace layerprobe {

struct SyntheticModule {
    Module module = Module::V;
    Aggregation aggregation = Aggregation::mean_image_tokens;
    std::vector<double> strengths;  // one per layer
};

struct SyntheticSpec {
    std::string model_name = "synthetic-mllm";
    std::string dataset_name = "synthetic";
    std::size_t num_classes = 2;
    std::size_t samples_per_class = 400;
    double test_fraction = 0.5;
    std::size_t dim = 32;
    double separation = 6.0;  // distance between class means at strength 1, in noise std units
    std::uint64_t seed = 7;
    std::vector<SyntheticModule> modules;
    // When set, final_predictions are correct with this probability, else a random wrong class.
    std::optional<double> final_accuracy;
};

// Writes manifest.json plus one FTD per site into `dir`; returns the manifest.
inline RunManifest write_synthetic_run(const SyntheticSpec& spec, const std::filesystem::path& dir) {
    Rng rng(derive_seed(spec.seed, 100));
    RunManifest m;
    m.model_name = spec.model_name;
    m.dataset_name = spec.dataset_name;
    for (std::size_t k = 0; k < spec.num_classes; ++k) m.class_names.push_back("class_" + std::to_string(k));

    const auto n_test = static_cast<std::size_t>(std::lround(spec.test_fraction * spec.samples_per_class));
    for (std::size_t i = 0; i < spec.samples_per_class; ++i) {
        for (std::size_t k = 0; k < spec.num_classes; ++k) {
            m.labels.push_back(static_cast<int>(k));
            m.split.push_back(i < spec.samples_per_class - n_test ? Split::train : Split::test);
        }
    }
    const std::size_t n = m.labels.size();

    if (spec.final_accuracy) {
        std::vector<int> preds(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (rng.uniform01() < *spec.final_accuracy) {
                preds[i] = m.labels[i];
            } else {
                const auto shift = 1 + rng.below(spec.num_classes - 1);
                preds[i] = static_cast<int>((static_cast<std::size_t>(m.labels[i]) + shift) % spec.num_classes);
            }
        }
        m.final_predictions = std::move(preds);
    }

    std::filesystem::create_directories(dir);
    for (const auto& mod : spec.modules) {
        for (std::size_t layer = 0; layer < mod.strengths.size(); ++layer) {
            const std::string id = std::string(to_string(mod.module)) + "_" + to_string(mod.aggregation) + "_" +
                                   std::to_string(layer);
            Rng site_rng(derive_seed(derive_seed(spec.seed, static_cast<std::uint64_t>(mod.module) * 1000 +
                                                                static_cast<std::uint64_t>(mod.aggregation) * 100),
                                     layer));
            std::vector<std::vector<double>> means(spec.num_classes, std::vector<double>(spec.dim));
            for (auto& mu : means) {
                double norm = 0.0;
                for (double& c : mu) {
                    c = site_rng.normal();
                    norm += c * c;
                }
                norm = std::sqrt(norm);
                for (double& c : mu) c *= (spec.separation / 2.0) / norm;
            }
            if (spec.num_classes == 2)
                for (std::size_t c = 0; c < spec.dim; ++c) means[1][c] = -means[0][c];

            FeatureTensor t(n, spec.dim);
            const double s = mod.strengths[layer];
            for (std::size_t i = 0; i < n; ++i) {
                const auto& mu = means[static_cast<std::size_t>(m.labels[i])];
                for (std::size_t c = 0; c < spec.dim; ++c)
                    t(i, c) = static_cast<float>(s * mu[c] + site_rng.normal());
            }
            const std::string file = id + ".ftd";
            write_ftd(t, dir / file);
            m.sites.push_back({id, mod.module, layer, mod.aggregation, file});
        }
    }
    save_manifest(m, dir / "manifest.json");
    return m;
}

}  // namespace layerprobe

#endif  // LAYERPROBE_SYNTHETIC_HPP_
