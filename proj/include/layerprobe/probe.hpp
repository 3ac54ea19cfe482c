#ifndef LAYERPROBE_PROBE_HPP_
#define LAYERPROBE_PROBE_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "layerprobe/error.hpp"
#include "layerprobe/io_util.hpp"
#include "layerprobe/metrics.hpp"
#include "layerprobe/rng.hpp"
#include "layerprobe/tensor_store.hpp"

namespace layerprobe {

struct ProbeConfig {
    std::size_t hidden_dim = 0;  // 0 selects min(512, input_dim)
    double dropout = 0.1;
    double learning_rate = 1e-4;
    double weight_decay = 0.01;
    int epochs = 20;
    std::size_t batch_size = 4;
    double warmup_ratio = 0.05;
    int repeats = 2;
    std::uint64_t seed = 0;

    std::size_t effective_hidden_dim(std::size_t input_dim) const {
        return hidden_dim > 0 ? hidden_dim : std::min<std::size_t>(512, input_dim);
    }

    void validate() const {
        if (!(dropout >= 0.0 && dropout < 1.0)) throw ContractViolation("ProbeConfig: dropout must be in [0,1)");
        if (!(learning_rate > 0.0)) throw ContractViolation("ProbeConfig: learning_rate must be > 0");
        if (!(weight_decay >= 0.0)) throw ContractViolation("ProbeConfig: weight_decay must be >= 0");
        if (epochs < 1) throw ContractViolation("ProbeConfig: epochs must be >= 1");
        if (batch_size < 1) throw ContractViolation("ProbeConfig: batch_size must be >= 1");
        if (!(warmup_ratio >= 0.0 && warmup_ratio < 1.0)) throw ContractViolation("ProbeConfig: warmup_ratio must be in [0,1)");
        if (repeats < 1) throw ContractViolation("ProbeConfig: repeats must be >= 1");
    }

    friend bool operator==(const ProbeConfig&, const ProbeConfig&) = default;
};

inline void to_json(nlohmann::json& j, const ProbeConfig& c) {
    j = nlohmann::json{{"hidden_dim", c.hidden_dim},     {"dropout", c.dropout},
                       {"learning_rate", c.learning_rate}, {"weight_decay", c.weight_decay},
                       {"epochs", c.epochs},             {"batch_size", c.batch_size},
                       {"warmup_ratio", c.warmup_ratio}, {"repeats", c.repeats},
                       {"seed", c.seed}};
}

// Missing keys keep their defaults.
inline void from_json(const nlohmann::json& j, ProbeConfig& c) {
    c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
    c.dropout = j.value("dropout", c.dropout);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.warmup_ratio = j.value("warmup_ratio", c.warmup_ratio);
    c.repeats = j.value("repeats", c.repeats);
    c.seed = j.value("seed", c.seed);
}

// Linear warmup over the first floor(warmup_ratio * total_steps) steps, then
// half-cosine decay to zero.
inline double cosine_warmup_lr(std::size_t step, std::size_t total_steps, double warmup_ratio, double base_lr) {
    if (total_steps < 1 || step >= total_steps)
        throw ContractViolation("cosine_warmup_lr: step " + std::to_string(step) + " outside [0, " +
                                std::to_string(total_steps) + ")");
    const auto warmup = static_cast<std::size_t>(std::floor(warmup_ratio * static_cast<double>(total_steps)));
    if (step < warmup) return base_lr * static_cast<double>(step + 1) / static_cast<double>(warmup);
    const double span = static_cast<double>(std::max<std::size_t>(1, total_steps - warmup));
    return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(step - warmup) / span));
}

struct AdamWOptions {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

template <typename T>
struct AdamWState {
    std::vector<T> m;
    std::vector<T> v;
    std::uint64_t step = 0;

    explicit AdamWState(std::size_t n = 0) : m(n, T(0)), v(n, T(0)) {}
};

// One decoupled-weight-decay Adam update, in place.
template <typename T>
void adamw_step(std::span<T> params, std::span<const T> grads, AdamWState<T>& state, T lr, const AdamWOptions& opt) {
    if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size())
        throw ContractViolation("adamw_step: parameter, gradient and state sizes differ");
    for (T g : grads)
        if (!std::isfinite(g)) throw DivergenceError("adamw_step: non-finite gradient", 0);
    state.step += 1;
    const T b1 = static_cast<T>(opt.beta1), b2 = static_cast<T>(opt.beta2);
    const T bias1 = T(1) - std::pow(b1, static_cast<T>(state.step));
    const T bias2 = T(1) - std::pow(b2, static_cast<T>(state.step));
    const T eps = static_cast<T>(opt.eps), wd = static_cast<T>(opt.weight_decay);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const T g = grads[i];
        state.m[i] = b1 * state.m[i] + (T(1) - b1) * g;
        state.v[i] = b2 * state.v[i] + (T(1) - b2) * g * g;
        const T m_hat = state.m[i] / bias1;
        const T v_hat = state.v[i] / bias2;
        params[i] -= lr * (m_hat / (std::sqrt(v_hat) + eps) + wd * params[i]);
    }
}

// Two-layer MLP head: logits = W2 * dropout(relu(W1 x + b1)) + b2.
// Parameters live in one flat vector: W1 (hidden x input, row per hidden
// unit), b1, W2 (classes x hidden), b2.
class MlpProbe {
public:
    MlpProbe() = default;

    MlpProbe(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_classes)
        : input_dim_(input_dim), hidden_dim_(hidden_dim), num_classes_(num_classes),
          params_(hidden_dim * input_dim + hidden_dim + num_classes * hidden_dim + num_classes, 0.0) {}

    // Uniform(+-sqrt(1/fan_in)) weights, zero biases.
    void initialize(Rng& rng) {
        const double a1 = std::sqrt(1.0 / static_cast<double>(input_dim_));
        const double a2 = std::sqrt(1.0 / static_cast<double>(hidden_dim_));
        for (double& w : w1()) w = rng.uniform(-a1, a1);
        for (double& w : w2()) w = rng.uniform(-a2, a2);
        std::fill(b1().begin(), b1().end(), 0.0);
        std::fill(b2().begin(), b2().end(), 0.0);
    }

    std::size_t input_dim() const noexcept { return input_dim_; }
    std::size_t hidden_dim() const noexcept { return hidden_dim_; }
    std::size_t num_classes() const noexcept { return num_classes_; }

    std::span<double> params() noexcept { return params_; }
    std::span<const double> params() const noexcept { return params_; }

    std::span<double> w1() { return {params_.data(), hidden_dim_ * input_dim_}; }
    std::span<double> b1() { return {params_.data() + off_b1(), hidden_dim_}; }
    std::span<double> w2() { return {params_.data() + off_w2(), num_classes_ * hidden_dim_}; }
    std::span<double> b2() { return {params_.data() + off_b2(), num_classes_}; }

    // Evaluation-mode forward pass (no dropout).
    std::vector<double> forward(std::span<const float> x) const {
        if (x.size() != input_dim_) throw ContractViolation("MlpProbe::forward: input has wrong length");
        std::vector<double> xd(x.begin(), x.end());
        std::vector<double> hidden(hidden_dim_), logits(num_classes_);
        hidden_layer(xd, hidden);
        output_layer(hidden, logits);
        return logits;
    }

    std::vector<double> predict_proba(std::span<const float> x) const {
        auto p = forward(x);
        softmax_inplace(p);
        return p;
    }

    static void softmax_inplace(std::span<double> z) {
        const double mx = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (double& v : z) sum += (v = std::exp(v - mx));
        for (double& v : z) v /= sum;
    }

    // Relu(W1 x + b1); pre-dropout.
    void hidden_layer(std::span<const double> x, std::span<double> hidden) const {
        const double* w = params_.data();
        const double* b = params_.data() + off_b1();
        for (std::size_t j = 0; j < hidden_dim_; ++j) {
            const double* row = w + j * input_dim_;
            double acc = b[j];
            for (std::size_t d = 0; d < input_dim_; ++d) acc += row[d] * x[d];
            hidden[j] = acc > 0.0 ? acc : 0.0;
        }
    }

    void output_layer(std::span<const double> hidden, std::span<double> logits) const {
        const double* w = params_.data() + off_w2();
        const double* b = params_.data() + off_b2();
        for (std::size_t k = 0; k < num_classes_; ++k) {
            const double* row = w + k * hidden_dim_;
            double acc = b[k];
            for (std::size_t j = 0; j < hidden_dim_; ++j) acc += row[j] * hidden[j];
            logits[k] = acc;
        }
    }

    std::size_t off_b1() const noexcept { return hidden_dim_ * input_dim_; }
    std::size_t off_w2() const noexcept { return off_b1() + hidden_dim_; }
    std::size_t off_b2() const noexcept { return off_w2() + num_classes_ * hidden_dim_; }

private:
    std::size_t input_dim_ = 0;
    std::size_t hidden_dim_ = 0;
    std::size_t num_classes_ = 0;
    std::vector<double> params_;
};

struct TrainedProbe {
    MlpProbe model;
    ProbeConfig config;
    std::uint64_t seed = 0;
    std::vector<double> loss_trace;  // mean training loss per epoch
};

namespace detail {

enum : std::uint64_t { kStreamInit = 1, kStreamDropout = 2, kStreamShuffle = 3 };

}  // namespace detail

// Mini-batch AdamW training of an MlpProbe on frozen features. Deterministic
// in (features, labels, config, seed).
inline TrainedProbe train_probe(const FeatureTensor& features, std::span<const int> labels, std::size_t num_classes,
                                const ProbeConfig& config, std::uint64_t seed) {
    config.validate();
    if (num_classes < 2) throw ContractViolation("train_probe: num_classes must be >= 2");
    const std::size_t n = features.n_samples(), d = features.dim();
    if (labels.size() != n) throw ContractViolation("train_probe: labels length != n_samples");
    for (int y : labels)
        if (y < 0 || static_cast<std::size_t>(y) >= num_classes) throw ContractViolation("train_probe: label out of range");
    features.validate_finite();

    const std::size_t h = config.effective_hidden_dim(d);
    TrainedProbe out{MlpProbe(d, h, num_classes), config, seed, {}};
    MlpProbe& net = out.model;
    {
        Rng init_rng(derive_seed(seed, detail::kStreamInit));
        net.initialize(init_rng);
    }
    Rng dropout_rng(derive_seed(seed, detail::kStreamDropout));

    const std::size_t batch = config.batch_size;
    const std::size_t steps_per_epoch = (n + batch - 1) / batch;
    const std::size_t total_steps = steps_per_epoch * static_cast<std::size_t>(config.epochs);
    const AdamWOptions opt{0.9, 0.999, 1e-8, config.weight_decay};
    AdamWState<double> state(net.params().size());

    std::vector<double> grads(net.params().size());
    std::vector<double> x(d), pre(h), hidden(h), mask(h), logits(num_classes), delta_h(h);
    std::vector<std::size_t> order(n);
    const double keep = 1.0 - config.dropout;
    const std::size_t off_b1 = net.off_b1(), off_w2 = net.off_w2(), off_b2 = net.off_b2();

    std::size_t step = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        Rng shuffle_rng(derive_seed(derive_seed(seed, detail::kStreamShuffle), static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(std::span<std::size_t>(order));

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += batch, ++step) {
            const std::size_t stop = std::min(n, start + batch);
            const double inv_b = 1.0 / static_cast<double>(stop - start);
            std::fill(grads.begin(), grads.end(), 0.0);
            double batch_loss = 0.0;
            const auto params = net.params();

            for (std::size_t s = start; s < stop; ++s) {
                const std::size_t idx = order[s];
                auto row = features.row(idx);
                std::copy(row.begin(), row.end(), x.begin());
                net.hidden_layer(x, pre);
                for (std::size_t j = 0; j < h; ++j) {
                    mask[j] = config.dropout > 0.0 ? (dropout_rng.uniform01() < keep ? 1.0 / keep : 0.0) : 1.0;
                    hidden[j] = pre[j] * mask[j];
                }
                net.output_layer(hidden, logits);
                MlpProbe::softmax_inplace(logits);
                const auto y = static_cast<std::size_t>(labels[idx]);
                batch_loss += -std::log(std::max(logits[y], 1e-300));

                // dL/dlogits = softmax - onehot
                logits[y] -= 1.0;
                std::fill(delta_h.begin(), delta_h.end(), 0.0);
                for (std::size_t k = 0; k < num_classes; ++k) {
                    const double g = logits[k] * inv_b;
                    grads[off_b2 + k] += g;
                    double* gw = grads.data() + off_w2 + k * h;
                    const double* w = params.data() + off_w2 + k * h;
                    for (std::size_t j = 0; j < h; ++j) {
                        gw[j] += g * hidden[j];
                        delta_h[j] += g * w[j];
                    }
                }
                for (std::size_t j = 0; j < h; ++j) {
                    if (pre[j] <= 0.0 || mask[j] == 0.0) continue;
                    const double g = delta_h[j] * mask[j];
                    grads[off_b1 + j] += g;
                    double* gw = grads.data() + j * d;
                    for (std::size_t c = 0; c < d; ++c) gw[c] += g * x[c];
                }
            }

            batch_loss *= inv_b;
            if (!std::isfinite(batch_loss))
                throw DivergenceError("train_probe: non-finite loss in epoch " + std::to_string(epoch + 1), epoch);
            epoch_loss += batch_loss;
            const double lr = cosine_warmup_lr(step, total_steps, config.warmup_ratio, config.learning_rate);
            try {
                adamw_step<double>(net.params(), grads, state, lr, opt);
            } catch (const DivergenceError&) {
                throw DivergenceError("train_probe: non-finite gradient in epoch " + std::to_string(epoch + 1), epoch);
            }
        }
        out.loss_trace.push_back(epoch_loss / static_cast<double>(steps_per_epoch));
    }
    for (double p : net.params())
        if (!std::isfinite(p)) throw DivergenceError("train_probe: non-finite weights after training", config.epochs);
    return out;
}

enum class MetricBasis { accuracy, precision, recall, f1, auc };

NLOHMANN_JSON_SERIALIZE_ENUM(MetricBasis, {{MetricBasis::accuracy, "accuracy"},
                                           {MetricBasis::precision, "precision"},
                                           {MetricBasis::recall, "recall"},
                                           {MetricBasis::f1, "f1"},
                                           {MetricBasis::auc, "auc"}})

inline const char* to_string(MetricBasis b) {
    switch (b) {
        case MetricBasis::accuracy: return "accuracy";
        case MetricBasis::precision: return "precision";
        case MetricBasis::recall: return "recall";
        case MetricBasis::f1: return "f1";
        case MetricBasis::auc: return "auc";
    }
    return "?";
}

inline std::optional<MetricBasis> parse_metric_basis(std::string_view s) {
    for (auto b : {MetricBasis::accuracy, MetricBasis::precision, MetricBasis::recall, MetricBasis::f1, MetricBasis::auc})
        if (s == to_string(b)) return b;
    return std::nullopt;
}

struct MetricSet {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double auc = 0.0;
    bool zero_division = false;  // some precision/recall/F1 term was undefined and set to 0

    double get(MetricBasis b) const {
        switch (b) {
            case MetricBasis::accuracy: return accuracy;
            case MetricBasis::precision: return precision;
            case MetricBasis::recall: return recall;
            case MetricBasis::f1: return f1;
            case MetricBasis::auc: return auc;
        }
        return accuracy;
    }

    friend bool operator==(const MetricSet&, const MetricSet&) = default;
};

inline void to_json(nlohmann::json& j, const MetricSet& m) {
    j = nlohmann::json{{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall},
                       {"f1", m.f1},             {"auc", m.auc},             {"zero_division", m.zero_division}};
}

inline void from_json(const nlohmann::json& j, MetricSet& m) {
    m.accuracy = j.at("accuracy").get<double>();
    m.precision = j.at("precision").get<double>();
    m.recall = j.at("recall").get<double>();
    m.f1 = j.at("f1").get<double>();
    m.auc = j.at("auc").get<double>();
    m.zero_division = j.value("zero_division", false);
}

// Binary tasks: positive-class (class 1) P/R/F1 and AUC. Multiclass: macro
// P/R/F1 and macro one-vs-rest AUC.
inline MetricSet metrics_for(const metrics::PredictionBatch& batch) {
    const bool binary = batch.num_classes == 2;
    const auto prf = metrics::prf1(batch, binary ? metrics::PrfAveraging::binary_positive : metrics::PrfAveraging::macro);
    const auto auc = metrics::auc(batch, binary ? metrics::AucAveraging::binary : metrics::AucAveraging::macro_ovr);
    return MetricSet{metrics::accuracy(batch), prf.precision, prf.recall, prf.f1, auc.value,
                     prf.precision_zero_division || prf.recall_zero_division || prf.f1_zero_division};
}

inline metrics::PredictionBatch predict_batch(const MlpProbe& model, const FeatureTensor& features,
                                              std::span<const int> labels) {
    std::vector<double> scores;
    scores.reserve(features.n_samples() * model.num_classes());
    for (std::size_t i = 0; i < features.n_samples(); ++i) {
        auto p = model.predict_proba(features.row(i));
        scores.insert(scores.end(), p.begin(), p.end());
    }
    return metrics::PredictionBatch::from_scores(std::vector<int>(labels.begin(), labels.end()), std::move(scores),
                                                 model.num_classes());
}

inline MetricSet evaluate_probe(const TrainedProbe& probe, const FeatureTensor& test_features,
                                std::span<const int> test_labels) {
    if (test_labels.size() != test_features.n_samples())
        throw ContractViolation("evaluate_probe: labels length != n_samples");
    if (test_labels.empty()) throw DegenerateSplitError("evaluate_probe: empty test set");
    if (std::all_of(test_labels.begin(), test_labels.end(), [&](int y) { return y == test_labels.front(); }))
        throw DegenerateSplitError("evaluate_probe: test set contains a single class");
    return metrics_for(predict_batch(probe.model, test_features, test_labels));
}

// ---------------------------------------------------------------------------
// Site sweep
// ---------------------------------------------------------------------------

struct LayerProbeResult {
    std::string site_id;
    Module module = Module::V;
    std::size_t layer_index = 0;
    Aggregation aggregation = Aggregation::mean_image_tokens;
    MetricSet metrics;  // mean over repeats
    int repeats = 0;
    std::uint64_t seed = 0;
    std::optional<std::string> error;

    friend bool operator==(const LayerProbeResult&, const LayerProbeResult&) = default;
};

inline void to_json(nlohmann::json& j, const LayerProbeResult& r) {
    j = nlohmann::json{{"site_id", r.site_id},         {"module", r.module},   {"layer_index", r.layer_index},
                       {"aggregation", r.aggregation}, {"repeats", r.repeats}, {"seed", r.seed}};
    if (r.error) {
        j["error"] = *r.error;
        j["metrics"] = nullptr;
    } else {
        j["metrics"] = r.metrics;
    }
}

inline void from_json(const nlohmann::json& j, LayerProbeResult& r) {
    r.site_id = j.at("site_id").get<std::string>();
    r.module = j.at("module").get<Module>();
    r.layer_index = j.at("layer_index").get<std::size_t>();
    r.aggregation = j.at("aggregation").get<Aggregation>();
    r.repeats = j.at("repeats").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("error") && !j.at("error").is_null()) r.error = j.at("error").get<std::string>();
    if (!r.error) r.metrics = j.at("metrics").get<MetricSet>();
}

inline bool result_order(const LayerProbeResult& a, const LayerProbeResult& b) {
    return std::tie(a.module, a.layer_index, a.aggregation, a.site_id) <
           std::tie(b.module, b.layer_index, b.aggregation, b.site_id);
}

// Trains config.repeats probes (seeds seed+0 .. seed+repeats-1) and averages their metrics.
inline MetricSet probe_site(const FeatureTensor& features, const RunManifest& manifest, const ProbeConfig& config) {
    if (features.n_samples() != manifest.n_samples())
        throw ValidationError("feature rows (" + std::to_string(features.n_samples()) + ") != manifest samples (" +
                              std::to_string(manifest.n_samples()) + ")");
    const auto train_idx = manifest.indices_of(Split::train);
    const auto test_idx = manifest.indices_of(Split::test);
    std::vector<int> train_y, test_y;
    for (auto i : train_idx) train_y.push_back(manifest.labels[i]);
    for (auto i : test_idx) test_y.push_back(manifest.labels[i]);
    const auto train_x = features.gather_rows(train_idx);
    const auto test_x = features.gather_rows(test_idx);

    MetricSet mean;
    for (int r = 0; r < config.repeats; ++r) {
        const auto probe = train_probe(train_x, train_y, manifest.num_classes(), config,
                                       config.seed + static_cast<std::uint64_t>(r));
        const auto m = evaluate_probe(probe, test_x, test_y);
        mean.accuracy += m.accuracy;
        mean.precision += m.precision;
        mean.recall += m.recall;
        mean.f1 += m.f1;
        mean.auc += m.auc;
        mean.zero_division |= m.zero_division;
    }
    const double k = static_cast<double>(config.repeats);
    mean.accuracy /= k;
    mean.precision /= k;
    mean.recall /= k;
    mean.f1 /= k;
    mean.auc /= k;
    return mean;
}

// Probes every site of a validated manifest. Per-site failures are recorded in
// LayerProbeResult::error and do not stop other sites. Output order is
// (module, layer_index, aggregation, site_id) regardless of `jobs`.
inline std::vector<LayerProbeResult> probe_site_sweep(const RunManifest& manifest, const std::filesystem::path& base_dir,
                                                      const ProbeConfig& config, unsigned jobs = 1) {
    config.validate();
    const auto report = validate_manifest(manifest, base_dir);
    if (!report.ok())
        throw ManifestError("probe_site_sweep: manifest fails validation (" + report.violations.front().code + ": " +
                            report.violations.front().message + ")");

    std::vector<LayerProbeResult> results(manifest.sites.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < manifest.sites.size(); i = next++) {
            const auto& site = manifest.sites[i];
            LayerProbeResult& r = results[i];
            r.site_id = site.site_id;
            r.module = site.module;
            r.layer_index = site.layer_index;
            r.aggregation = site.aggregation;
            r.repeats = config.repeats;
            r.seed = config.seed;
            try {
                r.metrics = probe_site(read_ftd(base_dir / site.file), manifest, config);
            } catch (const std::exception& e) {
                r.error = e.what();
            }
        }
    };
    jobs = std::clamp<unsigned>(jobs, 1, static_cast<unsigned>(std::max<std::size_t>(1, manifest.sites.size())));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
        worker();
    }
    std::sort(results.begin(), results.end(), result_order);
    return results;
}

inline nlohmann::json layer_results_to_json(const std::vector<LayerProbeResult>& results, const ProbeConfig& config,
                                            const RunManifest& manifest) {
    return nlohmann::json{{"schema_version", 1},
                          {"model_name", manifest.model_name},
                          {"dataset_name", manifest.dataset_name},
                          {"probe_config", config},
                          {"results", results}};
}

// Columns: module, layer_index, site_id, accuracy, precision, recall, f1, auc, repeats, seed.
// Failed sites leave the metric cells empty.
inline std::string layer_results_to_csv(const std::vector<LayerProbeResult>& results) {
    std::string out = "module,layer_index,site_id,accuracy,precision,recall,f1,auc,repeats,seed\n";
    for (const auto& r : results) {
        out += to_string(r.module);
        out += ',' + std::to_string(r.layer_index) + ',' + r.site_id;
        if (r.error) {
            out += ",,,,,";
        } else {
            for (double v : {r.metrics.accuracy, r.metrics.precision, r.metrics.recall, r.metrics.f1, r.metrics.auc})
                out += ',' + format_double(v);
        }
        out += ',' + std::to_string(r.repeats) + ',' + std::to_string(r.seed) + '\n';
    }
    return out;
}

}  // namespace layerprobe

#endif  // LAYERPROBE_PROBE_HPP_
