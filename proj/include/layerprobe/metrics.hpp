#ifndef LAYERPROBE_METRICS_HPP_
#define LAYERPROBE_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "layerprobe/error.hpp"

namespace layerprobe::metrics {

// Predicted label meaning "no class" (an unparseable generated answer).
inline constexpr int kNoPrediction = -1;

// Hard and soft predictions for one evaluation set. `scores` is row-major
// n x num_classes, each row a probability vector.
struct PredictionBatch {
    std::vector<int> true_labels;
    std::vector<int> predicted_labels;
    std::vector<double> scores;
    std::size_t num_classes = 0;

    std::size_t size() const noexcept { return true_labels.size(); }
    std::span<const double> row(std::size_t i) const { return {scores.data() + i * num_classes, num_classes}; }

    // Builds a batch whose predictions are the (first) argmax of each score row.
    static PredictionBatch from_scores(std::vector<int> truth, std::vector<double> scores, std::size_t num_classes) {
        PredictionBatch b;
        b.true_labels = std::move(truth);
        b.scores = std::move(scores);
        b.num_classes = num_classes;
        b.predicted_labels.resize(b.true_labels.size());
        if (num_classes == 0 || b.scores.size() != b.true_labels.size() * num_classes)
            throw ContractViolation("PredictionBatch: scores shape does not match labels");
        for (std::size_t i = 0; i < b.size(); ++i) {
            auto r = b.row(i);
            b.predicted_labels[i] = static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
        }
        return b;
    }

    // Throws ContractViolation when any invariant fails.
    void validate(double stochastic_tol = 1e-6) const {
        const std::size_t n = size();
        if (predicted_labels.size() != n) throw ContractViolation("PredictionBatch: predicted/true length mismatch");
        if (num_classes < 2) throw ContractViolation("PredictionBatch: need at least 2 classes");
        if (scores.size() != n * num_classes) throw ContractViolation("PredictionBatch: scores shape mismatch");
        for (std::size_t i = 0; i < n; ++i) {
            if (true_labels[i] < 0 || static_cast<std::size_t>(true_labels[i]) >= num_classes)
                throw ContractViolation("PredictionBatch: true label out of range at " + std::to_string(i));
            auto r = row(i);
            double sum = 0.0;
            for (double s : r) {
                if (!(s >= 0.0 && s <= 1.0)) throw ContractViolation("PredictionBatch: score outside [0,1]");
                sum += s;
            }
            if (std::abs(sum - 1.0) > stochastic_tol)
                throw ContractViolation("PredictionBatch: score row " + std::to_string(i) + " does not sum to 1");
            const double best = *std::max_element(r.begin(), r.end());
            if (predicted_labels[i] < 0 || r[static_cast<std::size_t>(predicted_labels[i])] != best)
                throw ContractViolation("PredictionBatch: predicted label is not an argmax at " + std::to_string(i));
        }
    }
};

inline double accuracy(std::span<const int> truth, std::span<const int> predicted) {
    if (truth.empty()) throw ContractViolation("accuracy: empty batch");
    if (truth.size() != predicted.size()) throw ContractViolation("accuracy: length mismatch");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hits += (truth[i] == predicted[i]);
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

inline double accuracy(const PredictionBatch& b) { return accuracy(b.true_labels, b.predicted_labels); }

enum class PrfAveraging { binary_positive, macro };

struct PrfResult {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // Set when a precision/recall/F1 denominator was zero and 0 was substituted.
    bool precision_zero_division = false;
    bool recall_zero_division = false;
    bool f1_zero_division = false;
};

namespace detail {

struct ClassPrf {
    double precision, recall, f1;
    bool p_zero, r_zero, f_zero;
};

inline ClassPrf class_prf(std::size_t tp, std::size_t fp, std::size_t fn) {
    ClassPrf c{};
    c.p_zero = (tp + fp) == 0;
    c.r_zero = (tp + fn) == 0;
    c.precision = c.p_zero ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    c.recall = c.r_zero ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    c.f_zero = (c.precision + c.recall) == 0.0;
    c.f1 = c.f_zero ? 0.0 : 2.0 * c.precision * c.recall / (c.precision + c.recall);
    return c;
}

}  // namespace detail

// `predicted` may hold kNoPrediction, which never counts as a prediction of any class.
inline PrfResult prf1(std::span<const int> truth, std::span<const int> predicted, std::size_t num_classes,
                      PrfAveraging averaging) {
    if (truth.empty()) throw ContractViolation("prf1: empty batch");
    if (truth.size() != predicted.size()) throw ContractViolation("prf1: length mismatch");
    if (averaging == PrfAveraging::binary_positive && num_classes != 2)
        throw ContractViolation("prf1: binary_positive averaging requires exactly 2 classes");
    if (num_classes < 2) throw ContractViolation("prf1: need at least 2 classes");

    std::vector<std::size_t> tp(num_classes), fp(num_classes), fn(num_classes);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const int t = truth[i], p = predicted[i];
        if (t < 0 || static_cast<std::size_t>(t) >= num_classes) throw ContractViolation("prf1: label out of range");
        if (p != kNoPrediction && (p < 0 || static_cast<std::size_t>(p) >= num_classes))
            throw ContractViolation("prf1: prediction out of range");
        if (t == p) {
            ++tp[static_cast<std::size_t>(t)];
        } else {
            ++fn[static_cast<std::size_t>(t)];
            if (p != kNoPrediction) ++fp[static_cast<std::size_t>(p)];
        }
    }

    PrfResult r;
    if (averaging == PrfAveraging::binary_positive) {
        auto c = detail::class_prf(tp[1], fp[1], fn[1]);
        return {c.precision, c.recall, c.f1, c.p_zero, c.r_zero, c.f_zero};
    }
    for (std::size_t k = 0; k < num_classes; ++k) {
        auto c = detail::class_prf(tp[k], fp[k], fn[k]);
        r.precision += c.precision;
        r.recall += c.recall;
        r.f1 += c.f1;
        r.precision_zero_division |= c.p_zero;
        r.recall_zero_division |= c.r_zero;
        r.f1_zero_division |= c.f_zero;
    }
    const double k = static_cast<double>(num_classes);
    r.precision /= k;
    r.recall /= k;
    r.f1 /= k;
    return r;
}

inline PrfResult prf1(const PredictionBatch& b, PrfAveraging averaging) {
    return prf1(b.true_labels, b.predicted_labels, b.num_classes, averaging);
}

enum class AucAveraging { binary, macro_ovr };

struct AucResult {
    double value = 0.0;
    // One entry per class under macro_ovr (nullopt = skipped); empty for binary.
    std::vector<std::optional<double>> per_class;
    std::vector<std::size_t> skipped_classes;
};

// Mann-Whitney estimate of P(score_pos > score_neg), ties credited 0.5, where
// sample i is positive iff truth[i] == positive_label. Returns nullopt when
// either side is empty.
inline std::optional<double> binary_auc(std::span<const double> scores, std::span<const int> truth, int positive_label) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double n_pos = 0.0, n_neg = 0.0;
    // Sum of 2*rank over positives keeps midranks integral.
    double twice_rank_sum = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        // ranks i+1 .. j, midrank = (i+1+j)/2
        const double twice_midrank = static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            if (truth[order[k]] == positive_label) {
                n_pos += 1.0;
                twice_rank_sum += twice_midrank;
            } else {
                n_neg += 1.0;
            }
        }
        i = j;
    }
    if (n_pos == 0.0 || n_neg == 0.0) return std::nullopt;
    const double twice_u = twice_rank_sum - n_pos * (n_pos + 1.0);
    return (twice_u / 2.0) / (n_pos * n_neg);
}

// Binary averaging ranks column 1 (the positive class).
inline AucResult auc(std::span<const int> truth, std::span<const double> scores, std::size_t num_classes,
                     AucAveraging averaging) {
    const std::size_t n = truth.size();
    if (n == 0) throw ContractViolation("auc: empty batch");
    if (scores.size() != n * num_classes) throw ContractViolation("auc: scores shape mismatch");
    if (averaging == AucAveraging::binary && num_classes != 2)
        throw ContractViolation("auc: binary averaging requires exactly 2 classes");

    std::vector<double> column(n);
    auto one_vs_rest = [&](std::size_t k) {
        for (std::size_t i = 0; i < n; ++i) column[i] = scores[i * num_classes + k];
        return binary_auc(column, truth, static_cast<int>(k));
    };

    AucResult r;
    if (averaging == AucAveraging::binary) {
        auto v = one_vs_rest(1);
        if (!v) throw DegenerateSplitError("auc: binary AUC needs both classes present");
        r.value = *v;
        return r;
    }
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t k = 0; k < num_classes; ++k) {
        auto v = one_vs_rest(k);
        r.per_class.push_back(v);
        if (v) {
            sum += *v;
            ++used;
        } else {
            r.skipped_classes.push_back(k);
        }
    }
    if (used == 0) throw DegenerateSplitError("auc: no class has both positives and negatives");
    r.value = sum / static_cast<double>(used);
    return r;
}

inline AucResult auc(const PredictionBatch& b, AucAveraging averaging) {
    return auc(b.true_labels, b.scores, b.num_classes, averaging);
}

}  // namespace layerprobe::metrics

#endif  // LAYERPROBE_METRICS_HPP_
