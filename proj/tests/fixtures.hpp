#ifndef LAYERPROBE_TESTS_FIXTURES_HPP_
#define LAYERPROBE_TESTS_FIXTURES_HPP_

#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "layerprobe/tensor_store.hpp"

namespace fixtures {

struct Dataset {
    layerprobe::FeatureTensor x;
    std::vector<int> y;
};

// Two isotropic unit-variance Gaussian clusters whose means are `separation` apart.
// Labels alternate 0, 1, 0, 1, ...
inline Dataset gaussian_clusters(std::size_t per_class, std::size_t dim, double separation, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> dir(dim);
    double norm = 0;
    for (double& d : dir) {
        d = noise(gen);
        norm += d * d;
    }
    for (double& d : dir) d /= std::sqrt(norm);
    Dataset ds{layerprobe::FeatureTensor(2 * per_class, dim), {}};
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const int y = static_cast<int>(i % 2);
        ds.y.push_back(y);
        const double sign = y == 1 ? 0.5 : -0.5;
        for (std::size_t c = 0; c < dim; ++c) ds.x(i, c) = static_cast<float>(sign * separation * dir[c] + noise(gen));
    }
    return ds;
}

// First half / second half.
inline std::pair<Dataset, Dataset> halves(const Dataset& ds) {
    std::vector<std::size_t> a, b;
    for (std::size_t i = 0; i < ds.y.size(); ++i) (i < ds.y.size() / 2 ? a : b).push_back(i);
    auto pick = [&](const std::vector<std::size_t>& idx) {
        Dataset out{ds.x.gather_rows(idx), {}};
        for (auto i : idx) out.y.push_back(ds.y[i]);
        return out;
    };
    return {pick(a), pick(b)};
}

inline std::vector<std::vector<float>> rows(const layerprobe::FeatureTensor& t) {
    std::vector<std::vector<float>> out;
    for (std::size_t i = 0; i < t.n_samples(); ++i) out.emplace_back(t.row(i).begin(), t.row(i).end());
    return out;
}

}  // namespace fixtures

#endif  // LAYERPROBE_TESTS_FIXTURES_HPP_
