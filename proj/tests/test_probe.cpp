#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "layerprobe/probe.hpp"
#include "layerprobe/synthetic.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace layerprobe;
using fixtures::Dataset;
using fixtures::gaussian_clusters;
using fixtures::halves;
using fixtures::rows;

namespace {

// 1-d input, 2 hidden units relu(x) and relu(-x); `flip` swaps which class each unit votes for.
TrainedProbe sign_probe(bool flip) {
    TrainedProbe p{MlpProbe(1, 2, 2), {}, 0, {}};
    auto& m = p.model;
    m.w1()[0] = 1.0;
    m.w1()[1] = -1.0;
    const double s = flip ? -100.0 : 100.0;
    // class 0 logit follows relu(-x), class 1 follows relu(x)
    m.w2()[0] = 0.0;
    m.w2()[1] = s;
    m.w2()[2] = s;
    m.w2()[3] = 0.0;
    return p;
}

}  // namespace

TEST(Schedule, WarmupEndpointIsBaseLr) {
    // w = floor(0.05 * 100) = 5
    EXPECT_NEAR(cosine_warmup_lr(4, 100, 0.05, 1e-4), 1e-4, 1e-12);
    EXPECT_NEAR(cosine_warmup_lr(0, 100, 0.05, 1e-4), 2e-5, 1e-12);
    // first post-warmup step starts the cosine at its peak
    EXPECT_NEAR(cosine_warmup_lr(5, 100, 0.05, 1e-4), 1e-4, 1e-12);
}

TEST(Schedule, CosineMidpointIsHalf) {
    // w = 10, total - w = 90, midpoint at step 10 + 45
    EXPECT_NEAR(cosine_warmup_lr(55, 100, 0.1, 0.3), 0.15, 1e-12);
    EXPECT_NEAR(cosine_warmup_lr(50, 100, 0.0, 1.0), 0.5, 1e-12);
}

TEST(Schedule, LastStepMatchesIndependentEvaluation) {
    // 1e-4 * 0.5 * (1 + cos(pi * 94/95)), evaluated with 30-digit arithmetic
    const double expected = 2.73371329536992368857e-8;
    EXPECT_NEAR(cosine_warmup_lr(99, 100, 0.05, 1e-4), expected, expected * 1e-12);
}

TEST(Schedule, MonotoneOnEachPhase) {
    for (std::size_t total : {1u, 2u, 7u, 20u, 100u, 1601u}) {
        for (double ratio : {0.0, 0.05, 0.3, 0.9}) {
            const auto w = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(total)));
            for (std::size_t s = 1; s < total; ++s) {
                const double prev = cosine_warmup_lr(s - 1, total, ratio, 1.0);
                const double cur = cosine_warmup_lr(s, total, ratio, 1.0);
                if (s < w) {
                    EXPECT_GE(cur, prev) << total << " " << ratio << " " << s;
                }
                if (s > w) {
                    EXPECT_LE(cur, prev) << total << " " << ratio << " " << s;
                }
            }
        }
    }
}

TEST(Schedule, StepOutOfRangeIsContractViolation) {
    EXPECT_THROW(cosine_warmup_lr(100, 100, 0.05, 1e-4), ContractViolation);
    EXPECT_THROW(cosine_warmup_lr(0, 0, 0.05, 1e-4), ContractViolation);
}

TEST(AdamW, ZeroGradientZeroDecayIsIdentity) {
    std::vector<double> p{1.5, -2.0, 0.25}, g(3, 0.0);
    const auto before = p;
    AdamWState<double> st(3);
    for (int i = 0; i < 10; ++i) adamw_step<double>(p, g, st, 0.1, {0.9, 0.999, 1e-8, 0.0});
    EXPECT_EQ(p, before);
}

TEST(AdamW, OneScalarStepByHand) {
    // m_hat = 1, v_hat = 1 -> p = 1 - 0.1 / (1 + 1e-8)
    std::vector<double> p{1.0}, g{1.0};
    AdamWState<double> st(1);
    adamw_step<double>(p, g, st, 0.1, {0.9, 0.999, 1e-8, 0.0});
    EXPECT_NEAR(p[0], 0.9000000009999999900, 1e-9);
    EXPECT_NEAR(p[0], 0.9, 1e-8);
}

TEST(AdamW, DecoupledDecayShrinksByLrTimesDecay) {
    std::vector<double> p{2.0, -4.0}, g(2, 0.0);
    AdamWState<double> st(2);
    adamw_step<double>(p, g, st, 0.1, {0.9, 0.999, 1e-8, 0.01});
    EXPECT_DOUBLE_EQ(p[0], 2.0 * (1 - 0.001));
    EXPECT_DOUBLE_EQ(p[1], -4.0 * (1 - 0.001));
}

TEST(AdamW, NonFiniteGradientAborts) {
    std::vector<double> p{1.0}, g{std::nan("")};
    AdamWState<double> st(1);
    EXPECT_THROW(adamw_step<double>(p, g, st, 0.1, {}), DivergenceError);
    std::vector<double> g2{1.0, 2.0};
    EXPECT_THROW(adamw_step<double>(p, g2, st, 0.1, {}), ContractViolation);
}

TEST(TrainProbe, SeparableClustersReachHighAccuracy) {
    // 200 per class to train on, an independent draw of the same size to test on
    const auto [train, test] = halves(gaussian_clusters(400, 32, 6.0, 42));
    // a linear oracle confirms the data really is separable at this level
    ASSERT_GE(oracle::nearest_centroid_accuracy(rows(train.x), train.y, rows(test.x), test.y, 2), 0.99);
    ProbeConfig cfg;
    const auto probe = train_probe(train.x, train.y, 2, cfg, 1);
    EXPECT_GE(evaluate_probe(probe, test.x, test.y).accuracy, 0.99);
    EXPECT_LT(probe.loss_trace.back(), probe.loss_trace.front());
    EXPECT_EQ(probe.loss_trace.size(), 20u);
    EXPECT_EQ(probe.model.hidden_dim(), 32u);
}

TEST(TrainProbe, InseparableDataStaysNearChance) {
    // every sample has the same feature vector
    Dataset ds{FeatureTensor(200, 4, std::vector<float>(800, 0.5f)), {}};
    for (int i = 0; i < 200; ++i) ds.y.push_back(i % 2);
    const auto [train, test] = halves(ds);
    ProbeConfig cfg;
    cfg.epochs = 5;
    double mean = 0;
    for (int r = 0; r < 2; ++r) mean += evaluate_probe(train_probe(train.x, train.y, 2, cfg, r), test.x, test.y).accuracy;
    mean /= 2;
    EXPECT_NEAR(mean, 0.5, 0.15);
}

TEST(TrainProbe, DeterministicForSameSeed) {
    const auto ds = gaussian_clusters(30, 8, 2.0, 3);
    ProbeConfig cfg;
    cfg.epochs = 4;
    const auto a = train_probe(ds.x, ds.y, 2, cfg, 17);
    const auto b = train_probe(ds.x, ds.y, 2, cfg, 17);
    EXPECT_EQ(a.loss_trace, b.loss_trace);
    EXPECT_TRUE(std::equal(a.model.params().begin(), a.model.params().end(), b.model.params().begin()));
    const auto c = train_probe(ds.x, ds.y, 2, cfg, 18);
    EXPECT_NE(a.loss_trace, c.loss_trace);
}

TEST(TrainProbe, ContractChecks) {
    const auto ds = gaussian_clusters(5, 3, 2.0, 3);
    ProbeConfig cfg;
    EXPECT_THROW(train_probe(ds.x, ds.y, 1, cfg, 0), ContractViolation);
    cfg.dropout = 1.0;
    EXPECT_THROW(train_probe(ds.x, ds.y, 2, cfg, 0), ContractViolation);
    cfg = {};
    std::vector<int> short_labels(ds.y.begin(), ds.y.end() - 1);
    EXPECT_THROW(train_probe(ds.x, short_labels, 2, cfg, 0), ContractViolation);
}

TEST(TrainProbe, DivergenceIsReported) {
    auto ds = gaussian_clusters(10, 3, 2.0, 3);
    for (float& v : ds.x.data()) v *= 3e37f;
    ProbeConfig cfg;
    cfg.learning_rate = 1e30;
    cfg.warmup_ratio = 0.0;
    try {
        train_probe(ds.x, ds.y, 2, cfg, 0);
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        EXPECT_GE(e.last_finite_epoch(), 0);
        EXPECT_LT(e.last_finite_epoch(), cfg.epochs);
    }
}

TEST(TrainProbe, HiddenDimDefaultIsCappedAt512) {
    ProbeConfig cfg;
    EXPECT_EQ(cfg.effective_hidden_dim(4096), 512u);
    EXPECT_EQ(cfg.effective_hidden_dim(64), 64u);
    cfg.hidden_dim = 7;
    EXPECT_EQ(cfg.effective_hidden_dim(4096), 7u);
}

TEST(EvaluateProbe, PerfectAndInvertedSurrogates) {
    FeatureTensor x(2, 1, {-5.0f, 5.0f});
    const std::vector<int> y{0, 1};
    EXPECT_EQ(evaluate_probe(sign_probe(false), x, y).accuracy, 1.0);
    EXPECT_EQ(evaluate_probe(sign_probe(false), x, y).auc, 1.0);
    EXPECT_EQ(evaluate_probe(sign_probe(true), x, y).accuracy, 0.0);
}

TEST(EvaluateProbe, AccuracyMatchesBruteForceRecount) {
    const auto ds = gaussian_clusters(40, 6, 1.0, 8);
    ProbeConfig cfg;
    cfg.epochs = 2;
    const auto probe = train_probe(ds.x, ds.y, 2, cfg, 4);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ds.y.size(); ++i) {
        const auto logits = probe.model.forward(ds.x.row(i));
        const int pred = logits[1] > logits[0] ? 1 : 0;
        hits += pred == ds.y[i];
    }
    EXPECT_EQ(evaluate_probe(probe, ds.x, ds.y).accuracy, static_cast<double>(hits) / ds.y.size());
}

TEST(EvaluateProbe, SingleClassTestSetIsDegenerate) {
    FeatureTensor x(2, 1, {-5.0f, 5.0f});
    EXPECT_THROW(evaluate_probe(sign_probe(false), x, std::vector<int>{1, 1}), DegenerateSplitError);
}

TEST(EvaluateProbe, MulticlassUsesMacroAveraging) {
    SyntheticSpec spec;
    spec.num_classes = 3;
    spec.samples_per_class = 30;
    spec.dim = 8;
    spec.modules = {{Module::V, Aggregation::mean_image_tokens, {1.0}}};
    testutil::TempDir dir;
    const auto m = write_synthetic_run(spec, dir.path());
    ProbeConfig cfg;
    cfg.repeats = 1;
    cfg.epochs = 10;
    cfg.learning_rate = 1e-2;
    const auto metrics = probe_site(read_ftd(dir.path() / m.sites[0].file), m, cfg);
    EXPECT_GT(metrics.accuracy, 0.8);
    EXPECT_GT(metrics.auc, 0.9);
    EXPECT_LE(metrics.f1, 1.0);
}

class SweepTest : public ::testing::Test {
protected:
    void SetUp() override {
        spec_.samples_per_class = 40;
        spec_.dim = 8;
        spec_.modules = {{Module::V, Aggregation::mean_image_tokens, {0.2, 0.6, 1.0}},
                         {Module::C, Aggregation::mean_image_tokens, {1.0}},
                         {Module::L, Aggregation::mean_image_tokens, {0.8, 0.5}}};
        manifest_ = write_synthetic_run(spec_, dir_.path());
        cfg_.epochs = 3;
    }

    testutil::TempDir dir_;
    SyntheticSpec spec_;
    RunManifest manifest_;
    ProbeConfig cfg_;
};

TEST_F(SweepTest, OneSiteGivesOneResult) {
    auto m = manifest_;
    m.sites.resize(1);
    const auto r = probe_site_sweep(m, dir_.path(), cfg_);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_FALSE(r[0].error);
    EXPECT_EQ(r[0].repeats, 2);
}

TEST_F(SweepTest, IdenticalFeaturesGiveIdenticalMetrics) {
    auto m = manifest_;
    m.sites = {{"a", Module::V, 0, Aggregation::mean_image_tokens, manifest_.sites[1].file},
               {"b", Module::V, 1, Aggregation::mean_image_tokens, manifest_.sites[1].file}};
    const auto r = probe_site_sweep(m, dir_.path(), cfg_);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r[0].metrics, r[1].metrics);
}

TEST_F(SweepTest, OrderedAndIndependentOfSiteOrderAndJobs) {
    const auto base = probe_site_sweep(manifest_, dir_.path(), cfg_, 1);
    for (std::size_t i = 1; i < base.size(); ++i) EXPECT_FALSE(result_order(base[i], base[i - 1]));
    EXPECT_EQ(base.front().module, Module::V);
    EXPECT_EQ(base.back().module, Module::L);

    auto shuffled = manifest_;
    std::reverse(shuffled.sites.begin(), shuffled.sites.end());
    EXPECT_EQ(probe_site_sweep(shuffled, dir_.path(), cfg_, 1), base);
    EXPECT_EQ(probe_site_sweep(manifest_, dir_.path(), cfg_, 4), base);
}

TEST_F(SweepTest, BadSiteDoesNotAbortOthers) {
    // header is valid so the manifest validates, but the payload holds a NaN
    FeatureTensor t(manifest_.n_samples(), 2);
    std::string bytes = encode_ftd(t);
    const char nan_bits[4] = {'\x00', '\x00', '\xc0', '\x7f'};
    std::copy(nan_bits, nan_bits + 4, bytes.begin() + kFtdHeaderSize);
    write_file_atomic(dir_.path() / "bad.ftd", bytes);
    auto m = manifest_;
    m.sites.push_back({"bad", Module::C, 1, Aggregation::mean_image_tokens, "bad.ftd"});
    const auto r = probe_site_sweep(m, dir_.path(), cfg_, 2);
    std::size_t failed = 0;
    for (const auto& res : r) {
        if (res.error) {
            ++failed;
            EXPECT_EQ(res.site_id, "bad");
            EXPECT_NE(res.error->find("non-finite"), std::string::npos);
        }
    }
    EXPECT_EQ(failed, 1u);
    EXPECT_EQ(r.size(), m.sites.size());
}

TEST_F(SweepTest, InvalidManifestRejected) {
    auto m = manifest_;
    m.sites[0].file = "missing.ftd";
    EXPECT_THROW(probe_site_sweep(m, dir_.path(), cfg_), ManifestError);
}

TEST_F(SweepTest, CsvHasOneRowPerSite) {
    const auto r = probe_site_sweep(manifest_, dir_.path(), cfg_);
    const auto csv = layer_results_to_csv(r);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), static_cast<long>(r.size() + 1));
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "module,layer_index,site_id,accuracy,precision,recall,f1,auc,repeats,seed");
    const auto j = layer_results_to_json(r, cfg_, manifest_);
    EXPECT_EQ(j.at("results").get<std::vector<LayerProbeResult>>(), r);
}
