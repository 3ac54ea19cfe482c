// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cstring>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "layerprobe/diagnose.hpp"
#include "layerprobe/fhs.hpp"
#include "layerprobe/metrics.hpp"
#include "layerprobe/pipeline.hpp"
#include "layerprobe/probe.hpp"
#include "layerprobe/synthetic.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace layerprobe;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool rel_close(double got, double want, double rel) {
    return std::abs(got - want) <= rel * std::max(std::abs(want), 1e-300);
}

void fhs_oracle(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 gen(20240601);
    std::uniform_int_distribution<std::size_t> len(1, 64);
    std::uniform_real_distribution<double> val(0.01, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> v(len(gen));
        for (double& x : v) x = val(gen);
        const ModuleCurve c{Module::L, v};
        const auto want = oracle::direct_health(v, 0.2);
        const double gf = growth_factor(c), vp = volatility_penalty(c);
        const auto h = feature_health_score(c);
        // GF can be 0 exactly; compare it on an absolute floor of 1 instead
        const bool ok = std::abs(gf - want.gf) <= 1e-9 * std::max(1.0, std::abs(want.gf)) &&
                        std::abs(h.gf - want.gf) <= 1e-9 * std::max(1.0, std::abs(want.gf)) &&
                        rel_close(vp, want.vp, 1e-9) && rel_close(h.vp, want.vp, 1e-9) && rel_close(h.fhs, want.fhs, 1e-9);
        if (!ok) o.require(false, "curve " + std::to_string(i));
        worst = std::max(worst, std::abs(h.fhs - want.fhs) / std::max(std::abs(want.fhs), 1e-300));
    }
    const double secs = seconds_since(t0);
    o.require(secs < 5.0, "runtime");
    o.detail << "1000 curves, max rel err fhs " << worst << ", " << secs << " s";
}

void fhs_fixtures(Outcome& o) {
    for (double p : {0.05, 0.5, 0.93}) {
        const auto h = feature_health_score({Module::V, {p, p, p}});
        o.require(h.gf == 0.0 && h.vp == 1.0 && h.fhs == p, "constant curve");
    }
    // independent 30-digit evaluation
    const auto h = feature_health_score({Module::V, {0.5, 0.4, 0.7}});
    o.require(std::abs(h.gf - 0.448044012278317808) <= 1e-6, "gf");
    o.require(std::abs(h.vp - 0.892003061453094372) <= 1e-6, "vp");
    o.require(std::abs(h.fhs - 0.904161784449757163) <= 1e-6, "fhs");

    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> val(0.05, 1.0), scale(0.05, 1.0);
    std::uniform_int_distribution<std::size_t> len(1, 32);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        std::vector<double> v(len(gen));
        for (double& x : v) x = val(gen);
        const double c = scale(gen);
        auto s = v;
        for (double& x : s) x *= c;
        const auto a = feature_health_score({Module::V, v}), b = feature_health_score({Module::V, s});
        worst = std::max({worst, std::abs(a.gf - b.gf), std::abs(a.vp - b.vp), std::abs(c * a.fhs - b.fhs)});
    }
    o.require(worst <= 1e-12, "scale equivariance");
    o.detail << "(gf, vp, fhs) = (" << h.gf << ", " << h.vp << ", " << h.fhs << "), scale max dev " << worst;
}

void metric_brute_force(Outcome& o) {
    std::mt19937_64 gen(99);
    std::uniform_int_distribution<std::size_t> size(2, 12);
    std::uniform_int_distribution<int> level(0, 5);
    int batches = 0;
    while (batches < 200) {
        const std::size_t n = size(gen);
        std::vector<int> truth(n);
        std::vector<double> pos(n), scores;
        for (std::size_t i = 0; i < n; ++i) {
            truth[i] = static_cast<int>(gen() % 2);
            pos[i] = level(gen) / 5.0;  // coarse levels so ties are common
            scores.push_back(1.0 - pos[i]);
            scores.push_back(pos[i]);
        }
        if (std::count(truth.begin(), truth.end(), 1) == 0 || std::count(truth.begin(), truth.end(), 0) == 0) continue;
        const double got = metrics::auc(truth, scores, 2, metrics::AucAveraging::binary).value;
        if (got != oracle::pairwise_auc(pos, truth, 1)) o.require(false, "auc batch " + std::to_string(batches));
        ++batches;
    }
    using metrics::PrfAveraging;
    auto r = metrics::prf1(std::vector<int>{1, 1, 1, 0}, std::vector<int>{1, 0, 1, 1}, 2, PrfAveraging::binary_positive);
    o.require(r.precision == 2.0 / 3.0 && r.recall == 2.0 / 3.0 && r.f1 == 2.0 / 3.0, "prf hand count");
    r = metrics::prf1(std::vector<int>{1, 1, 0}, std::vector<int>{0, 0, 0}, 2, PrfAveraging::binary_positive);
    o.require(r.precision == 0.0 && r.precision_zero_division && r.recall == 0.0 && r.f1 == 0.0, "zero division");
    r = metrics::prf1(std::vector<int>{0, 0, 1, 1, 2}, std::vector<int>{0, 2, 1, 0, 2}, 3, PrfAveraging::macro);
    o.require(r.precision == (0.5 + 1.0 + 0.5) / 3.0 && r.recall == (0.5 + 0.5 + 1.0) / 3.0, "macro hand count");
    o.detail << batches << " AUC batches exact, PRF fixtures exact";
}

void probe_sanity(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    // 200 per class for training, an independent draw of the same size for testing
    const auto [train, test] = fixtures::halves(fixtures::gaussian_clusters(400, 32, 6.0, 2024));
    const double linear = oracle::nearest_centroid_accuracy(fixtures::rows(train.x), train.y, fixtures::rows(test.x),
                                                            test.y, 2);
    ProbeConfig cfg;  // 20 epochs, batch 4, lr 1e-4, warmup 0.05
    double acc = 0.0;
    for (int r = 0; r < cfg.repeats; ++r)
        acc += evaluate_probe(train_probe(train.x, train.y, 2, cfg, cfg.seed + r), test.x, test.y).accuracy;
    acc /= cfg.repeats;
    o.require(acc >= 0.99, "separable accuracy");

    auto shuffled = train;
    std::mt19937_64 gen(5);
    std::shuffle(shuffled.y.begin(), shuffled.y.end(), gen);
    double chance = 0.0;
    for (int r = 0; r < 2; ++r)
        chance += evaluate_probe(train_probe(shuffled.x, shuffled.y, 2, cfg, cfg.seed + r), test.x, test.y).accuracy;
    chance /= 2;
    o.require(chance >= 0.35 && chance <= 0.65, "shuffled accuracy");
    const double secs = seconds_since(t0);
    o.require(secs < 60.0, "runtime");
    o.detail << "separable " << acc << " (linear oracle " << linear << "), shuffled " << chance << ", " << secs << " s";
}

std::vector<double> probe_curve(const SyntheticModule& mod, const fs::path& dir, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    spec.modules = {mod};
    const auto m = write_synthetic_run(spec, dir);
    const auto results = probe_site_sweep(m, dir, ProbeConfig{});
    std::vector<double> curve;
    for (const auto& r : results) curve.push_back(r.metrics.accuracy);
    return curve;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : " ") + format_fixed(x, 3);
    return s;
}

void curve_reconstruction(Outcome& o) {
    testutil::TempDir dir;
    const std::vector<double> planted{0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.7};
    const auto graded = probe_curve({Module::L, Aggregation::mean_image_tokens, planted}, dir.path() / "graded", 11);
    const double rho = oracle::spearman(planted, graded);
    o.require(rho >= 0.9, "spearman");

    const auto rising = probe_curve({Module::V, Aggregation::mean_image_tokens, {0.1, 0.3, 0.5, 1, 1, 1, 1, 1}},
                                    dir.path() / "rising", 12);
    const auto rise_tag = classify_curve_shape({Module::V, rising});
    o.require(rise_tag.tag == Shape::rise_and_fluctuate, "rising tag");

    const auto decaying = probe_curve({Module::L, Aggregation::mean_image_tokens, {1, 0.8, 0.6, 0.4, 0.3, 0.2}},
                                      dir.path() / "decaying", 13);
    const auto decay_tag = classify_curve_shape({Module::L, decaying});
    o.require(decay_tag.tag == Shape::sustained_decline, "decaying tag");

    o.detail << "spearman " << rho << " [" << join(graded) << "]; rising -> " << to_string(rise_tag.tag) << " ["
             << join(rising) << "]; decaying -> " << to_string(decay_tag.tag) << " [" << join(decaying) << "]";
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(LAYERPROBE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void determinism(Outcome& o) {
    testutil::TempDir dir;
    const auto run = dir.path() / "run";
    o.require(run_cli("synth --out " + run.string()) == 0, "synth");
    const std::string manifest = (run / "manifest.json").string();
    auto pipeline = [&](const fs::path& out, unsigned jobs) {
        return run_cli("probe --manifest " + manifest + " --seed 3 --jobs " + std::to_string(jobs) + " --out " +
                       out.string()) == 0 &&
               run_cli("fhs --manifest " + manifest + " --out " + out.string()) == 0 &&
               run_cli("diagnose --out " + out.string()) == 0;
    };
    const auto a = dir.path() / "a", b = dir.path() / "b", c = dir.path() / "c";
    o.require(pipeline(a, 1), "run a");
    o.require(pipeline(b, 1), "run b");
    o.require(pipeline(c, 4), "run c (jobs 4)");
    const auto sa = testutil::snapshot(a);
    o.require(sa.size() == 6, "six output files");
    o.require(sa == testutil::snapshot(b), "identical across runs");
    o.require(sa == testutil::snapshot(c), "identical across jobs");
    std::size_t bytes = 0;
    for (const auto& [name, content] : sa) bytes += content.size();
    o.detail << sa.size() << " files, " << bytes << " bytes compared across 2 runs and jobs 1/4";
}

void schedule_optimizer(Outcome& o) {
    o.require(std::abs(cosine_warmup_lr(4, 100, 0.05, 1e-4) - 1e-4) <= 1e-12, "end of warmup");
    o.require(std::abs(cosine_warmup_lr(55, 100, 0.1, 0.3) - 0.15) <= 1e-12, "cosine midpoint");
    o.require(std::abs(cosine_warmup_lr(50, 100, 0.0, 1.0) - 0.5) <= 1e-12, "cosine midpoint, no warmup");

    std::vector<double> p{0.3, -1.25}, g(2, 0.0);
    const auto before = p;
    AdamWState<double> st(2);
    for (int i = 0; i < 5; ++i) adamw_step<double>(p, g, st, 0.1, {0.9, 0.999, 1e-8, 0.0});
    o.require(p == before, "zero-gradient fixed point");

    std::vector<double> q{1.0}, gq{1.0};
    AdamWState<double> sq(1);
    adamw_step<double>(q, gq, sq, 0.1, {0.9, 0.999, 1e-8, 0.0});
    // 1 - 0.1 / (1 + 1e-8)
    o.require(std::abs(q[0] - 0.9000000009999999900) <= 1e-9, "one-step update");
    o.detail << "one-step p = " << format_double(q[0]);
}

void format_conformance(Outcome& o) {
    testutil::TempDir dir;
    std::mt19937_64 gen(404);
    std::uniform_int_distribution<std::size_t> n(1, 50), d(1, 300);
    std::uniform_int_distribution<std::uint32_t> bits;
    int exact = 0;
    for (int i = 0; i < 100; ++i) {
        FeatureTensor t(n(gen), d(gen));
        for (float& v : t.data()) {
            // arbitrary finite bit patterns, including denormals and signed zero
            do {
                const std::uint32_t b = bits(gen);
                std::memcpy(&v, &b, 4);
            } while (!std::isfinite(v));
        }
        write_ftd(t, dir.path() / "t.ftd");
        const auto back = read_ftd(dir.path() / "t.ftd");
        exact += back == t;
    }
    o.require(exact == 100, "round trip");
    std::string want = "FTD1";
    want += '\x01';
    want += '\x02';
    want += std::string("\x02\0\0\0\0\0\0\0\x03\0\0\0\0\0\0\0", 16);
    want += std::string(24, '\0');
    o.require(encode_ftd(FeatureTensor(2, 3)) == want, "46-byte fixture");
    o.detail << exact << "/100 bit-exact round trips, fixture " << want.size() << " bytes";
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
        {"fhs_oracle_equivalence", fhs_oracle},
        {"fhs_analytic_fixtures", fhs_fixtures},
        {"metric_brute_force_equivalence", metric_brute_force},
        {"probe_sanity", probe_sanity},
        {"synthetic_curve_reconstruction", curve_reconstruction},
        {"pipeline_determinism", determinism},
        {"schedule_optimizer_checks", schedule_optimizer},
        {"format_conformance", format_conformance},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            fn(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        std::cout << (o.pass ? "PASS  " : "FAIL  ") << name << "  " << o.detail.str() << std::endl;
        failed += !o.pass;
    }
    std::cout << (failed ? std::to_string(failed) + " criterion(s) failed" : std::string("all criteria passed")) << "\n";
    return failed ? 1 : 0;
}
