#include "support.hpp"
#include "zx/errors.hpp"
#include "zx/rules.hpp"
#include "zx/sampler.hpp"

#include <gtest/gtest.h>

namespace zx {
namespace {

/// Mean spider degree with boundary legs excluded.
double spider_degree(const Diagram& d) {
    double sum = 0.0;
    int    n   = 0;
    for (const NodeId v: d.node_ids()) {
        if (!is_spider(d.kind(v))) {
            continue;
        }
        ++n;
        for (const auto& [w, m]: d.neighbors(v)) {
            sum += is_boundary(d.kind(w)) ? 0 : m;
        }
    }
    return sum / n;
}

TEST(Sampler, RawSpiderCountAndDegree) {
    const SamplerConfig cfg;
    const int           n       = 10000;
    double              spiders = 0.0;
    double              degree  = 0.0;
    for (int i = 0; i < n; ++i) {
        Rng           rng = make_rng(1, "raw", i);
        const Diagram d   = sample_raw(cfg, rng);
        spiders += static_cast<double>(d.num_spiders());
        degree += spider_degree(d);
    }
    EXPECT_NEAR(spiders / n, 12.5, 0.1);
    // binomial expectation p_edge * (n_total - 1) averages to the midpoint of n_neigh
    EXPECT_NEAR(degree / n, 3.0, 0.05 * 3.0);
}

TEST(Sampler, DegreeWithoutHadamardsIsBinomialMean) {
    SamplerConfig cfg;
    cfg.hadamard_fraction_cap = 0.0;
    const int n      = 10000;
    double    degree = 0.0;
    for (int i = 0; i < n; ++i) {
        Rng rng = make_rng(2, "raw", i);
        degree += spider_degree(sample_raw(cfg, rng));
    }
    EXPECT_NEAR(degree / n, 3.0, 0.03);
}

TEST(Sampler, RangesRespected) {
    SamplerConfig big = SamplerConfig::with_spiders(100, 150);
    for (int i = 0; i < 20; ++i) {
        Rng           rng = make_rng(3, "raw", i);
        const Diagram d   = sample_raw(big, rng);
        EXPECT_GE(d.num_spiders(), 100U);
        EXPECT_LE(d.num_spiders(), 150U);
        EXPECT_GE(d.inputs().size(), 1U);
        EXPECT_LE(d.outputs().size(), 3U);
        std::size_t hadamards = d.num_nodes() - d.num_spiders() - d.inputs().size() - d.outputs().size();
        EXPECT_LE(hadamards, static_cast<std::size_t>(0.2 * static_cast<double>(d.num_spiders())));
    }
}

TEST(Sampler, DrawsAreValidFixpoints) {
    const auto corpus = sample_corpus(SamplerConfig{}, 200, 4);
    Rng        rng(5);
    for (const Diagram& d: corpus) {
        EXPECT_NO_THROW(d.validate());
        EXPECT_GT(d.num_spiders(), 0U);
        Diagram again = d;
        auto_simplify(again);
        EXPECT_TRUE(are_isomorphic(again, d));
    }
}

TEST(Sampler, Deterministic) {
    const auto a = sample_corpus(SamplerConfig{}, 20, 9);
    const auto b = sample_corpus(SamplerConfig{}, 20, 9);
    const auto c = sample_corpus(SamplerConfig{}, 20, 10);
    int        same = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_TRUE(are_isomorphic(a[i], b[i]));
        same += are_isomorphic(a[i], c[i]) ? 1 : 0;
    }
    EXPECT_LT(same, 20);
}

TEST(Sampler, RejectsBadConfig) {
    EXPECT_THROW(SamplerConfig::with_spiders(5, 4).validate(), InputError);
    SamplerConfig c;
    c.hadamard_fraction_cap = 1.5;
    EXPECT_THROW(c.validate(), InputError);
    c           = SamplerConfig{};
    c.io_min    = 4;
    EXPECT_THROW(c.validate(), InputError);
}

} // namespace
} // namespace zx
