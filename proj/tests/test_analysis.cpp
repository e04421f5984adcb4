#include "support.hpp"
#include "zx/analysis.hpp"
#include "zx/env.hpp"
#include "zx/errors.hpp"
#include "zx/ppo.hpp"
#include "zx/sampler.hpp"

#include <gtest/gtest.h>

namespace zx::analysis {
namespace {

nn::Network small_policy(std::uint64_t seed, int layers = 6) {
    nn::Network p = nn::make_policy({.width = 12, .layers = layers, .use_stop_counter = true});
    Rng         rng(seed);
    nn::init_orthogonal(p, rng);
    // larger weights so that distant features visibly move the logits
    for (nn::Mat& m: p.params.values) {
        m *= 3.0;
    }
    return p;
}

/// Longest shortest path between any two nodes.
int diameter(const Diagram& d) {
    int best = 0;
    for (const NodeId s: d.node_ids()) {
        std::map<NodeId, int> dist{{s, 0}};
        std::vector<NodeId>   frontier{s};
        while (!frontier.empty()) {
            std::vector<NodeId> next;
            for (const NodeId v: frontier) {
                for (const auto& [w, m]: d.neighbors(v)) {
                    if (!dist.contains(w)) {
                        dist[w] = dist[v] + 1;
                        best    = std::max(best, dist[w]);
                        next.push_back(w);
                    }
                }
            }
            frontier = std::move(next);
        }
    }
    return best;
}

/// A line of `n` alternating spiders between one input and one output.
Diagram long_wire(int n) {
    Diagram      d;
    NodeId       prev = d.add_input();
    for (int i = 0; i < n; ++i) {
        const NodeId v = d.add_spider(i % 2 == 0 ? NodeKind::Z : NodeKind::X, Angle(i % 4));
        d.add_edge(prev, v);
        prev = v;
    }
    d.add_edge(prev, d.add_output());
    return d;
}

TEST(Neighborhood, CollectsNodesWithinRadius) {
    const Diagram d   = long_wire(9);
    const auto    ids = d.node_ids();
    const Action  a   = NodeAction{ids[5], NodeActionKind::ColorChange};
    const Diagram sub = neighborhood(d, a, 2);
    EXPECT_EQ(sub.num_nodes(), 5U);
    EXPECT_EQ(sub.num_edges(), 4U);
    EXPECT_TRUE(sub.inputs().empty());
    EXPECT_EQ(neighborhood(d, a, 100).num_nodes(), d.num_nodes());
    EXPECT_THROW(neighborhood(d, StopAction{}, 1), ContractError);
    EXPECT_THROW(neighborhood(d, NodeAction{999, NodeActionKind::Euler}, 1), ContractError);
}

TEST(Locality, WholeDiagramGivesZeroUpToRounding) {
    const nn::Network p      = small_policy(1);
    const auto        corpus = sample_corpus(SamplerConfig::with_spiders(5, 8), 10, 2);
    for (const Diagram& d: corpus) {
        const Observation obs = observe(d, 200);
        for (int idx = 0; idx < obs.stop_index(); idx += 5) {
            const Action a = action_at(obs, idx);
            EXPECT_NEAR(locality_epsilon(p, d, a, diameter(d)), 0.0, 1e-12);
        }
    }
}

TEST(Locality, SixLayersSeeExactlySixHops) {
    const nn::Network p   = small_policy(3);
    const Diagram     d   = long_wire(16);
    const auto        ids = d.node_ids();
    const Action      a   = NodeAction{ids[1], NodeActionKind::ColorChange};
    for (int layer = 6; layer <= 8; ++layer) {
        EXPECT_NEAR(locality_epsilon(p, d, a, layer), 0.0, 1e-10) << layer;
    }
    EXPECT_GT(locality_epsilon(p, d, a, 5), 1e-8);
    EXPECT_GT(locality_epsilon(p, d, a, 2), 1e-8);

    const Action e = EdgeAction{EdgeKey::of(ids[2], ids[3]), EdgeActionKind::Fuse};
    EXPECT_NEAR(locality_epsilon(p, d, e, 6), 0.0, 1e-10);
    EXPECT_GT(locality_epsilon(p, d, e, 4), 1e-8);
}

TEST(Locality, FewerLayersShrinkTheField) {
    const nn::Network p   = small_policy(4, 3);
    const Diagram     d   = long_wire(12);
    const Action      a   = NodeAction{d.node_ids()[1], NodeActionKind::ColorChange};
    EXPECT_NEAR(locality_epsilon(p, d, a, 3), 0.0, 1e-10);
    EXPECT_GT(locality_epsilon(p, d, a, 2), 1e-8);
}

TEST(Locality, ReportIsNonNegative) {
    const nn::Network    p      = small_policy(5);
    const auto           corpus = sample_corpus(SamplerConfig::with_spiders(5, 8), 6, 5);
    const LocalityReport r      = locality_report(p, corpus, 1, 7);
    EXPECT_GT(r.samples, 0);
    for (std::size_t k = 0; k < r.mean_epsilon.size(); ++k) {
        EXPECT_GE(r.mean_epsilon[k], 0.0);
        EXPECT_GE(r.max_epsilon[k], r.mean_epsilon[k]);
    }
    EXPECT_NEAR(r.max_epsilon[5], 0.0, 1e-10);
}

TEST(CopyScenario, RewardIsTwoMinusOutputsPlusExtras) {
    for (int nOut = 1; nOut <= 6; ++nOut) {
        for (int nExtra = 0; nExtra <= nOut; ++nExtra) {
            const CopyScenario s = copy_scenario(nOut, nExtra);
            EXPECT_TRUE(is_applicable(s.diagram, EdgeAction{s.edge, EdgeActionKind::Copy}));
            EXPECT_EQ(copy_then_fuse_reward(s), 2 - nOut + nExtra) << nOut << "," << nExtra;
        }
    }
    EXPECT_EQ(copy_then_fuse_reward(copy_scenario(2, 0)), 0);
    EXPECT_EQ(copy_then_fuse_reward(copy_scenario(2, 1)), 1);
    EXPECT_THROW(copy_scenario(2, 3), InputError);
}

TEST(CopyScenario, CopyPreservesTheMap) {
    Rng rng(6);
    for (const auto& [o, e]: std::vector<std::pair<int, int>>{{1, 0}, {2, 1}, {3, 2}}) {
        const CopyScenario s = copy_scenario(o, e);
        EXPECT_TRUE(test::same_map(s.diagram, copy(s.diagram, s.edge).diagram, rng));
    }
}

TEST(CopyScenario, ProbabilityIsADistributionEntry) {
    const nn::Network  p = small_policy(7);
    const CopyScenario s = copy_scenario(3, 1);
    const double       q = copy_probability(p, s);
    EXPECT_GT(q, 0.0);
    EXPECT_LT(q, 1.0);
}

TEST(Evaluate, ResultsIndependentOfWorkers) {
    const auto   corpus = sample_corpus(SamplerConfig{}, 12, 9);
    StrategySpec spec;
    const auto   a = run_strategy(spec, corpus, 4, 1);
    const auto   b = run_strategy(spec, corpus, 4, 3);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].actions, b[i].actions);
        EXPECT_LE(a[i].best_nodes, a[i].initial_nodes);
    }
    Summary s = summarize("greedy", 9, 4, a);
    EXPECT_LE(s.mean_best_nodes, s.mean_initial_nodes);
    auto j = to_json(s);
    EXPECT_EQ(j["per_diagram"].size(), corpus.size());
    EXPECT_EQ(j["strategy"], "greedy");
    EXPECT_NE(to_csv(s).find("best_nodes"), std::string::npos);
}

TEST(Evaluate, PolicyTwiceGivesIdenticalSummary) {
    const nn::Network p      = small_policy(8);
    const auto        corpus = sample_corpus(SamplerConfig::with_spiders(5, 8), 6, 10);
    StrategySpec      spec{.kind = Strategy::Policy, .max_steps = 40, .policy = &p};
    auto              a = to_json(summarize("policy", 10, 1, run_strategy(spec, corpus, 1)));
    auto              b = to_json(summarize("policy", 10, 1, run_strategy(spec, corpus, 1)));
    for (auto* j: {&a, &b}) {
        j->erase("mean_time_s");
        for (auto& r: (*j)["per_diagram"]) {
            r.erase("wall_time");
        }
    }
    EXPECT_EQ(a.dump(), b.dump());
}

TEST(Evaluate, ParsesStrategyNames) {
    EXPECT_EQ(parse_strategy("anneal"), Strategy::Anneal);
    EXPECT_THROW(parse_strategy("annealing"), InputError);
}

TEST(Verify, SmallCorpusHasNoViolations) {
    const auto         corpus = sample_corpus(SamplerConfig::with_spiders(3, 6), 15, 11);
    const VerifyReport r      = verify_rules(corpus, 3, 2);
    EXPECT_EQ(r.diagrams, corpus.size());
    EXPECT_GT(r.checked, 0U);
    EXPECT_TRUE(r.violations.empty());
    EXPECT_LT(r.max_deviation, 1e-9);
}

} // namespace
} // namespace zx::analysis
