#include "support.hpp"
#include "zx/env.hpp"
#include "zx/errors.hpp"
#include "zx/sampler.hpp"

#include <gtest/gtest.h>

namespace zx {
namespace {

Diagram three_nodes_two_edges() {
    Diagram      d;
    const NodeId i = d.add_input();
    const NodeId z = d.add_spider(NodeKind::Z, Angle(1));
    const NodeId o = d.add_output();
    d.add_edge(i, z);
    d.add_edge(z, o);
    return d;
}

TEST(ActionIndex, LayoutAndRoundTrip) {
    const Observation obs = observe(three_nodes_two_edges(), 200);
    EXPECT_EQ(num_actions(3, 2), 31);
    EXPECT_EQ(obs.num_actions(), 31);
    EXPECT_TRUE(std::holds_alternative<StopAction>(action_at(obs, 30)));
    const Action na = action_at(obs, 6 * 1 + 3);
    const auto*  n  = std::get_if<NodeAction>(&na);
    ASSERT_NE(n, nullptr);
    EXPECT_EQ(n->node, obs.node_ids[1]);
    EXPECT_EQ(n->kind, NodeActionKind::Euler);
    const Action ea = action_at(obs, 18 + 6 + 2);
    const auto*  e  = std::get_if<EdgeAction>(&ea);
    ASSERT_NE(e, nullptr);
    EXPECT_EQ(e->edge, obs.edges[1]);
    EXPECT_EQ(e->kind, EdgeActionKind::Copy);
    for (int k = 0; k < obs.num_actions(); ++k) {
        EXPECT_EQ(index_of(obs, action_at(obs, k)), k);
    }
    EXPECT_THROW(action_at(obs, 31), ContractError);
    EXPECT_THROW(action_at(obs, -1), ContractError);
}

TEST(Observe, FeatureBlocksAndGlobals) {
    const auto corpus = sample_corpus(SamplerConfig{}, 30, 1);
    for (const Diagram& d: corpus) {
        const Observation obs = observe(d, 150);
        ASSERT_EQ(obs.node_features.cols(), kNodeFeatures);
        ASSERT_EQ(obs.globals.size(), kGlobalFeatures);
        for (int r = 0; r < obs.num_nodes(); ++r) {
            EXPECT_EQ(obs.node_features.row(r).head(5).sum(), 1.0);
            EXPECT_EQ(obs.node_features.row(r).segment(5, 6).sum(), 1.0);
        }
        EXPECT_TRUE(obs.globals.allFinite());
        EXPECT_EQ(obs.globals[kGNodes], static_cast<double>(d.num_nodes()));
        EXPECT_EQ(obs.globals[kGEdges], static_cast<double>(d.num_edges()));
        EXPECT_EQ(obs.globals[kGStopCounter], 20.0);
        EXPECT_EQ(obs.globals[kGUnfuseMode], 0.0);
        const double spiders = static_cast<double>(d.num_spiders());
        EXPECT_NEAR(obs.globals[kGZ] + obs.globals[kGX], 1.0, 1e-15);
        EXPECT_NEAR(obs.globals[kGFuse], static_cast<double>(action_mask(d).count(EdgeActionKind::Fuse)) /
                                                 static_cast<double>(d.num_edges()), 1e-15);
        EXPECT_NEAR(obs.globals[kGEuler] * spiders, static_cast<double>(action_mask(d).count(NodeActionKind::Euler)),
                    1e-12);
        // observation is a pure function of its inputs
        const Observation again = observe(d, 150);
        EXPECT_EQ(again.node_features, obs.node_features);
        EXPECT_EQ(again.mask, obs.mask);
    }
}

TEST(Observe, MaskEqualsActionMask) {
    const auto corpus = sample_corpus(SamplerConfig::with_spiders(5, 8), 30, 2);
    for (const Diagram& d: corpus) {
        const Observation obs     = observe(d, 200);
        std::size_t       allowed = 0;
        for (int k = 0; k < obs.num_actions(); ++k) {
            EXPECT_EQ(obs.mask[k] != 0, is_applicable(d, action_at(obs, k))) << describe(action_at(obs, k));
            allowed += obs.mask[k];
        }
        EXPECT_EQ(allowed, action_mask(d).count());
    }
}

TEST(Observe, StopCounterAndStopOption) {
    const Diagram d = three_nodes_two_edges();
    EXPECT_EQ(observe(d, 7).stop_counter, 7);
    EXPECT_EQ(observe(d, 500).stop_counter, 20);
    Diagram wire;
    wire.add_edge(wire.add_input(), wire.add_output());
    const Observation w = observe(wire, 200);
    EXPECT_EQ(w.num_actions(), 6 * 2 + 6 + 1);
    for (int k = 0; k < w.stop_index(); ++k) {
        EXPECT_EQ(w.mask[k], 0);
    }
    EXPECT_EQ(w.mask[w.stop_index()], 1);
    const Observation noStop = observe(d, 200, {.stop_action = false});
    EXPECT_EQ(noStop.mask[noStop.stop_index()], 0);
}

TEST(Env, ResetStepAndStop) {
    Env               env;
    const Observation a = env.reset(three_nodes_two_edges());
    EXPECT_EQ(a.stop_counter, 20);
    EXPECT_EQ(env.steps_left(), 200);
    const StepResult s = env.step(a.stop_index());
    EXPECT_TRUE(s.done);
    EXPECT_FALSE(s.truncated);
    EXPECT_EQ(s.reward, 0);
    EXPECT_THROW(env.step(0), ContractError);

    Env          fuse;
    const Diagram zz = test::wire({{NodeKind::Z, Angle(1)}, {NodeKind::Z, Angle(1)}});
    const Observation o = fuse.reset(zz);
    const int    idx = index_of(o, EdgeAction{EdgeKey::of(o.node_ids[1], o.node_ids[2]), EdgeActionKind::Fuse});
    EXPECT_EQ(fuse.step(idx).reward, 1);
    EXPECT_THROW(fuse.step(fuse.observation().num_actions()), ContractError);
}

TEST(Env, MaskedIndexThrows) {
    Env               env;
    const Observation o = env.reset(three_nodes_two_edges());
    for (int k = 0; k < o.num_actions(); ++k) {
        if (o.mask[k] == 0) {
            EXPECT_THROW(env.step(k), ContractError);
            break;
        }
    }
}

TEST(Env, RewardSumIsNodeDifferenceAndBudgetTruncates) {
    const auto corpus = sample_corpus(SamplerConfig{}, 20, 3);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        Env        env({.max_steps = 30});
        Rng        rng = make_rng(3, "walk", i);
        env.reset(corpus[i]);
        int        total = 0;
        StepResult s;
        while (!s.done) {
            std::vector<int> legal;
            const auto&      obs = env.observation();
            for (int k = 0; k < obs.stop_index(); ++k) {
                if (obs.mask[k] != 0) {
                    legal.push_back(k);
                }
            }
            const int pick = legal.empty() ? obs.stop_index()
                                           : legal[std::uniform_int_distribution<std::size_t>(0, legal.size() - 1)(rng)];
            s = env.step(pick);
            total += s.reward;
        }
        EXPECT_EQ(total, env.cumulative_reward());
        EXPECT_EQ(total, static_cast<int>(corpus[i].num_nodes()) - static_cast<int>(env.diagram().num_nodes()));
        EXPECT_LE(env.best_nodes(), env.initial_nodes());
        if (env.steps_taken() == 30) {
            EXPECT_TRUE(s.truncated);
        }
    }
}

} // namespace
} // namespace zx
