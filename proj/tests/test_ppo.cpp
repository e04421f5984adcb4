#include "zx/errors.hpp"
#include "zx/ppo.hpp"
#include "zx/rules.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>

namespace zx::ppo {
namespace {

namespace fs = std::filesystem;

PPOConfig tiny_config() {
    PPOConfig c;
    c.width       = 8;
    c.layers      = 2;
    c.n_env       = 3;
    c.n_max       = 12;
    c.n_minibatch = 12;
    c.n_train     = 2;
    c.max_steps   = 10;
    c.total_steps = 72;
    return c;
}

VecEnv small_envs(const PPOConfig& c, std::uint64_t seed) {
    VecEnv v(c.n_env, c.env(), DiagramSource{SamplerConfig::with_spiders(3, 5), seed, 0});
    v.reset_all();
    return v;
}

fs::path temp_path(const std::string& name) {
    return fs::temp_directory_path() / ("zx_ppo_test_" + name);
}

TEST(Gae, SingleTerminalStep) {
    const Advantages a = gae({1.0}, {0.0}, {5.0}, {1}, {0}, 0.99, 0.9);
    EXPECT_DOUBLE_EQ(a.advantages[0], 1.0);
    EXPECT_DOUBLE_EQ(a.returns[0], 1.0);
}

TEST(Gae, UndiscountedWithZeroValuesIsRewardToGo) {
    const std::vector<double> r{1, -2, 3, 0.5};
    const Advantages          a = gae(r, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 0, 0}, 1.0, 1.0);
    EXPECT_DOUBLE_EQ(a.advantages[0], 2.5);
    EXPECT_DOUBLE_EQ(a.advantages[1], 1.5);
    EXPECT_DOUBLE_EQ(a.advantages[2], 3.5);
    EXPECT_DOUBLE_EQ(a.advantages[3], 0.5);
}

TEST(Gae, ThreeStepTraceTerminatedAndTruncated) {
    const std::vector<double> r{1, 0, 2};
    const std::vector<double> v{0.5, 0.4, 0.3};
    const std::vector<double> nv{0.4, 0.3, 0.2};
    const Advantages          term = gae(r, v, nv, {0, 0, 1}, {0, 0, 0}, 0.99, 0.9);
    EXPECT_NEAR(term.advantages[0], 2.1538247, 1e-12);
    EXPECT_NEAR(term.advantages[1], 1.4117, 1e-12);
    EXPECT_NEAR(term.advantages[2], 1.7, 1e-12);
    EXPECT_NEAR(term.returns[0], 2.6538247, 1e-12);
    const Advantages trunc = gae(r, v, nv, {0, 0, 1}, {0, 0, 1}, 0.99, 0.9);
    EXPECT_NEAR(trunc.advantages[0], 2.311013138, 1e-12);
    EXPECT_NEAR(trunc.advantages[1], 1.588118, 1e-12);
    EXPECT_NEAR(trunc.advantages[2], 1.898, 1e-12);
}

TEST(Gae, EpisodeBoundaryStopsTheTrace) {
    const Advantages a = gae({1, 1}, {0, 0}, {0, 0}, {1, 0}, {0, 0}, 0.99, 0.9);
    EXPECT_DOUBLE_EQ(a.advantages[0], 1.0);
    EXPECT_DOUBLE_EQ(a.advantages[1], 1.0);
}

TEST(Config, Annealing) {
    PPOConfig c;
    EXPECT_DOUBLE_EQ(c.entropy_at(0.5), 0.05);
    EXPECT_DOUBLE_EQ(c.clip_at(0.5), 0.1);
    EXPECT_DOUBLE_EQ(c.clip_at(1.0), 0.0);
    c.flags.entropy_annealing = false;
    c.flags.clip_annealing    = false;
    EXPECT_DOUBLE_EQ(c.entropy_at(0.5), 0.1);
    EXPECT_DOUBLE_EQ(c.clip_at(0.5), 0.2);
    c.flags.entropy_bonus = false;
    EXPECT_DOUBLE_EQ(c.entropy_at(0.0), 0.0);
    EXPECT_EQ(c.n_env * c.n_max, 90000);
    EXPECT_EQ((c.n_env * c.n_max) % c.n_minibatch, 0);
}

TEST(Config, RejectsNonPositive) {
    PPOConfig c;
    c.n_env = 0;
    EXPECT_THROW(c.validate(), InputError);
}

TEST(Normalize, MeanZeroUnitVariance) {
    const std::vector<double> x = normalize({3, -1, 4, 1, 5, 9, 2, 6});
    double                    m = 0;
    double                    v = 0;
    for (const double a: x) {
        m += a;
    }
    m /= static_cast<double>(x.size());
    for (const double a: x) {
        v += (a - m) * (a - m);
    }
    v /= static_cast<double>(x.size());
    EXPECT_NEAR(m, 0.0, 1e-12);
    EXPECT_NEAR(v, 1.0, 1e-6);
    for (const double a: normalize({2, 2, 2})) {
        EXPECT_EQ(a, 0.0);
    }
}

TEST(ClipGradients, ComponentThenNorm) {
    nn::Grads a{nn::Mat::Constant(1, 2, 300.0)};
    nn::Grads b{nn::Mat::Constant(1, 2, -0.5)};
    const double before = clip_gradients(a, b, 100.0, 1e9);
    EXPECT_DOUBLE_EQ(a[0](0, 0), 100.0);
    EXPECT_DOUBLE_EQ(b[0](0, 1), -0.5);
    EXPECT_NEAR(before, std::sqrt(2 * 100.0 * 100.0 + 2 * 0.25), 1e-12);
    clip_gradients(a, b, 100.0, 0.5);
    const double norm = std::sqrt(a[0].squaredNorm() + b[0].squaredNorm());
    EXPECT_NEAR(norm, 0.5, 1e-12);
}

TEST(SampleAction, NeverPicksMaskedEntries) {
    const Eigen::VectorXd     logp = (Eigen::VectorXd(4) << std::log(0.5), -std::numeric_limits<double>::infinity(),
                                  std::log(0.5), -std::numeric_limits<double>::infinity()).finished();
    const std::vector<std::uint8_t> mask{1, 0, 1, 0};
    Rng                             rng(4);
    int                             zeros = 0;
    for (int i = 0; i < 2000; ++i) {
        const int a = sample_action(logp, mask, rng);
        ASSERT_TRUE(a == 0 || a == 2);
        zeros += a == 0 ? 1 : 0;
    }
    EXPECT_NEAR(zeros / 2000.0, 0.5, 0.05);
}

TEST(Rollout, RecordedLogProbsMatchRecomputation) {
    const PPOConfig c     = tiny_config();
    const Agent     agent = make_agent(c, 3);
    VecEnv          envs  = small_envs(c, 3);
    Rng             rng(5);
    const Rollout   r = collect_rollout(agent.policy, agent.critic, envs, c.n_max, c, rng);
    ASSERT_EQ(r.steps.size(), static_cast<std::size_t>(c.n_env * c.n_max));
    ASSERT_EQ(r.advantages.size(), r.steps.size());
    for (const Transition& t: r.steps) {
        ASSERT_NE(t.obs.mask[static_cast<std::size_t>(t.action)], 0);
        const Eigen::VectorXd logp = nn::masked_log_softmax(nn::policy_logits(agent.policy, t.obs), t.obs.mask);
        EXPECT_NEAR(logp[t.action], t.logp, 1e-9);
        EXPECT_NEAR(nn::critic_value(agent.critic, t.obs), t.value, 1e-9);
    }
}

TEST(Rollout, DeterministicGivenSeeds) {
    const PPOConfig c     = tiny_config();
    const Agent     agent = make_agent(c, 3);
    VecEnv          e1    = small_envs(c, 8);
    VecEnv          e2    = small_envs(c, 8);
    Rng             r1(6);
    Rng             r2(6);
    const Rollout   a = collect_rollout(agent.policy, agent.critic, e1, c.n_max, c, r1);
    const Rollout   b = collect_rollout(agent.policy, agent.critic, e2, c.n_max, c, r2);
    ASSERT_EQ(a.steps.size(), b.steps.size());
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
        EXPECT_EQ(a.steps[i].action, b.steps[i].action);
        EXPECT_EQ(a.advantages[i], b.advantages[i]);
    }
}

/// Observation whose mask leaves exactly two actions.
Observation two_action_obs() {
    Diagram      d;
    const NodeId i = d.add_input();
    const NodeId z = d.add_spider(NodeKind::Z, Angle(1));
    const NodeId x = d.add_spider(NodeKind::X, Angle(1));
    const NodeId o = d.add_output();
    d.add_edge(i, z);
    d.add_edge(z, x);
    d.add_edge(x, o);
    Observation obs = observe(d, 50);
    std::fill(obs.mask.begin(), obs.mask.end(), 0);
    obs.mask[6]                   = 1;
    obs.mask[obs.mask.size() - 1] = 1;
    return obs;
}

TEST(Update, ReducesToVanillaPolicyGradient) {
    PPOConfig c;
    c.width  = 8;
    c.layers = 2;
    Agent             agent = make_agent(c, 11);
    const Observation obs   = two_action_obs();
    const int         stop  = obs.stop_index();
    const std::vector<int>    acts{6, stop, 6, 6, stop, stop};
    const std::vector<double> adv = normalize({1.0, -0.5, 2.0, 0.3, -1.2, 0.7});
    std::vector<Transition>   ts;
    const Eigen::VectorXd     logp0 = nn::masked_log_softmax(nn::policy_logits(agent.policy, obs), obs.mask);
    for (const int a: acts) {
        Transition t;
        t.obs    = obs;
        t.action = a;
        t.logp   = logp0[a];
        ts.push_back(t);
    }
    std::vector<const Transition*> ptr;
    for (const Transition& t: ts) {
        ptr.push_back(&t);
    }
    const LossCoefficients coef{std::numeric_limits<double>::infinity(), 0.0, 0.5};
    nn::Grads              gp = agent.policy.params.zeros_like();
    nn::Grads              gc = agent.critic.params.zeros_like();
    minibatch_gradients(agent, ptr, adv, std::vector<double>(ts.size(), 0.0), coef, 4, gp, gc);

    // L = -mean(A_i log pi(a_i)), differentiated numerically
    auto loss = [&]() {
        const Eigen::VectorXd lp = nn::masked_log_softmax(nn::policy_logits(agent.policy, obs), obs.mask);
        double                s  = 0.0;
        for (std::size_t i = 0; i < acts.size(); ++i) {
            s -= adv[i] * lp[acts[i]];
        }
        return s / static_cast<double>(acts.size());
    };
    const double h = 1e-5;
    for (std::size_t p = 0; p < agent.policy.params.size(); ++p) {
        nn::Mat& w = agent.policy.params.values[p];
        for (Eigen::Index k = 0; k < w.size(); k += 7) {
            const double old = w.data()[k];
            w.data()[k]      = old + h;
            const double up  = loss();
            w.data()[k]      = old - h;
            const double dn  = loss();
            w.data()[k]      = old;
            EXPECT_NEAR(gp[p].data()[k], (up - dn) / (2 * h), 1e-7) << agent.policy.params.names[p] << "[" << k << "]";
        }
    }
}

TEST(Update, ClippedRatioContributesNoGradient) {
    PPOConfig c;
    c.width  = 8;
    c.layers = 2;
    const Agent       agent = make_agent(c, 12);
    const Observation obs   = two_action_obs();
    const Eigen::VectorXd logp = nn::masked_log_softmax(nn::policy_logits(agent.policy, obs), obs.mask);
    Transition t;
    t.obs    = obs;
    t.action = 6;
    t.logp   = logp[6] - 1.0; // ratio e > 1 + c
    const LossCoefficients coef{0.2, 0.0, 0.5};
    nn::Grads              gp = agent.policy.params.zeros_like();
    nn::Grads              gc = agent.critic.params.zeros_like();
    const MinibatchStats   st = minibatch_gradients(agent, {&t}, {1.0}, {0.0}, coef, 4, gp, gc);
    EXPECT_EQ(st.clip_frac, 1.0);
    EXPECT_EQ(nn::global_norm(gp), 0.0);
    EXPECT_GT(nn::global_norm(gc), 0.0);
}

TEST(Update, FirstEpochHasZeroKl) {
    PPOConfig c = tiny_config();
    c.n_train   = 1;
    c.n_minibatch = c.n_env * c.n_max;
    Agent     agent = make_agent(c, 13);
    VecEnv    envs  = small_envs(c, 13);
    Rng       rng(1);
    const Rollout       r = collect_rollout(agent.policy, agent.critic, envs, c.n_max, c, rng);
    const UpdateMetrics m = ppo_update(agent, r, c, 0.0, rng);
    EXPECT_NEAR(m.approx_kl, 0.0, 1e-12);
    EXPECT_EQ(m.epochs, 1);
    EXPECT_FALSE(m.early_stop);
}

TEST(Update, KlEarlyStopEndsTheUpdatePhase) {
    PPOConfig c   = tiny_config();
    c.n_train     = 5;
    c.n_minibatch = c.n_env * c.n_max;
    c.c_kl        = 1e-14;
    c.lr          = 1e-2;
    Agent         agent = make_agent(c, 14);
    VecEnv        envs  = small_envs(c, 14);
    Rng           rng(1);
    const Rollout r = collect_rollout(agent.policy, agent.critic, envs, c.n_max, c, rng);
    Agent         copy = agent;
    const UpdateMetrics m = ppo_update(agent, r, c, 0.0, rng);
    EXPECT_TRUE(m.early_stop);
    EXPECT_EQ(m.epochs, 2);
    c.flags.kl_early_stop = false;
    const UpdateMetrics full = ppo_update(copy, r, c, 0.0, rng);
    EXPECT_EQ(full.epochs, 5);
    EXPECT_FALSE(full.early_stop);
}

TEST(Checkpointing, AgentRoundTripIsExact) {
    PPOConfig c = tiny_config();
    c.flags.stop_counter = false;
    Agent a = make_agent(c, 15);
    a.adam_policy.t = 7;
    a.adam_policy.m[0].setConstant(0.25);
    const Agent b = load_agent(nn::decode_checkpoint(nn::encode_checkpoint(save_agent(a, c))));
    EXPECT_FALSE(b.policy.cfg.use_stop_counter);
    EXPECT_EQ(b.policy.cfg.width, 8);
    ASSERT_EQ(b.policy.params.size(), a.policy.params.size());
    for (std::size_t i = 0; i < a.policy.params.size(); ++i) {
        EXPECT_EQ(a.policy.params.values[i], b.policy.params.values[i]);
        EXPECT_EQ(a.adam_policy.m[i], b.adam_policy.m[i]);
    }
    for (std::size_t i = 0; i < a.critic.params.size(); ++i) {
        EXPECT_EQ(a.critic.params.values[i], b.critic.params.values[i]);
    }
    EXPECT_EQ(b.adam_policy.t, 7);
}

std::vector<nlohmann::json> read_metrics(const fs::path& p) {
    std::vector<nlohmann::json> out;
    std::ifstream               in(p);
    std::string                 line;
    while (std::getline(in, line)) {
        auto j = nlohmann::json::parse(line);
        j.erase("wall_time");
        out.push_back(j);
    }
    return out;
}

TEST(Train, SmokeRunLogsMonotoneStepsAndIsReproducible) {
    const PPOConfig c  = tiny_config();
    const fs::path  m1 = temp_path("m1.jsonl");
    const fs::path  m2 = temp_path("m2.jsonl");
    const fs::path  k1 = temp_path("k1.ckpt");
    const fs::path  k2 = temp_path("k2.ckpt");
    for (const auto& p: {m1, m2, k1, k2}) {
        fs::remove(p);
    }
    TrainOptions o;
    o.seed  = 21;
    o.quiet = true;
    o.metrics_path    = m1.string();
    o.checkpoint_path = k1.string();
    const TrainSummary s = train(c, SamplerConfig::with_spiders(3, 5), o);
    EXPECT_EQ(s.steps, 72);
    EXPECT_EQ(s.updates, 2);
    o.metrics_path    = m2.string();
    o.checkpoint_path = k2.string();
    train(c, SamplerConfig::with_spiders(3, 5), o);

    const auto a = read_metrics(m1);
    const auto b = read_metrics(m2);
    ASSERT_EQ(a.size(), 2U);
    EXPECT_EQ(a, b);
    EXPECT_LT(a[0]["step"].get<int>(), a[1]["step"].get<int>());
    for (const char* key: {"policy_loss", "value_loss", "entropy", "approx_kl", "clip_frac", "mean_cum_reward"}) {
        EXPECT_TRUE(a[0].contains(key)) << key;
    }

    std::ifstream f1(k1, std::ios::binary);
    std::ifstream f2(k2, std::ios::binary);
    const std::string b1((std::istreambuf_iterator<char>(f1)), {});
    const std::string b2((std::istreambuf_iterator<char>(f2)), {});
    EXPECT_EQ(b1, b2);
    for (const auto& p: {m1, m2, k1, k2}) {
        fs::remove(p);
    }
}

TEST(Train, ResumesFromCheckpoint) {
    PPOConfig      c  = tiny_config();
    const fs::path m  = temp_path("resume.jsonl");
    const fs::path k  = temp_path("resume.ckpt");
    fs::remove(m);
    fs::remove(k);
    TrainOptions o;
    o.seed            = 22;
    o.quiet           = true;
    o.metrics_path    = m.string();
    o.checkpoint_path = k.string();
    train(c, SamplerConfig::with_spiders(3, 5), o);
    c.total_steps        = 108;
    const TrainSummary s = train(c, SamplerConfig::with_spiders(3, 5), o);
    EXPECT_EQ(s.steps, 108);
    EXPECT_EQ(s.updates, 3);
    const auto lines = read_metrics(m);
    ASSERT_EQ(lines.size(), 3U);
    EXPECT_EQ(lines[2]["step"].get<int>(), 108);
    fs::remove(m);
    fs::remove(k);
}

TEST(RunPolicy, ReplayableAndDeterministic) {
    const PPOConfig c     = tiny_config();
    const Agent     agent = make_agent(c, 30);
    const auto      corpus = sample_corpus(SamplerConfig::with_spiders(4, 6), 12, 30);
    const auto      a = run_policy(agent.policy, corpus, 5, {.max_steps = 30});
    const auto      b = run_policy(agent.policy, corpus, 5, {.max_steps = 30});
    ASSERT_EQ(a.size(), corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        EXPECT_EQ(a[i].actions, b[i].actions);
        Diagram cur = corpus[i];
        for (const Action& act: a[i].actions) {
            if (std::holds_alternative<StopAction>(act)) {
                continue;
            }
            ASSERT_TRUE(is_applicable(cur, act));
            cur = zx::apply(cur, act).diagram;
        }
        EXPECT_EQ(cur.num_interior(), a[i].final_nodes);
        EXPECT_EQ(a[i].cumulative_reward, static_cast<int>(a[i].initial_nodes) - static_cast<int>(a[i].final_nodes));
        EXPECT_LE(a[i].best_nodes, a[i].initial_nodes);
    }
}

} // namespace
} // namespace zx::ppo
