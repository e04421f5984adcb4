#include "zx/ppo.hpp"

#include "zx/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>

namespace zx::ppo {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::size_t sz(int i) {
    return static_cast<std::size_t>(i);
}

} // namespace

// --- config -----------------------------------------------------------------------------------

void PPOConfig::validate() const {
    auto positive = [](bool ok, const char* what) {
        if (!ok) {
            throw InputError(std::string(what) + " must be positive");
        }
    };
    positive(n_env > 0, "n_env");
    positive(n_max > 0, "n_max");
    positive(n_minibatch > 0, "n_minibatch");
    positive(n_train > 0, "n_train");
    positive(c_kl > 0, "c_KL");
    positive(clip > 0, "clip");
    positive(entropy >= 0, "entropy");
    positive(c_absgrad > 0, "c_absgrad");
    positive(c_normgrad > 0, "c_normgrad");
    positive(gamma > 0 && gamma <= 1, "gamma");
    positive(lambda >= 0 && lambda <= 1, "lambda");
    positive(lr > 0, "eta");
    positive(beta1 > 0 && beta1 < 1, "beta1");
    positive(beta2 > 0 && beta2 < 1, "beta2");
    positive(value_coef > 0, "value_coef");
    positive(total_steps > 0, "total_steps");
    positive(max_steps > 0, "max_steps");
    positive(shard > 0, "shard");
    positive(width > 0, "width");
    positive(layers > 0, "layers");
}

double PPOConfig::clip_at(double progress) const {
    return flags.clip_annealing ? clip * std::max(0.0, 1.0 - progress) : clip;
}

double PPOConfig::entropy_at(double progress) const {
    if (!flags.entropy_bonus) {
        return 0.0;
    }
    return flags.entropy_annealing ? entropy * std::max(0.0, 1.0 - progress) : entropy;
}

nn::NetConfig PPOConfig::net() const {
    return {.width = width, .layers = layers, .use_stop_counter = flags.stop_counter};
}

EnvConfig PPOConfig::env() const {
    return {.max_steps = max_steps, .stop_action = flags.stop_action};
}

nn::AdamConfig PPOConfig::adam() const {
    return {.lr = lr, .beta1 = beta1, .beta2 = beta2, .epsilon = 1e-8};
}

// --- advantages -------------------------------------------------------------------------------

Advantages gae(const std::vector<double>& rewards, const std::vector<double>& values,
               const std::vector<double>& next_values, const std::vector<std::uint8_t>& done,
               const std::vector<std::uint8_t>& truncated, double gamma, double lambda) {
    const std::size_t n = rewards.size();
    if (values.size() != n || next_values.size() != n || done.size() != n || truncated.size() != n) {
        throw ContractError("gae inputs differ in length");
    }
    Advantages out;
    out.advantages.assign(n, 0.0);
    out.returns.assign(n, 0.0);
    double carry = 0.0;
    for (std::size_t t = n; t-- > 0;) {
        const bool   terminal = done[t] != 0 && truncated[t] == 0;
        const double next     = terminal ? 0.0 : next_values[t];
        const double delta    = rewards[t] + gamma * next - values[t];
        if (done[t] != 0) {
            carry = 0.0;
        }
        carry              = delta + gamma * lambda * carry;
        out.advantages[t]  = carry;
        out.returns[t]     = carry + values[t];
    }
    return out;
}

// --- rollouts ---------------------------------------------------------------------------------

Diagram DiagramSource::draw() {
    Rng rng = make_rng(seed, "train", next++);
    return sample_diagram(sampler, rng);
}

VecEnv::VecEnv(int n, const EnvConfig& cfg, DiagramSource src) : source(std::move(src)) {
    envs.reserve(sz(n));
    for (int i = 0; i < n; ++i) {
        envs.emplace_back(cfg);
    }
}

void VecEnv::reset_all() {
    for (Env& e: envs) {
        e.reset(source.draw());
    }
}

int sample_action(const Eigen::VectorXd& logp, const std::vector<std::uint8_t>& mask, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double                           x    = u(rng);
    double                                 acc  = 0.0;
    int                                    last = -1;
    for (Eigen::Index i = 0; i < logp.size(); ++i) {
        if (mask[static_cast<std::size_t>(i)] == 0) {
            continue;
        }
        last = static_cast<int>(i);
        acc += std::exp(logp[i]);
        if (x < acc) {
            return last;
        }
    }
    if (last < 0) {
        throw ContractError("every action is masked");
    }
    return last;
}

namespace {

/// Critic values of many observations, evaluated in shards.
std::vector<double> values_of(const nn::Network& critic, const std::vector<const Observation*>& obs, int shard) {
    std::vector<double> out;
    out.reserve(obs.size());
    for (std::size_t s = 0; s < obs.size(); s += sz(shard)) {
        const std::size_t                      e = std::min(obs.size(), s + sz(shard));
        const std::vector<const Observation*>  part(obs.begin() + static_cast<std::ptrdiff_t>(s),
                                                    obs.begin() + static_cast<std::ptrdiff_t>(e));
        const Eigen::VectorXd                  v = nn::forward_critic(critic, nn::make_batch(part));
        out.insert(out.end(), v.data(), v.data() + v.size());
    }
    return out;
}

} // namespace

Rollout collect_rollout(const nn::Network& policy, const nn::Network& critic, VecEnv& envs, int nMax,
                        const PPOConfig& cfg, Rng& rng) {
    const std::size_t                    n = envs.envs.size();
    std::vector<std::vector<Transition>> per(n);
    // (env, step) of truncated transitions and the observation they ended in
    std::vector<std::pair<std::size_t, std::size_t>> truncAt;
    std::vector<Observation>                         truncObs;
    Rollout                                          out;

    for (auto& p: per) {
        p.reserve(sz(nMax));
    }
    for (int t = 0; t < nMax; ++t) {
        std::vector<const Observation*> obs(n);
        for (std::size_t i = 0; i < n; ++i) {
            obs[i] = &envs.envs[i].observation();
        }
        const nn::GraphBatch   batch = nn::make_batch(obs);
        const nn::PolicyOutput pout  = nn::forward_policy(policy, batch);
        const Eigen::VectorXd  v     = nn::forward_critic(critic, batch);
        for (std::size_t i = 0; i < n; ++i) {
            Env&                  env  = envs.envs[i];
            const Observation&    o    = env.observation();
            const Eigen::VectorXd logp = nn::masked_log_softmax(nn::flat_logits(pout, batch, static_cast<int>(i)), o.mask);
            Transition            tr;
            tr.obs    = o;
            tr.action = sample_action(logp, o.mask, rng);
            tr.logp   = logp[tr.action];
            tr.value  = v[static_cast<Eigen::Index>(i)];
            const StepResult r = env.step(tr.action);
            tr.reward    = r.reward;
            tr.done      = r.done;
            tr.truncated = r.truncated;
            if (r.truncated) {
                truncAt.emplace_back(i, per[i].size());
                truncObs.push_back(env.observation());
            }
            if (r.done) {
                out.episode_returns.push_back(env.cumulative_reward());
                env.reset(envs.source.draw());
            }
            per[i].push_back(std::move(tr));
        }
    }

    // bootstrap values: truncated episode ends, then the states every env is left in
    std::vector<const Observation*> tail;
    for (const Observation& o: truncObs) {
        tail.push_back(&o);
    }
    for (std::size_t i = 0; i < n; ++i) {
        tail.push_back(&envs.envs[i].observation());
    }
    const std::vector<double> tv = values_of(critic, tail, cfg.shard);
    for (std::size_t k = 0; k < truncAt.size(); ++k) {
        per[truncAt[k].first][truncAt[k].second].next_value = tv[k];
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto& steps = per[i];
        for (std::size_t t = 0; t + 1 < steps.size(); ++t) {
            if (!steps[t].done) {
                steps[t].next_value = steps[t + 1].value;
            }
        }
        if (!steps.empty() && !steps.back().done) {
            steps.back().next_value = tv[truncAt.size() + i];
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        const auto&               steps = per[i];
        std::vector<double>       r, v, nv;
        std::vector<std::uint8_t> d, tr;
        for (const Transition& s: steps) {
            r.push_back(s.reward);
            v.push_back(s.value);
            nv.push_back(s.next_value);
            d.push_back(s.done ? 1 : 0);
            tr.push_back(s.truncated ? 1 : 0);
        }
        Advantages a = gae(r, v, nv, d, tr, cfg.gamma, cfg.lambda);
        out.advantages.insert(out.advantages.end(), a.advantages.begin(), a.advantages.end());
        out.returns.insert(out.returns.end(), a.returns.begin(), a.returns.end());
        for (Transition& s: per[i]) {
            out.steps.push_back(std::move(s));
        }
    }
    return out;
}

// --- update -----------------------------------------------------------------------------------

Agent make_agent(const PPOConfig& cfg, std::uint64_t seed) {
    Agent a{nn::make_policy(cfg.net()), nn::make_critic(cfg.net()), {}, {}};
    Rng   rp = make_rng(seed, "init", 0);
    Rng   rc = make_rng(seed, "init", 1);
    nn::init_orthogonal(a.policy, rp);
    nn::init_orthogonal(a.critic, rc);
    a.adam_policy = nn::make_adam(a.policy.params);
    a.adam_critic = nn::make_adam(a.critic.params);
    return a;
}

std::vector<double> normalize(const std::vector<double>& x) {
    if (x.empty()) {
        return {};
    }
    const double n    = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double       var  = 0.0;
    for (const double v: x) {
        var += (v - mean) * (v - mean);
    }
    var /= n;
    const double        sd = std::sqrt(var);
    std::vector<double> out(x.size(), 0.0);
    if (sd < 1e-12) {
        return out;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = (x[i] - mean) / sd;
    }
    return out;
}

double clip_gradients(nn::Grads& a, nn::Grads& b, double absClip, double normClip) {
    double sq = 0.0;
    for (nn::Grads* g: {&a, &b}) {
        for (nn::Mat& m: *g) {
            m = m.cwiseMax(-absClip).cwiseMin(absClip);
            sq += m.squaredNorm();
        }
    }
    const double norm = std::sqrt(sq);
    if (norm > normClip) {
        const double s = normClip / norm;
        for (nn::Grads* g: {&a, &b}) {
            for (nn::Mat& m: *g) {
                m *= s;
            }
        }
    }
    return norm;
}

MinibatchStats minibatch_gradients(const Agent& agent, const std::vector<const Transition*>& samples,
                                   const std::vector<double>& advantages, const std::vector<double>& returns,
                                   const LossCoefficients& coef, int shard, nn::Grads& gPolicy, nn::Grads& gCritic) {
    MinibatchStats st;
    st.samples         = static_cast<int>(samples.size());
    const double scale = 1.0 / static_cast<double>(samples.size());

    for (std::size_t s0 = 0; s0 < samples.size(); s0 += sz(shard)) {
        const std::size_t               s1 = std::min(samples.size(), s0 + sz(shard));
        std::vector<const Observation*> obs;
        for (std::size_t k = s0; k < s1; ++k) {
            obs.push_back(&samples[k]->obs);
        }
        const nn::GraphBatch   b = nn::make_batch(obs);
        nn::ForwardCache       pc;
        nn::ForwardCache       cc;
        const nn::PolicyOutput out = nn::forward_policy(agent.policy, b, &pc);
        const Eigen::VectorXd  v   = nn::forward_critic(agent.critic, b, &cc);

        nn::RowMat      dNode = nn::RowMat::Zero(out.node_logits.rows(), out.node_logits.cols());
        nn::RowMat      dEdge = nn::RowMat::Zero(out.edge_logits.rows(), out.edge_logits.cols());
        Eigen::VectorXd dStop = Eigen::VectorXd::Zero(b.num_graphs);
        Eigen::VectorXd dV    = Eigen::VectorXd::Zero(b.num_graphs);

        for (int g = 0; g < b.num_graphs; ++g) {
            const std::size_t     k    = s0 + sz(g);
            const Transition&     tr   = *samples[k];
            const Eigen::VectorXd logp = nn::masked_log_softmax(nn::flat_logits(out, b, g), tr.obs.mask);
            const Eigen::VectorXd p    = nn::masked_probs(logp, tr.obs.mask);
            const double          A    = advantages[k];
            const double          lr   = logp[tr.action] - tr.logp;
            const double          ratio = std::exp(lr);
            const double          s1v  = ratio * A;
            const double          s2v  = std::clamp(ratio, 1.0 - coef.clip, 1.0 + coef.clip) * A;
            const bool            open = s1v <= s2v;

            double H = 0.0;
            for (Eigen::Index i = 0; i < p.size(); ++i) {
                if (tr.obs.mask[static_cast<std::size_t>(i)] != 0) {
                    H -= p[i] * logp[i];
                }
            }
            const double err = v[g] - returns[k];

            st.policy_loss += -std::min(s1v, s2v);
            st.value_loss += err * err;
            st.entropy += H;
            st.approx_kl += (ratio - 1.0) - lr;
            st.clip_frac += std::abs(ratio - 1.0) > coef.clip ? 1.0 : 0.0;

            // d/dz of (-surrogate - c_ent * H); masked entries have p = 0 and stay untouched
            const double    dLogpA = open ? -A * ratio : 0.0;
            Eigen::VectorXd dz     = Eigen::VectorXd::Zero(p.size());
            for (Eigen::Index i = 0; i < p.size(); ++i) {
                if (tr.obs.mask[static_cast<std::size_t>(i)] == 0) {
                    continue;
                }
                const double onehot = i == tr.action ? 1.0 : 0.0;
                const double dH     = -p[i] * (logp[i] + H);
                dz[i]               = dLogpA * (onehot - p[i]) - coef.entropy * dH;
            }
            dz *= scale;
            nn::scatter_flat(dz, b, g, dNode, dEdge, dStop);
            dV[g] = 2.0 * coef.value_coef * err * scale;
        }
        nn::backward_policy(agent.policy, b, pc, dNode, dEdge, dStop, gPolicy);
        nn::backward_critic(agent.critic, b, cc, dV, gCritic);
    }
    st.policy_loss *= scale;
    st.value_loss *= scale;
    st.entropy *= scale;
    st.approx_kl *= scale;
    st.clip_frac *= scale;
    if (!std::isfinite(st.policy_loss) || !std::isfinite(st.value_loss) || !std::isfinite(st.entropy)) {
        throw TrainingFault("non-finite loss (policy " + std::to_string(st.policy_loss) + ", value " +
                            std::to_string(st.value_loss) + ", entropy " + std::to_string(st.entropy) + ")");
    }
    return st;
}

UpdateMetrics ppo_update(Agent& agent, const Rollout& batch, const PPOConfig& cfg, double progress, Rng& rng) {
    const std::size_t N  = batch.steps.size();
    const std::size_t mb = std::min(N, sz(cfg.n_minibatch));
    UpdateMetrics     m;
    if (mb == 0) {
        return m;
    }
    const std::size_t      count = N / mb;
    const LossCoefficients coef{cfg.clip_at(progress), cfg.entropy_at(progress), cfg.value_coef};
    const nn::AdamConfig   adam = cfg.adam();
    std::vector<std::size_t> perm(N);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    int steps = 0;

    for (int epoch = 0; epoch < cfg.n_train; ++epoch) {
        std::shuffle(perm.begin(), perm.end(), rng);
        double epochKl = 0.0;
        for (std::size_t c = 0; c < count; ++c) {
            std::vector<const Transition*> samples;
            std::vector<double>            adv;
            std::vector<double>            ret;
            for (std::size_t k = c * mb; k < (c + 1) * mb; ++k) {
                samples.push_back(&batch.steps[perm[k]]);
                adv.push_back(batch.advantages[perm[k]]);
                ret.push_back(batch.returns[perm[k]]);
            }
            nn::Grads            gp = agent.policy.params.zeros_like();
            nn::Grads            gc = agent.critic.params.zeros_like();
            const MinibatchStats st = minibatch_gradients(agent, samples, normalize(adv), ret, coef, cfg.shard, gp, gc);
            m.grad_norm             = clip_gradients(gp, gc, cfg.c_absgrad, cfg.c_normgrad);
            nn::adam_step(agent.policy.params, gp, agent.adam_policy, adam);
            nn::adam_step(agent.critic.params, gc, agent.adam_critic, adam);
            m.policy_loss += st.policy_loss;
            m.value_loss += st.value_loss;
            m.entropy += st.entropy;
            m.clip_frac += st.clip_frac;
            m.approx_kl += st.approx_kl;
            epochKl += st.approx_kl;
            ++steps;
        }
        m.epochs = epoch + 1;
        if (cfg.flags.kl_early_stop && epochKl / static_cast<double>(count) > cfg.c_kl) {
            m.early_stop = true;
            break;
        }
    }
    const double s = 1.0 / static_cast<double>(std::max(steps, 1));
    m.policy_loss *= s;
    m.value_loss *= s;
    m.entropy *= s;
    m.clip_frac *= s;
    m.approx_kl *= s;
    return m;
}

// --- checkpoints ------------------------------------------------------------------------------

namespace {

void store_moments(nn::Checkpoint& c, const std::string& prefix, const nn::Params& shape, const nn::AdamState& s) {
    for (std::size_t i = 0; i < shape.size(); ++i) {
        c.put(prefix + "m/" + shape.names[i], s.m[i]);
        c.put(prefix + "v/" + shape.names[i], s.v[i]);
    }
}

void load_moments(const nn::Checkpoint& c, const std::string& prefix, const nn::Params& shape, nn::AdamState& s) {
    s = nn::make_adam(shape);
    for (std::size_t i = 0; i < shape.size(); ++i) {
        const nn::Mat* m = c.find(prefix + "m/" + shape.names[i]);
        const nn::Mat* v = c.find(prefix + "v/" + shape.names[i]);
        if (m == nullptr || v == nullptr) {
            return;
        }
        s.m[i] = *m;
        s.v[i] = *v;
    }
}

nn::NetConfig net_of(const nn::Checkpoint& c) {
    nn::NetConfig n;
    n.width            = static_cast<int>(c.counter("net.width", n.width));
    n.layers           = static_cast<int>(c.counter("net.layers", n.layers));
    n.use_stop_counter = c.counter("net.stop_counter", 1) != 0;
    return n;
}

} // namespace

nn::Checkpoint save_agent(const Agent& agent, const PPOConfig& cfg) {
    nn::Checkpoint c;
    c.set_counter("net.width", cfg.width);
    c.set_counter("net.layers", cfg.layers);
    c.set_counter("net.stop_counter", cfg.flags.stop_counter ? 1 : 0);
    c.set_counter("env.stop_action", cfg.flags.stop_action ? 1 : 0);
    c.set_counter("env.max_steps", cfg.max_steps);
    c.set_counter("adam.policy.t", agent.adam_policy.t);
    c.set_counter("adam.critic.t", agent.adam_critic.t);
    nn::store_params(c, "policy/", agent.policy.params);
    nn::store_params(c, "critic/", agent.critic.params);
    store_moments(c, "adam.policy/", agent.policy.params, agent.adam_policy);
    store_moments(c, "adam.critic/", agent.critic.params, agent.adam_critic);
    return c;
}

Agent load_agent(const nn::Checkpoint& c) {
    const nn::NetConfig n = net_of(c);
    Agent               a{nn::make_policy(n), nn::make_critic(n), {}, {}};
    nn::load_params(c, "policy/", a.policy.params);
    nn::load_params(c, "critic/", a.critic.params);
    load_moments(c, "adam.policy/", a.policy.params, a.adam_policy);
    load_moments(c, "adam.critic/", a.critic.params, a.adam_critic);
    a.adam_policy.t = c.counter("adam.policy.t");
    a.adam_critic.t = c.counter("adam.critic.t");
    return a;
}

nn::Network load_policy(const std::string& path) {
    const nn::Checkpoint c = nn::load_checkpoint(path);
    nn::Network          p = nn::make_policy(net_of(c));
    nn::load_params(c, "policy/", p.params);
    return p;
}

// --- training ---------------------------------------------------------------------------------

TrainSummary train(const PPOConfig& cfg, const SamplerConfig& sampler, const TrainOptions& opt) {
    cfg.validate();
    sampler.validate();
    Agent         agent;
    TrainSummary  sum;
    DiagramSource source{sampler, derive_seed(opt.seed, "train-source"), 0};
    const bool    resuming = opt.resume && !opt.checkpoint_path.empty() && std::filesystem::exists(opt.checkpoint_path);
    if (resuming) {
        const nn::Checkpoint c = nn::load_checkpoint(opt.checkpoint_path);
        agent                  = load_agent(c);
        sum.steps              = c.counter("train.steps");
        sum.updates            = c.counter("train.updates");
        source.next            = static_cast<std::uint64_t>(c.counter("train.diagrams"));
    } else {
        agent = make_agent(cfg, opt.seed);
    }

    std::ofstream metrics;
    if (!opt.metrics_path.empty()) {
        metrics.open(opt.metrics_path, resuming ? std::ios::app : std::ios::trunc);
        if (!metrics) {
            throw InputError("cannot open metrics file " + opt.metrics_path);
        }
    }
    auto checkpoint = [&](const std::string& path) {
        if (path.empty()) {
            return;
        }
        nn::Checkpoint c = save_agent(agent, cfg);
        c.set_counter("train.steps", sum.steps);
        c.set_counter("train.updates", sum.updates);
        c.set_counter("train.diagrams", static_cast<std::int64_t>(source.next));
        nn::save_checkpoint(path, c);
    };

    VecEnv envs(cfg.n_env, cfg.env(), source);
    envs.reset_all();
    const auto t0 = Clock::now();
    while (sum.steps < cfg.total_steps) {
        const std::int64_t remaining = cfg.total_steps - sum.steps;
        const int nMax = static_cast<int>(std::min<std::int64_t>(cfg.n_max, (remaining + cfg.n_env - 1) / cfg.n_env));
        const double progress = static_cast<double>(sum.steps) / static_cast<double>(cfg.total_steps);
        Rng          rollRng  = make_rng(opt.seed, "rollout", static_cast<std::uint64_t>(sum.updates));
        Rng          updRng   = make_rng(opt.seed, "update", static_cast<std::uint64_t>(sum.updates));

        UpdateMetrics m;
        Rollout       batch;
        try {
            batch = collect_rollout(agent.policy, agent.critic, envs, nMax, cfg, rollRng);
            m     = ppo_update(agent, batch, cfg, progress, updRng);
        } catch (const TrainingFault&) {
            if (!opt.checkpoint_path.empty()) {
                checkpoint(opt.checkpoint_path + ".fault");
            }
            throw;
        }
        sum.steps += static_cast<std::int64_t>(cfg.n_env) * nMax;
        ++sum.updates;

        nlohmann::json rec;
        rec["step"] = sum.steps;
        if (batch.episode_returns.empty()) {
            rec["mean_cum_reward"] = nullptr;
        } else {
            sum.last_mean_cum_reward = std::accumulate(batch.episode_returns.begin(), batch.episode_returns.end(), 0.0) /
                                       static_cast<double>(batch.episode_returns.size());
            rec["mean_cum_reward"] = sum.last_mean_cum_reward;
        }
        rec["episodes"]    = batch.episode_returns.size();
        rec["policy_loss"] = m.policy_loss;
        rec["value_loss"]  = m.value_loss;
        rec["entropy"]     = m.entropy;
        rec["approx_kl"]   = m.approx_kl;
        rec["clip_frac"]   = m.clip_frac;
        rec["epochs"]      = m.epochs;
        rec["wall_time"]   = seconds_since(t0);
        if (metrics.is_open()) {
            metrics << rec.dump() << '\n' << std::flush;
        }
        if (!opt.quiet) {
            std::cerr << rec.dump() << '\n';
        }
        if (opt.checkpoint_every > 0 && sum.updates % opt.checkpoint_every == 0) {
            source.next = envs.source.next;
            checkpoint(opt.checkpoint_path);
        }
    }
    source.next = envs.source.next;
    checkpoint(opt.checkpoint_path);
    return sum;
}

// --- evaluation -------------------------------------------------------------------------------

std::vector<RunResult> run_policy(const nn::Network& policy, const std::vector<Diagram>& corpus,
                                  std::uint64_t seed, const PolicyRunConfig& cfg) {
    const EnvConfig        ec{.max_steps = cfg.max_steps, .stop_action = cfg.stop_action};
    std::vector<RunResult> res(corpus.size());
    std::vector<Env>       envs(corpus.size(), Env(ec));
    std::vector<Rng>       rngs;
    std::vector<double>    time(corpus.size(), 0.0);
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        rngs.push_back(make_rng(seed, "policy", i));
        envs[i].reset(corpus[i]);
        active.push_back(i);
    }
    constexpr std::size_t kChunk = 64;
    while (!active.empty()) {
        std::vector<std::size_t> still;
        for (std::size_t c0 = 0; c0 < active.size(); c0 += kChunk) {
            const auto                      t0 = Clock::now();
            const std::size_t               c1 = std::min(active.size(), c0 + kChunk);
            std::vector<const Observation*> obs;
            for (std::size_t k = c0; k < c1; ++k) {
                obs.push_back(&envs[active[k]].observation());
            }
            const nn::GraphBatch   b   = nn::make_batch(obs);
            const nn::PolicyOutput out = nn::forward_policy(policy, b);
            for (std::size_t k = c0; k < c1; ++k) {
                const std::size_t     i    = active[k];
                Env&                  env  = envs[i];
                const Eigen::VectorXd logp = nn::masked_log_softmax(nn::flat_logits(out, b, static_cast<int>(k - c0)),
                                                                    env.observation().mask);
                int a = 0;
                if (cfg.argmax) {
                    double best = -std::numeric_limits<double>::infinity();
                    for (Eigen::Index j = 0; j < logp.size(); ++j) {
                        if (env.observation().mask[static_cast<std::size_t>(j)] != 0 && logp[j] > best) {
                            best = logp[j];
                            a    = static_cast<int>(j);
                        }
                    }
                } else {
                    a = sample_action(logp, env.observation().mask, rngs[i]);
                }
                res[i].actions.push_back(action_at(env.observation(), a));
                if (!env.step(a).done) {
                    still.push_back(i);
                }
            }
            const double dt = seconds_since(t0) / static_cast<double>(c1 - c0);
            for (std::size_t k = c0; k < c1; ++k) {
                time[active[k]] += dt;
            }
        }
        active = std::move(still);
    }
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const Env& env           = envs[i];
        res[i].initial_nodes      = env.initial_nodes();
        res[i].best_nodes         = env.best_nodes();
        res[i].best_alpha_spiders = env.best_symbolic();
        res[i].final_nodes        = env.diagram().num_interior();
        res[i].steps              = env.steps_taken();
        res[i].cumulative_reward  = env.cumulative_reward();
        res[i].wall_time          = time[i];
    }
    return res;
}

} // namespace zx::ppo
