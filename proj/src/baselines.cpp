#include "zx/baselines.hpp"

#include "zx/errors.hpp"

#include <chrono>
#include <cmath>

namespace zx {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool is_kind(const Action& a, NodeActionKind k) {
    const auto* n = std::get_if<NodeAction>(&a);
    return n != nullptr && n->kind == k;
}

RunResult start(const Diagram& d) {
    RunResult r;
    r.initial_nodes      = d.num_interior();
    r.best_nodes         = d.num_interior();
    r.best_alpha_spiders = d.num_symbolic_spiders();
    return r;
}

void finish(RunResult& r, const Diagram& d, const BestTracker& best, Clock::time_point t0) {
    r.final_nodes        = d.num_interior();
    r.cumulative_reward  = static_cast<int>(r.initial_nodes) - static_cast<int>(r.final_nodes);
    r.best_nodes         = best.nodes;
    r.best_alpha_spiders = best.alpha;
    r.wall_time          = seconds_since(t0);
}

} // namespace

void BestTracker::observe(const Diagram& d) {
    if (d.in_unfuse_mode()) {
        return;
    }
    nodes = std::min(nodes, d.num_interior());
    alpha = std::min(alpha, d.num_symbolic_spiders());
}

RunResult greedy(const Diagram& d, Rng& rng, const GreedyConfig& cfg) {
    const auto  t0  = Clock::now();
    RunResult   res = start(d);
    BestTracker best(d);
    Diagram     cur = d;

    for (int step = 0; step < cfg.max_steps; ++step) {
        int                         top = -1;
        std::vector<RewriteOutcome> outs;
        std::vector<Action>         acts;
        for (const Action& a: action_mask(cur).actions()) {
            if (std::holds_alternative<StopAction>(a) || is_kind(a, NodeActionKind::StartUnfuse)) {
                continue;
            }
            RewriteOutcome o = zx::apply(cur, a);
            if (o.reward < 0 || o.reward < top) {
                continue;
            }
            if (o.reward > top) {
                top = o.reward;
                outs.clear();
                acts.clear();
            }
            outs.push_back(std::move(o));
            acts.push_back(a);
        }
        if (outs.empty()) {
            break;
        }
        std::uniform_int_distribution<std::size_t> pick(0, outs.size() - 1);
        const std::size_t                           k = pick(rng);
        cur = std::move(outs[k].diagram);
        res.actions.push_back(acts[k]);
        ++res.steps;
        best.observe(cur);
    }
    finish(res, cur, best, t0);
    return res;
}

void AnnealConfig::validate() const {
    if (!(t_start > 0) || !(c_ann > 0) || max_steps < 0) {
        throw InputError("annealing needs t_start > 0, c_ann > 0 and max_steps >= 0");
    }
}

double anneal_temperature(const AnnealConfig& cfg, int step) {
    return cfg.t_start * std::exp(-cfg.c_ann * step);
}

double acceptance_probability(double reward, double temperature) {
    if (reward >= 0) {
        return 1.0;
    }
    return std::exp(reward / temperature);
}

bool accept_move(double reward, double temperature, Rng& rng) {
    if (reward >= 0) {
        return true;
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return u(rng) < acceptance_probability(reward, temperature);
}

int acceptance_reward(const Action& a, int trueReward) {
    if (is_kind(a, NodeActionKind::StartUnfuse)) {
        return trueReward - 1;
    }
    if (is_kind(a, NodeActionKind::StopUnfuse)) {
        return trueReward + 1;
    }
    return trueReward;
}

RunResult simulated_annealing(const Diagram& d, const AnnealConfig& cfg, Rng& rng) {
    cfg.validate();
    const auto  t0  = Clock::now();
    RunResult   res = start(d);
    BestTracker best(d);
    Diagram     cur = d;

    for (int step = 0; step < cfg.max_steps; ++step) {
        std::vector<Action> acts = action_mask(cur).actions();
        std::erase_if(acts, [](const Action& a) { return std::holds_alternative<StopAction>(a); });
        if (acts.empty()) {
            break;
        }
        std::uniform_int_distribution<std::size_t> pick(0, acts.size() - 1);
        const Action&                               a = acts[pick(rng)];
        RewriteOutcome                              o = zx::apply(cur, a);
        ++res.steps;
        if (!accept_move(acceptance_reward(a, o.reward), anneal_temperature(cfg, step), rng)) {
            continue;
        }
        cur = std::move(o.diagram);
        res.actions.push_back(a);
        best.observe(cur);
    }
    finish(res, cur, best, t0);
    return res;
}

RunResult random_policy(const Diagram& d, Rng& rng, int maxSteps) {
    const auto  t0  = Clock::now();
    RunResult   res = start(d);
    BestTracker best(d);
    Diagram     cur = d;

    for (int step = 0; step < maxSteps; ++step) {
        const std::vector<Action> acts = action_mask(cur).actions();
        if (acts.empty()) {
            break;
        }
        std::uniform_int_distribution<std::size_t> pick(0, acts.size() - 1);
        const Action&                               a = acts[pick(rng)];
        res.actions.push_back(a);
        ++res.steps;
        if (std::holds_alternative<StopAction>(a)) {
            break;
        }
        cur = zx::apply(cur, a).diagram;
        best.observe(cur);
    }
    finish(res, cur, best, t0);
    return res;
}

} // namespace zx
