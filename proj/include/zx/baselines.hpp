#pragma once

#include "zx/diagram.hpp"
#include "zx/rng.hpp"
#include "zx/rules.hpp"

#include <vector>

namespace zx {

/// Outcome of one optimization run on one diagram.
struct RunResult {
    std::size_t         initial_nodes      = 0;
    std::size_t         best_nodes         = 0;
    std::size_t         best_alpha_spiders = 0;
    std::size_t         final_nodes        = 0;
    int                 steps              = 0;
    /// Initial minus final node count (sum of per-step rewards).
    int                 cumulative_reward  = 0;
    double              wall_time          = 0.0;
    /// Applied actions in order; rejected annealing proposals are not listed.
    std::vector<Action> actions;
};

/// Running minimum of node and symbolic-spider counts, ignoring unfuse-mode states.
struct BestTracker {
    std::size_t nodes = 0;
    std::size_t alpha = 0;

    explicit BestTracker(const Diagram& d) : nodes(d.num_interior()), alpha(d.num_symbolic_spiders()) {}
    void observe(const Diagram& d);
};

struct GreedyConfig {
    int max_steps = 200;
};

/// Picks the highest-reward applicable action while that reward is non-negative, breaking ties
/// uniformly. StartUnfuse counts as -1 so the greedy strategy never enters unfuse mode.
RunResult greedy(const Diagram& d, Rng& rng, const GreedyConfig& cfg = {});

struct AnnealConfig {
    double t_start   = 0.5;
    double c_ann     = 1e-4;
    int    max_steps = 20000;

    /// Throws InputError for non-positive parameters.
    void validate() const;
};

/// T_start * exp(-c_ann * step).
double anneal_temperature(const AnnealConfig& cfg, int step);
/// exp(r / T) clipped to 1.
double acceptance_probability(double reward, double temperature);
/// Draws against acceptance_probability; non-negative rewards are always accepted.
bool accept_move(double reward, double temperature, Rng& rng);
/// Reward used for acceptance: StartUnfuse is charged -1 and StopUnfuse is refunded by 1.
int acceptance_reward(const Action& a, int trueReward);

/// Uniform proposals over applicable rewrites (Stop excluded), Metropolis acceptance with an
/// exponentially decaying temperature. Reports the best state seen.
RunResult simulated_annealing(const Diagram& d, const AnnealConfig& cfg, Rng& rng);

/// Uniformly random applicable action (Stop included) for up to `maxSteps` steps.
RunResult random_policy(const Diagram& d, Rng& rng, int maxSteps = 200);

} // namespace zx
