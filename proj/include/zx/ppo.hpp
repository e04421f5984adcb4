#pragma once

#include "zx/baselines.hpp"
#include "zx/env.hpp"
#include "zx/nn.hpp"
#include "zx/sampler.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace zx::ppo {

/// Switches for the ablation variants.
struct Flags {
    bool stop_action       = true;
    bool stop_counter      = true;
    bool entropy_bonus     = true;
    bool entropy_annealing = true;
    bool clip_annealing    = true;
    bool kl_early_stop     = true;
};

struct PPOConfig {
    int          n_env       = 90;
    int          n_max       = 1000;
    int          n_minibatch = 3000;
    int          n_train     = 10;
    double       c_kl        = 0.01;
    double       clip        = 0.2;
    double       entropy     = 0.1;
    double       c_absgrad   = 100.0;
    double       c_normgrad  = 0.5;
    double       gamma       = 0.99;
    double       lambda      = 0.9;
    double       lr          = 3e-4;
    double       beta1       = 0.9;
    double       beta2       = 0.999;
    double       value_coef  = 0.5;
    std::int64_t total_steps = 36'000'000;
    /// Trajectory cap during training.
    int          max_steps   = 200;
    /// Graphs per forward/backward shard inside a minibatch (memory bound only).
    int          shard       = 256;
    int          width       = 128;
    int          layers      = 6;
    Flags        flags;

    /// Throws InputError on non-positive sizes or rates.
    void validate() const;

    [[nodiscard]] double clip_at(double progress) const;
    [[nodiscard]] double entropy_at(double progress) const;
    [[nodiscard]] nn::NetConfig net() const;
    [[nodiscard]] EnvConfig     env() const;
    [[nodiscard]] nn::AdamConfig adam() const;
};

// --- advantages -------------------------------------------------------------------------------

struct Advantages {
    std::vector<double> advantages;
    std::vector<double> returns;
};

/// Generalized advantage estimation over one environment's consecutive steps.
/// next_values[t] is V(s_{t+1}); it is ignored when step t terminated (done and not truncated).
/// A truncated step bootstraps from next_values[t] but does not carry the trace backwards
/// across the episode boundary.
Advantages gae(const std::vector<double>& rewards, const std::vector<double>& values,
               const std::vector<double>& next_values, const std::vector<std::uint8_t>& done,
               const std::vector<std::uint8_t>& truncated, double gamma, double lambda);

// --- rollouts ---------------------------------------------------------------------------------

struct Transition {
    Observation obs;
    int         action     = 0;
    double      logp       = 0.0;
    double      value      = 0.0;
    double      reward     = 0.0;
    double      next_value = 0.0;
    bool        done       = false;
    bool        truncated  = false;
};

/// Endless supply of training diagrams; diagram k is drawn from stream (seed, "train", k).
struct DiagramSource {
    SamplerConfig sampler;
    std::uint64_t seed = 0;
    std::uint64_t next = 0;

    Diagram draw();
};

/// n_env environments stepped in lockstep; episodes restart from the source when they end.
struct VecEnv {
    std::vector<Env> envs;
    DiagramSource    source;

    VecEnv(int n, const EnvConfig& cfg, DiagramSource src);
    void reset_all();
};

struct Rollout {
    /// Env-major: steps of env 0 first.
    std::vector<Transition> steps;
    std::vector<double>     advantages;
    std::vector<double>     returns;
    /// Cumulative rewards of episodes that ended during this rollout.
    std::vector<double>     episode_returns;
};

/// Steps every environment n_max times with actions sampled from the policy, then computes
/// advantages. Trajectories still running at the end are bootstrapped from the critic.
Rollout collect_rollout(const nn::Network& policy, const nn::Network& critic, VecEnv& envs, int nMax,
                        const PPOConfig& cfg, Rng& rng);

/// Index drawn from a masked distribution given its log-probabilities.
int sample_action(const Eigen::VectorXd& logp, const std::vector<std::uint8_t>& mask, Rng& rng);

// --- update -----------------------------------------------------------------------------------

struct Agent {
    nn::Network   policy;
    nn::Network   critic;
    nn::AdamState adam_policy;
    nn::AdamState adam_critic;
};

Agent make_agent(const PPOConfig& cfg, std::uint64_t seed);

struct LossCoefficients {
    double clip       = 0.2;
    double entropy    = 0.1;
    double value_coef = 0.5;
};

struct MinibatchStats {
    double policy_loss = 0.0;
    double value_loss  = 0.0;
    double entropy     = 0.0;
    double approx_kl   = 0.0;
    double clip_frac   = 0.0;
    int    samples     = 0;
};

/// Loss of one minibatch and its gradients (accumulated into the two gradient buffers, already
/// divided by the minibatch size). `advantages` must be normalized by the caller.
MinibatchStats minibatch_gradients(const Agent& agent, const std::vector<const Transition*>& samples,
                                   const std::vector<double>& advantages, const std::vector<double>& returns,
                                   const LossCoefficients& coef, int shard, nn::Grads& gPolicy, nn::Grads& gCritic);

/// Mean 0, variance 1 (population); constant inputs map to zeros.
std::vector<double> normalize(const std::vector<double>& x);

/// Clamps every component to [-absClip, absClip], then rescales both buffers jointly so their
/// global norm is at most normClip. Returns the norm before rescaling.
double clip_gradients(nn::Grads& a, nn::Grads& b, double absClip, double normClip);

struct UpdateMetrics {
    double policy_loss = 0.0;
    double value_loss  = 0.0;
    double entropy     = 0.0;
    double approx_kl   = 0.0;
    double clip_frac   = 0.0;
    int    epochs      = 0;
    bool   early_stop  = false;
    double grad_norm   = 0.0;
};

/// Several epochs of shuffled minibatch ADAM steps; stops after an epoch whose mean approximate
/// KL exceeds c_KL when the flag is on.
UpdateMetrics ppo_update(Agent& agent, const Rollout& batch, const PPOConfig& cfg, double progress, Rng& rng);

// --- training ---------------------------------------------------------------------------------

struct TrainOptions {
    std::string   checkpoint_path;
    std::string   metrics_path;
    /// Checkpoint every this many updates (the final state is always written).
    int           checkpoint_every = 10;
    bool          resume           = true;
    std::uint64_t seed             = 0;
    bool          quiet            = false;
};

struct TrainSummary {
    std::int64_t steps   = 0;
    std::int64_t updates = 0;
    double       last_mean_cum_reward = 0.0;
};

/// Alternates collect and update until total_steps environment steps. Resumes from
/// checkpoint_path when it exists and resume is set.
TrainSummary train(const PPOConfig& cfg, const SamplerConfig& sampler, const TrainOptions& opt);

nn::Checkpoint save_agent(const Agent& agent, const PPOConfig& cfg);
/// Restores networks and optimizer state; network shape comes from the checkpoint counters.
Agent load_agent(const nn::Checkpoint& c);
/// Policy network only, for evaluation.
nn::Network load_policy(const std::string& path);

// --- evaluation -------------------------------------------------------------------------------

struct PolicyRunConfig {
    int  max_steps   = 200;
    bool stop_action = true;
    /// Take the most likely action instead of sampling.
    bool argmax      = false;
};

/// Runs the policy on every diagram (batched forward passes across diagrams). Diagram i uses
/// stream (seed, "policy", i), so results do not depend on batching.
std::vector<RunResult> run_policy(const nn::Network& policy, const std::vector<Diagram>& corpus,
                                  std::uint64_t seed, const PolicyRunConfig& cfg = {});

} // namespace zx::ppo
