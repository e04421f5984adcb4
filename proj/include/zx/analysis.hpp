#pragma once

#include "zx/baselines.hpp"
#include "zx/nn.hpp"
#include "zx/rules.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace zx::analysis {

// --- evaluation -------------------------------------------------------------------------------

enum class Strategy { Greedy, Anneal, Random, Policy };

std::string_view      to_string(Strategy s);
/// Throws InputError for unknown names.
Strategy              parse_strategy(std::string_view name);

struct StrategySpec {
    Strategy           kind = Strategy::Greedy;
    int                max_steps = 200;
    AnnealConfig       anneal;
    /// Required for Strategy::Policy.
    const nn::Network* policy      = nullptr;
    bool               stop_action = true;
    bool               argmax      = false;
};

/// Runs the strategy on every diagram. Diagram i draws randomness from stream
/// (seed, strategy name, i), so results do not depend on `workers`.
std::vector<RunResult> run_strategy(const StrategySpec& spec, const std::vector<Diagram>& corpus,
                                    std::uint64_t seed, int workers = 1);

struct Summary {
    std::string            strategy;
    std::uint64_t          corpus_seed       = 0;
    std::uint64_t          seed              = 0;
    double                 mean_initial_nodes = 0.0;
    double                 mean_best_nodes   = 0.0;
    double                 mean_best_alpha   = 0.0;
    double                 mean_final_nodes  = 0.0;
    double                 mean_cum_reward   = 0.0;
    double                 mean_steps        = 0.0;
    double                 mean_time_s       = 0.0;
    std::vector<RunResult> per_diagram;
};

Summary summarize(std::string strategy, std::uint64_t corpusSeed, std::uint64_t seed, std::vector<RunResult> results);

/// Timing fields are named "wall_time" and "mean_time_s"; everything else is reproducible.
nlohmann::json to_json(const Summary& s, bool withPerDiagram = true);
nlohmann::json to_json(const RunResult& r, bool withActions = false);
nlohmann::json to_json(const Action& a);
/// One row per diagram: index, initial, best, best_alpha, final, cum_reward, steps, wall_time.
std::string    to_csv(const Summary& s);

// --- locality ---------------------------------------------------------------------------------

/// Induced sub-diagram on the nodes within `layer` hops of the action's node or edge endpoints.
/// Edges to excluded nodes are dropped; node ids and marks are kept.
/// Throws ContractError for Stop or for an anchor that is not in the diagram.
Diagram neighborhood(const Diagram& d, const Action& a, int layer);

/// max(P_layer / P_complete, P_complete / P_layer) - 1 with P = exp(logit), unnormalized.
double locality_epsilon(const nn::Network& policy, const Diagram& d, const Action& a, int layer, int stepsLeft = 200);

struct LocalityReport {
    int                 max_layer = 0;
    int                 samples   = 0;
    /// mean_epsilon[k] and max_epsilon[k] are over sampled actions at layer k + 1.
    std::vector<double> mean_epsilon;
    std::vector<double> max_epsilon;
};

/// Samples one non-Stop action per diagram from the policy and measures epsilon for layers
/// 1..maxLayer.
LocalityReport locality_report(const nn::Network& policy, const std::vector<Diagram>& corpus, std::uint64_t seed,
                               int maxLayer, int workers = 1);
nlohmann::json to_json(const LocalityReport& r);

// --- copy scenario ----------------------------------------------------------------------------

struct CopyScenario {
    Diagram diagram;
    /// Edge between the phaseless Z state and the phaseless X spider.
    EdgeKey edge;
    int     n_out   = 0;
    int     n_extra = 0;
};

/// Phaseless Z state on a phaseless X spider with n_out output legs; n_extra of those legs carry
/// a Z spider with a fresh symbolic phase. Not simplified.
CopyScenario copy_scenario(int nOut, int nExtra);

/// Cumulative reward of Copy on the designated edge followed by every available Fuse.
int copy_then_fuse_reward(const CopyScenario& s);

/// Probability that the policy picks Copy on the designated edge.
double copy_probability(const nn::Network& policy, const CopyScenario& s, int stepsLeft = 200);

// --- rule verification ------------------------------------------------------------------------

struct Violation {
    std::size_t diagram = 0;
    std::string action;
    double      deviation = 0.0;
};

struct VerifyReport {
    std::size_t            diagrams  = 0;
    std::size_t            checked   = 0;
    /// Source maps that vanish; any rewrite of them is consistent up to scalar.
    std::size_t            vanishing = 0;
    /// Diagrams whose contraction exceeds the oracle's index limit.
    std::size_t            skipped   = 0;
    double                 max_deviation = 0.0;
    std::vector<Violation> violations;
    /// Checked actions per kind name.
    std::map<std::string, std::size_t> per_kind;
};

/// Applies every applicable action (Stop excluded) to every diagram and compares oracle maps
/// under two random symbol assignments per action.
VerifyReport   verify_rules(const std::vector<Diagram>& corpus, std::uint64_t seed, int workers = 1,
                            double tol = 1e-9);
nlohmann::json to_json(const VerifyReport& r);

} // namespace zx::analysis
