#pragma once

#include "zx/diagram.hpp"
#include "zx/rules.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace zx {

inline constexpr int kNodeFeatures   = 12;
inline constexpr int kEdgeFeatures   = 1;
inline constexpr int kGlobalFeatures = 17;
inline constexpr int kStopCounterCap = 20;

/// Positions inside the global vector C.
enum GlobalIndex : int {
    kGNodes = 0,
    kGEdges,
    kGZ,
    kGX,
    kGHadamard,
    kGZeroAngle,
    kGPiAngle,
    kGSymbolic,
    kGHadamardFuse,
    kGEuler,
    kGFuse,
    kGPi,
    kGCopy,
    kGBialgebraRight,
    kGBialgebraLeft,
    kGStopCounter,
    kGUnfuseMode,
};

/// Network input for one diagram. Rows of node_features follow node_ids (sorted), rows of
/// edge_features follow edges (sorted); edge_index holds row positions of the two endpoints.
struct Observation {
    std::vector<NodeId>              node_ids;
    std::vector<EdgeKey>             edges;
    std::vector<std::pair<int, int>> edge_index;
    Eigen::MatrixXd                  node_features;
    Eigen::MatrixXd                  edge_features;
    Eigen::VectorXd                  globals;
    /// One entry per flat action index.
    std::vector<std::uint8_t>        mask;
    int                              stop_counter = 0;

    [[nodiscard]] int num_nodes() const { return static_cast<int>(node_ids.size()); }
    [[nodiscard]] int num_edges() const { return static_cast<int>(edges.size()); }
    [[nodiscard]] int num_actions() const { return static_cast<int>(mask.size()); }
    [[nodiscard]] int stop_index() const { return num_actions() - 1; }
};

/// Angle class column (0..5) inside the node one-hot block: 0, pi/2, pi, 3pi/2, symbolic, none.
int angle_class(const Node& n);

/// Flat layout: node i kind k -> 6i+k, edge j kind k -> 6|V|+6j+k, Stop -> 6|V|+6|E|.
int    num_actions(int numNodes, int numEdges);
Action action_at(const Observation& obs, int index);
int    index_of(const Observation& obs, const Action& a);

struct EnvConfig {
    int  max_steps   = 200;
    /// When false, Stop is only offered if no other action is available.
    bool stop_action = true;
};

/// Pure function of (diagram, steps left).
Observation observe(const Diagram& d, int stepsLeft, const EnvConfig& cfg = {});

struct StepResult {
    int  reward    = 0;
    bool done      = false;
    bool truncated = false;
};

/// Single rewriting episode with a step budget.
class Env {
public:
    explicit Env(EnvConfig cfg = {}) : cfg_(cfg) {}

    const Observation& reset(Diagram d);
    /// Throws ContractError for a masked or out-of-range index, or after the episode ended.
    StepResult step(int actionIndex);

    [[nodiscard]] const Observation& observation() const { return obs_; }
    [[nodiscard]] const Diagram&     diagram() const { return diagram_; }
    [[nodiscard]] const EnvConfig&   config() const { return cfg_; }
    [[nodiscard]] int                steps_left() const { return steps_left_; }
    [[nodiscard]] int                steps_taken() const { return cfg_.max_steps - steps_left_; }
    [[nodiscard]] bool               finished() const { return finished_; }
    [[nodiscard]] int                cumulative_reward() const { return cumulative_reward_; }
    [[nodiscard]] std::size_t        initial_nodes() const { return initial_nodes_; }
    /// Fewest interior nodes / symbolic spiders seen so far (tracked independently, outside unfuse mode).
    [[nodiscard]] std::size_t        best_nodes() const { return best_nodes_; }
    [[nodiscard]] std::size_t        best_symbolic() const { return best_symbolic_; }

private:
    void track_best();

    EnvConfig   cfg_;
    Diagram     diagram_;
    Observation obs_;
    int         steps_left_        = 0;
    bool        finished_          = true;
    int         cumulative_reward_ = 0;
    std::size_t initial_nodes_     = 0;
    std::size_t best_nodes_        = 0;
    std::size_t best_symbolic_     = 0;
};

} // namespace zx
