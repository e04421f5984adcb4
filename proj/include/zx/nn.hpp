#pragma once

#include "zx/env.hpp"
#include "zx/rng.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace zx::nn {

using Mat    = Eigen::MatrixXd;
/// Activations: one row per node / edge / graph.
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Flat list of named parameter tensors; layers refer to entries by index.
struct Params {
    std::vector<std::string> names;
    std::vector<Mat>         values;

    int add(std::string name, Eigen::Index rows, Eigen::Index cols);
    [[nodiscard]] std::size_t size() const { return values.size(); }
    [[nodiscard]] std::size_t count() const;
    /// Zero tensors of identical shapes.
    [[nodiscard]] std::vector<Mat> zeros_like() const;
};

using Grads = std::vector<Mat>;

/// y = x W + b with W stored (in x out).
struct Dense {
    int w = -1;
    int b = -1;
};

struct MessageLayer {
    Dense psi;   ///< message from (receiver, sender, edge)
    Dense phi;   ///< node update from (node, summed messages)
    Dense theta; ///< edge update from (edge, summed endpoint features)
    int   node_in = 0;
    int   edge_in = 0;
};

struct NetConfig {
    int  width            = 128;
    int  layers           = 6;
    /// When false the stop counter input (and its entry in C) is fed as zero.
    bool use_stop_counter = true;
};

/// Message-passing trunk plus MLP heads. The policy owns node, edge and stop heads; the critic
/// owns its own trunk and a value head shaped like the stop head.
struct Network {
    NetConfig                 cfg;
    Params                    params;
    std::vector<MessageLayer> trunk;
    std::vector<Dense>        node_head;
    std::vector<Dense>        edge_head;
    std::vector<Dense>        global_head;
    bool                      is_policy = true;
};

Network make_policy(const NetConfig& cfg);
Network make_critic(const NetConfig& cfg);

/// Orthogonal weights (W^T W = gain^2 I for tall W, W W^T = gain^2 I for wide W), zero biases.
/// Gains: sqrt(2) for hidden layers, 0.01 for the last layer of every policy head, 1 for the
/// last critic layer.
void init_orthogonal(Network& net, Rng& rng);
Mat  orthogonal(Eigen::Index rows, Eigen::Index cols, double gain, Rng& rng);

/// Disjoint union of observations.
struct GraphBatch {
    int              num_graphs = 0;
    RowMat           nodes;
    RowMat           edges;
    std::vector<int> edge_a;
    std::vector<int> edge_b;
    std::vector<int> node_offset; ///< size num_graphs + 1
    std::vector<int> edge_offset; ///< size num_graphs + 1
    std::vector<int> node_graph;
    std::vector<int> edge_graph;
    RowMat           globals;      ///< num_graphs x 17
    Eigen::VectorXd  stop_counter; ///< per graph
};

GraphBatch make_batch(const std::vector<const Observation*>& obs);

struct MlpCache {
    std::vector<RowMat> inputs;  ///< input of each layer
    std::vector<RowMat> outputs; ///< post-activation (last layer linear)
};

struct LayerCache {
    RowMat x;        ///< node input
    RowMat e;        ///< edge input
    RowMat messages; ///< tanh outputs, two per edge (a<-b first, then b<-a)
    RowMat summed;   ///< aggregated messages per node
    RowMat pair_sum; ///< x[a] + x[b] per edge
    RowMat x_out;
    RowMat e_out;
};

struct ForwardCache {
    std::vector<LayerCache> layers;
    MlpCache                node_mlp;
    MlpCache                edge_mlp;
    MlpCache                global_mlp;
    RowMat                  x_final;
    RowMat                  e_final;
};

struct PolicyOutput {
    RowMat          node_logits; ///< N x 6
    RowMat          edge_logits; ///< M x 6
    Eigen::VectorXd stop_logits; ///< per graph
};

/// Policy forward over a batch; `cache` may be null when no backward pass follows.
PolicyOutput forward_policy(const Network& net, const GraphBatch& batch, ForwardCache* cache = nullptr);
/// Critic forward over a batch: one value per graph.
Eigen::VectorXd forward_critic(const Network& net, const GraphBatch& batch, ForwardCache* cache = nullptr);

/// Accumulates parameter gradients of a scalar loss into `grads`, given its gradients with
/// respect to the policy outputs. `cache` must come from forward_policy on the same batch.
void backward_policy(const Network& net, const GraphBatch& batch, const ForwardCache& cache, const RowMat& dNode,
                     const RowMat& dEdge, const Eigen::VectorXd& dStop, Grads& grads);
void backward_critic(const Network& net, const GraphBatch& batch, const ForwardCache& cache,
                     const Eigen::VectorXd& dValue, Grads& grads);

/// Unnormalized logits of graph g in flat action order (node-major, edge-major, Stop last).
Eigen::VectorXd flat_logits(const PolicyOutput& out, const GraphBatch& batch, int g);
/// Scatters a flat per-graph gradient back into output-shaped gradient buffers.
void scatter_flat(const Eigen::VectorXd& dFlat, const GraphBatch& batch, int g, RowMat& dNode, RowMat& dEdge,
                  Eigen::VectorXd& dStop);

/// Log-probabilities with masked entries at -infinity (probability exactly zero).
Eigen::VectorXd masked_log_softmax(const Eigen::VectorXd& logits, const std::vector<std::uint8_t>& mask);

/// exp(logp) on unmasked entries, exactly 0 elsewhere.
Eigen::VectorXd masked_probs(const Eigen::VectorXd& logp, const std::vector<std::uint8_t>& mask);

/// Convenience single-observation helpers.
Eigen::VectorXd policy_logits(const Network& net, const Observation& obs);
double          critic_value(const Network& net, const Observation& obs);

/// Throws TrainingFault naming the parameter norms when any output is not finite.
void check_finite(const Network& net, const Eigen::Ref<const RowMat>& values, const char* what);

double global_norm(const Grads& g);

// --- optimizer --------------------------------------------------------------------------------

struct AdamConfig {
    double lr      = 3e-4;
    double beta1   = 0.9;
    double beta2   = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    std::vector<Mat> m;
    std::vector<Mat> v;
    std::int64_t     t = 0;
};

AdamState make_adam(const Params& p);
void      adam_step(Params& p, const Grads& g, AdamState& s, const AdamConfig& cfg);

// --- checkpoints ------------------------------------------------------------------------------

/// Named tensors plus integer counters; see README for the byte layout.
struct Checkpoint {
    std::vector<std::pair<std::string, std::int64_t>> counters;
    std::vector<std::string>                          names;
    std::vector<Mat>                                  tensors;

    void               put(const std::string& name, const Mat& m);
    [[nodiscard]] const Mat* find(const std::string& name) const;
    void               set_counter(const std::string& name, std::int64_t v);
    [[nodiscard]] std::int64_t counter(const std::string& name, std::int64_t fallback = 0) const;
};

void       save_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::string& path);
std::string encode_checkpoint(const Checkpoint& c);
Checkpoint  decode_checkpoint(const std::string& bytes);

/// Stores params under `prefix` + name; loading checks every shape.
void store_params(Checkpoint& c, const std::string& prefix, const Params& p);
void load_params(const Checkpoint& c, const std::string& prefix, Params& p);

} // namespace zx::nn
