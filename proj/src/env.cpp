#include "zx/env.hpp"

#include "zx/errors.hpp"

#include <algorithm>
#include <string>

namespace zx {

int angle_class(const Node& n) {
    if (!is_spider(n.kind)) {
        return 5;
    }
    if (!n.angle.is_concrete()) {
        return 4;
    }
    return n.angle.quarter_turns();
}

int num_actions(int numNodes, int numEdges) {
    return kNodeActionKinds * numNodes + kEdgeActionKinds * numEdges + 1;
}

Action action_at(const Observation& obs, int index) {
    if (index < 0 || index >= obs.num_actions()) {
        throw ContractError("action index " + std::to_string(index) + " out of range");
    }
    const int nodeBlock = kNodeActionKinds * obs.num_nodes();
    if (index < nodeBlock) {
        return NodeAction{obs.node_ids[static_cast<std::size_t>(index / kNodeActionKinds)],
                          static_cast<NodeActionKind>(index % kNodeActionKinds)};
    }
    if (index == obs.stop_index()) {
        return StopAction{};
    }
    const int e = index - nodeBlock;
    return EdgeAction{obs.edges[static_cast<std::size_t>(e / kEdgeActionKinds)],
                      static_cast<EdgeActionKind>(e % kEdgeActionKinds)};
}

int index_of(const Observation& obs, const Action& a) {
    if (const auto* n = std::get_if<NodeAction>(&a)) {
        const auto it = std::lower_bound(obs.node_ids.begin(), obs.node_ids.end(), n->node);
        if (it == obs.node_ids.end() || *it != n->node) {
            throw ContractError("unknown node in action " + describe(a));
        }
        return static_cast<int>(it - obs.node_ids.begin()) * kNodeActionKinds + static_cast<int>(n->kind);
    }
    if (const auto* e = std::get_if<EdgeAction>(&a)) {
        const auto it = std::lower_bound(obs.edges.begin(), obs.edges.end(), e->edge);
        if (it == obs.edges.end() || *it != e->edge) {
            throw ContractError("unknown edge in action " + describe(a));
        }
        return kNodeActionKinds * obs.num_nodes() + static_cast<int>(it - obs.edges.begin()) * kEdgeActionKinds +
               static_cast<int>(e->kind);
    }
    return obs.stop_index();
}

Observation observe(const Diagram& d, int stepsLeft, const EnvConfig& cfg) {
    Observation o;
    o.node_ids = d.node_ids();
    o.edges    = d.edges();
    const int V = o.num_nodes();
    const int E = o.num_edges();

    o.node_features = Eigen::MatrixXd::Zero(V, kNodeFeatures);
    double spiders = 0, zs = 0, xs = 0, hs = 0, zero = 0, pi = 0, sym = 0;
    for (int i = 0; i < V; ++i) {
        const Node& n = d.node(o.node_ids[static_cast<std::size_t>(i)]);
        o.node_features(i, static_cast<int>(n.kind)) = 1.0;
        const int cls                                = angle_class(n);
        o.node_features(i, 5 + cls)                  = 1.0;
        o.node_features(i, 11)                       = n.unfuse_marked ? 1.0 : 0.0;
        if (is_spider(n.kind)) {
            spiders += 1;
            (n.kind == NodeKind::Z ? zs : xs) += 1;
            zero += cls == 0 ? 1 : 0;
            pi += cls == 2 ? 1 : 0;
            sym += cls == 4 ? 1 : 0;
        } else if (n.kind == NodeKind::Hadamard) {
            hs += 1;
        }
    }

    o.edge_features = Eigen::MatrixXd::Zero(E, kEdgeFeatures);
    o.edge_index.reserve(static_cast<std::size_t>(E));
    for (int j = 0; j < E; ++j) {
        const EdgeKey& e = o.edges[static_cast<std::size_t>(j)];
        const auto     a = std::lower_bound(o.node_ids.begin(), o.node_ids.end(), e.lo) - o.node_ids.begin();
        const auto     b = std::lower_bound(o.node_ids.begin(), o.node_ids.end(), e.hi) - o.node_ids.begin();
        o.edge_index.emplace_back(static_cast<int>(a), static_cast<int>(b));
        o.edge_features(j, 0) = d.edge_marked(e) ? 1.0 : 0.0;
    }

    const ActionMask m = action_mask(d);
    o.mask.assign(static_cast<std::size_t>(num_actions(V, E)), 0);
    bool anyOther = false;
    for (int i = 0; i < V; ++i) {
        for (int k = 0; k < kNodeActionKinds; ++k) {
            const bool ok = m.node[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
            o.mask[static_cast<std::size_t>(kNodeActionKinds * i + k)] = ok ? 1 : 0;
            anyOther |= ok;
        }
    }
    for (int j = 0; j < E; ++j) {
        for (int k = 0; k < kEdgeActionKinds; ++k) {
            const bool ok = m.edge[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
            o.mask[static_cast<std::size_t>(kNodeActionKinds * V + kEdgeActionKinds * j + k)] = ok ? 1 : 0;
            anyOther |= ok;
        }
    }
    o.mask.back() = (m.stop && (cfg.stop_action || !anyOther)) ? 1 : 0;

    o.stop_counter = std::min(kStopCounterCap, stepsLeft);
    auto per       = [](double x, double denom) { return denom > 0 ? x / denom : 0.0; };
    const double  edges = static_cast<double>(E);
    o.globals           = Eigen::VectorXd::Zero(kGlobalFeatures);
    o.globals[kGNodes]          = static_cast<double>(V);
    o.globals[kGEdges]          = edges;
    o.globals[kGZ]              = per(zs, spiders);
    o.globals[kGX]              = per(xs, spiders);
    o.globals[kGHadamard]       = per(hs, spiders);
    o.globals[kGZeroAngle]      = per(zero, spiders);
    o.globals[kGPiAngle]        = per(pi, spiders);
    o.globals[kGSymbolic]       = per(sym, spiders);
    o.globals[kGHadamardFuse]   = per(static_cast<double>(m.count(NodeActionKind::HadamardFuse)), spiders);
    o.globals[kGEuler]          = per(static_cast<double>(m.count(NodeActionKind::Euler)), spiders);
    o.globals[kGFuse]           = per(static_cast<double>(m.count(EdgeActionKind::Fuse)), edges);
    o.globals[kGPi]             = per(static_cast<double>(m.count(EdgeActionKind::Pi)), edges);
    o.globals[kGCopy]           = per(static_cast<double>(m.count(EdgeActionKind::Copy)), edges);
    o.globals[kGBialgebraRight] = per(static_cast<double>(m.count(EdgeActionKind::BialgebraRight)), edges);
    o.globals[kGBialgebraLeft]  = per(static_cast<double>(m.count(EdgeActionKind::BialgebraLeft)), edges);
    o.globals[kGStopCounter]    = o.stop_counter;
    o.globals[kGUnfuseMode]     = d.in_unfuse_mode() ? 1.0 : 0.0;
    return o;
}

const Observation& Env::reset(Diagram d) {
    diagram_           = std::move(d);
    steps_left_        = cfg_.max_steps;
    finished_          = false;
    cumulative_reward_ = 0;
    initial_nodes_     = diagram_.num_interior();
    best_nodes_        = initial_nodes_;
    best_symbolic_     = diagram_.num_symbolic_spiders();
    obs_               = observe(diagram_, steps_left_, cfg_);
    return obs_;
}

void Env::track_best() {
    if (diagram_.in_unfuse_mode()) {
        return;
    }
    best_nodes_    = std::min(best_nodes_, diagram_.num_interior());
    best_symbolic_ = std::min(best_symbolic_, diagram_.num_symbolic_spiders());
}

StepResult Env::step(int actionIndex) {
    if (finished_) {
        throw ContractError("step on a finished episode");
    }
    if (actionIndex < 0 || actionIndex >= obs_.num_actions() || obs_.mask[static_cast<std::size_t>(actionIndex)] == 0) {
        throw ContractError("masked action index " + std::to_string(actionIndex));
    }
    const Action a = action_at(obs_, actionIndex);
    StepResult   r;
    --steps_left_;
    if (std::holds_alternative<StopAction>(a)) {
        r.done = true;
    } else {
        RewriteOutcome out = zx::apply(diagram_, a);
        diagram_           = std::move(out.diagram);
        r.reward           = out.reward;
        track_best();
    }
    cumulative_reward_ += r.reward;
    if (!r.done && steps_left_ <= 0) {
        r.done      = true;
        r.truncated = true;
    }
    finished_ = r.done;
    obs_      = observe(diagram_, steps_left_, cfg_);
    return r;
}

} // namespace zx
