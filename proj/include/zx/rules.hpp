#pragma once

#include "zx/diagram.hpp"

#include <array>
#include <string_view>
#include <variant>
#include <vector>

namespace zx {

enum class NodeActionKind : std::uint8_t { ColorChange, HadamardFuse, HadamardUnfuse, Euler, StartUnfuse, StopUnfuse };
enum class EdgeActionKind : std::uint8_t { Fuse, Pi, Copy, BialgebraLeft, BialgebraRight, MarkEdge };

inline constexpr int kNodeActionKinds = 6;
inline constexpr int kEdgeActionKinds = 6;

std::string_view to_string(NodeActionKind k);
std::string_view to_string(EdgeActionKind k);

struct NodeAction {
    NodeId         node;
    NodeActionKind kind;
    bool           operator==(const NodeAction&) const = default;
};
struct EdgeAction {
    EdgeKey        edge;
    EdgeActionKind kind;
    bool           operator==(const EdgeAction&) const = default;
};
struct StopAction {
    bool operator==(const StopAction&) const = default;
};

using Action = std::variant<NodeAction, EdgeAction, StopAction>;

std::string describe(const Action& a);

struct RewriteOutcome {
    Diagram diagram;
    /// Node count before minus node count after automatic simplification.
    int     reward = 0;
};

/// Fixpoint of the automatic clean-up applied after every action: parallel same-color edges
/// merged, opposite-color parallel edges taken modulo two, plain self-loops dropped, Hadamard
/// self-loops turned into a pi phase, phase-0 degree-2 spiders removed, adjacent Hadamard pairs
/// cancelled, and components without boundary deleted.
void auto_simplify(Diagram& d);

/// Precondition check for one action. Never throws for unknown nodes or edges.
bool is_applicable(const Diagram& d, const Action& a);

/// Applies an applicable action and runs auto_simplify. Throws ContractError otherwise.
/// StopAction returns the diagram unchanged with reward 0.
RewriteOutcome apply(const Diagram& d, const Action& a);

/// Per-node / per-edge applicability, aligned with d.node_ids() and d.edges().
struct ActionMask {
    std::vector<NodeId>                                node_ids;
    std::vector<EdgeKey>                               edges;
    std::vector<std::array<bool, kNodeActionKinds>>    node;
    std::vector<std::array<bool, kEdgeActionKinds>>    edge;
    bool                                               stop = false;

    [[nodiscard]] std::size_t count() const;
    [[nodiscard]] std::size_t count(NodeActionKind k) const;
    [[nodiscard]] std::size_t count(EdgeActionKind k) const;
    [[nodiscard]] std::vector<Action> actions() const;
};

/// All applicable actions. In unfuse mode only MarkEdge on unmarked edges at the marked node
/// and StopUnfuse on the marked node are allowed; Stop is allowed exactly in normal mode.
ActionMask action_mask(const Diagram& d);

// Named rewrites. Each requires its precondition and applies auto_simplify.
RewriteOutcome fuse(const Diagram& d, EdgeKey e);
RewriteOutcome unfuse_start(const Diagram& d, NodeId v);
RewriteOutcome mark_edge(const Diagram& d, EdgeKey e);
RewriteOutcome unfuse_stop(const Diagram& d, NodeId v);
RewriteOutcome color_change(const Diagram& d, NodeId v);
RewriteOutcome pi_push(const Diagram& d, EdgeKey e);
RewriteOutcome copy(const Diagram& d, EdgeKey e);
RewriteOutcome bialgebra_left(const Diagram& d, EdgeKey e);
RewriteOutcome bialgebra_right(const Diagram& d, EdgeKey e);
RewriteOutcome euler(const Diagram& d, NodeId v);
RewriteOutcome hadamard_fuse(const Diagram& d, NodeId v);
RewriteOutcome hadamard_unfuse(const Diagram& d, NodeId v);

/// Z-X-Z (or X-Z-X) Clifford triple, in quarter turns, for the opposite-color chain that realizes
/// the same single-qubit map as the chain `first -> middle -> last` of color `outer`.
/// Exposed for testing.
std::array<int, 3> clifford_euler_flip(NodeKind outer, std::array<int, 3> quarterTurns);

} // namespace zx
