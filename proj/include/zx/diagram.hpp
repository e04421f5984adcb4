#pragma once

#include "zx/angle.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

namespace zx {

using NodeId = std::int32_t;

enum class NodeKind : std::uint8_t { Z, X, Hadamard, Input, Output };

constexpr bool is_spider(NodeKind k) {
    return k == NodeKind::Z || k == NodeKind::X;
}
constexpr bool is_boundary(NodeKind k) {
    return k == NodeKind::Input || k == NodeKind::Output;
}
constexpr NodeKind opposite_color(NodeKind k) {
    return k == NodeKind::Z ? NodeKind::X : NodeKind::Z;
}
std::string_view to_string(NodeKind k);

/// Unordered node pair, stored with lo <= hi.
struct EdgeKey {
    NodeId lo = 0;
    NodeId hi = 0;

    static EdgeKey of(NodeId a, NodeId b) { return a <= b ? EdgeKey{a, b} : EdgeKey{b, a}; }
    [[nodiscard]] NodeId other(NodeId v) const { return v == lo ? hi : lo; }

    auto operator<=>(const EdgeKey&) const = default;
};

struct Node {
    NodeKind kind = NodeKind::Z;
    Angle    angle;
    bool     unfuse_marked = false;
};

/// Undirected graph of typed ZX nodes.
///
/// Edges are stored with multiplicities so that rewrites can transiently create parallel
/// edges and self-loops; `auto_simplify` restores a simple graph. Boundary nodes are kept in
/// ordered lists: qubit i of the diagram's matrix is inputs()[i] / outputs()[i].
class Diagram {
public:
    NodeId add_node(NodeKind kind, Angle angle = {});
    NodeId add_spider(NodeKind kind, Angle angle = {}) { return add_node(kind, std::move(angle)); }
    NodeId add_input();
    NodeId add_output();
    /// Inserts a node with a caller-chosen id (used by deserialization); the id must be free.
    void insert_node(NodeId id, Node node);
    void remove_node(NodeId v);

    void add_edge(NodeId a, NodeId b, int count = 1);
    /// Removes one copy of the edge.
    void remove_edge(NodeId a, NodeId b);
    void set_multiplicity(NodeId a, NodeId b, int count);
    [[nodiscard]] int multiplicity(NodeId a, NodeId b) const;
    [[nodiscard]] bool connected(NodeId a, NodeId b) const { return multiplicity(a, b) > 0; }

    [[nodiscard]] bool        has_node(NodeId v) const { return nodes_.contains(v); }
    [[nodiscard]] const Node& node(NodeId v) const;
    Node&                     node(NodeId v);
    [[nodiscard]] NodeKind    kind(NodeId v) const { return node(v).kind; }

    /// Neighbor -> multiplicity; a self-loop appears as v -> count.
    [[nodiscard]] const std::map<NodeId, int>& neighbors(NodeId v) const;
    /// Number of edge ends at v; a self-loop contributes 2.
    [[nodiscard]] int degree(NodeId v) const;

    [[nodiscard]] std::vector<NodeId>  node_ids() const;
    /// Distinct node pairs (self-loops included), sorted.
    [[nodiscard]] std::vector<EdgeKey> edges() const;
    [[nodiscard]] std::size_t          num_nodes() const { return nodes_.size(); }
    [[nodiscard]] std::size_t          num_edges() const;
    [[nodiscard]] std::size_t          num_spiders() const;
    /// Spiders plus Hadamard boxes; the quantity that optimization minimizes and reports.
    [[nodiscard]] std::size_t num_interior() const { return nodes_.size() - inputs_.size() - outputs_.size(); }
    /// Spiders whose phase is not a concrete multiple of pi/2.
    [[nodiscard]] std::size_t          num_symbolic_spiders() const;

    [[nodiscard]] const std::vector<NodeId>& inputs() const { return inputs_; }
    [[nodiscard]] const std::vector<NodeId>& outputs() const { return outputs_; }
    void set_boundary(std::vector<NodeId> inputs, std::vector<NodeId> outputs);

    [[nodiscard]] std::optional<NodeId> marked_node() const;
    [[nodiscard]] bool in_unfuse_mode() const { return marked_node().has_value(); }
    [[nodiscard]] bool edge_marked(EdgeKey e) const { return marked_edges_.contains(e); }
    void               set_edge_marked(EdgeKey e, bool marked);
    [[nodiscard]] const std::set<EdgeKey>& marked_edges() const { return marked_edges_; }
    void               clear_marks();

    /// Largest symbol id in use, or -1.
    [[nodiscard]] SymbolId max_symbol() const;
    /// Id that the next add_node call will return.
    [[nodiscard]] NodeId next_id() const { return next_id_; }

    [[nodiscard]] bool is_simple() const;
    /// Throws InputError describing the first violated structural invariant.
    void validate() const;

    template <class F>
    void for_each_node(F&& f) const {
        for (const auto& [id, entry]: nodes_) {
            f(id, entry.node);
        }
    }

private:
    struct Entry {
        Node                  node;
        std::map<NodeId, int> adj;
    };
    Entry&       entry(NodeId v);
    const Entry& entry(NodeId v) const;

    std::map<NodeId, Entry> nodes_;
    std::set<EdgeKey>       marked_edges_;
    std::vector<NodeId>     inputs_;
    std::vector<NodeId>     outputs_;
    NodeId                  next_id_ = 0;
};

/// Structural equality up to node relabeling. Boundary order, kinds, phases (including symbol
/// ids), marks and edge multiplicities must all match.
bool are_isomorphic(const Diagram& a, const Diagram& b);

} // namespace zx
