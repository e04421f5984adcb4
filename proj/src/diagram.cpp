#include "zx/diagram.hpp"

#include "zx/errors.hpp"

#include <algorithm>
#include <deque>
#include <string>

namespace zx {

std::string_view to_string(NodeKind k) {
    switch (k) {
    case NodeKind::Z: return "Z";
    case NodeKind::X: return "X";
    case NodeKind::Hadamard: return "H";
    case NodeKind::Input: return "IN";
    case NodeKind::Output: return "OUT";
    }
    return "?";
}

Diagram::Entry& Diagram::entry(NodeId v) {
    const auto it = nodes_.find(v);
    if (it == nodes_.end()) {
        throw ContractError("no node " + std::to_string(v));
    }
    return it->second;
}

const Diagram::Entry& Diagram::entry(NodeId v) const {
    const auto it = nodes_.find(v);
    if (it == nodes_.end()) {
        throw ContractError("no node " + std::to_string(v));
    }
    return it->second;
}

NodeId Diagram::add_node(NodeKind kind, Angle angle) {
    const NodeId id = next_id_++;
    nodes_.emplace(id, Entry{Node{kind, std::move(angle), false}, {}});
    return id;
}

NodeId Diagram::add_input() {
    const NodeId id = add_node(NodeKind::Input);
    inputs_.push_back(id);
    return id;
}

NodeId Diagram::add_output() {
    const NodeId id = add_node(NodeKind::Output);
    outputs_.push_back(id);
    return id;
}

void Diagram::insert_node(NodeId id, Node node) {
    if (id < 0 || nodes_.contains(id)) {
        throw ContractError("node id " + std::to_string(id) + " unavailable");
    }
    nodes_.emplace(id, Entry{std::move(node), {}});
    next_id_ = std::max(next_id_, id + 1);
}

void Diagram::remove_node(NodeId v) {
    auto& e = entry(v);
    for (const auto& [w, m]: e.adj) {
        if (w != v) {
            nodes_.at(w).adj.erase(v);
        }
        marked_edges_.erase(EdgeKey::of(v, w));
    }
    nodes_.erase(v);
    std::erase(inputs_, v);
    std::erase(outputs_, v);
}

void Diagram::add_edge(NodeId a, NodeId b, int count) {
    if (count <= 0) {
        return;
    }
    entry(a).adj[b] += count;
    if (a != b) {
        entry(b).adj[a] += count;
    }
}

void Diagram::remove_edge(NodeId a, NodeId b) {
    set_multiplicity(a, b, multiplicity(a, b) - 1);
}

void Diagram::set_multiplicity(NodeId a, NodeId b, int count) {
    auto& ea = entry(a);
    auto& eb = entry(b);
    if (count <= 0) {
        ea.adj.erase(b);
        eb.adj.erase(a);
        marked_edges_.erase(EdgeKey::of(a, b));
        return;
    }
    ea.adj[b] = count;
    eb.adj[a] = count;
}

int Diagram::multiplicity(NodeId a, NodeId b) const {
    const auto& adj = entry(a).adj;
    const auto  it  = adj.find(b);
    return it == adj.end() ? 0 : it->second;
}

const Node& Diagram::node(NodeId v) const {
    return entry(v).node;
}

Node& Diagram::node(NodeId v) {
    return entry(v).node;
}

const std::map<NodeId, int>& Diagram::neighbors(NodeId v) const {
    return entry(v).adj;
}

int Diagram::degree(NodeId v) const {
    int d = 0;
    for (const auto& [w, m]: entry(v).adj) {
        d += (w == v) ? 2 * m : m;
    }
    return d;
}

std::vector<NodeId> Diagram::node_ids() const {
    std::vector<NodeId> ids;
    ids.reserve(nodes_.size());
    for (const auto& [id, e]: nodes_) {
        ids.push_back(id);
    }
    return ids;
}

std::vector<EdgeKey> Diagram::edges() const {
    std::vector<EdgeKey> out;
    for (const auto& [v, e]: nodes_) {
        for (const auto& [w, m]: e.adj) {
            if (v <= w) {
                out.push_back({v, w});
            }
        }
    }
    return out;
}

std::size_t Diagram::num_edges() const {
    std::size_t n = 0;
    for (const auto& [v, e]: nodes_) {
        for (const auto& [w, m]: e.adj) {
            n += (v <= w) ? 1 : 0;
        }
    }
    return n;
}

std::size_t Diagram::num_spiders() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const auto& kv) {
        return is_spider(kv.second.node.kind);
    }));
}

std::size_t Diagram::num_symbolic_spiders() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const auto& kv) {
        return is_spider(kv.second.node.kind) && !kv.second.node.angle.is_concrete();
    }));
}

void Diagram::set_boundary(std::vector<NodeId> inputs, std::vector<NodeId> outputs) {
    inputs_  = std::move(inputs);
    outputs_ = std::move(outputs);
}

std::optional<NodeId> Diagram::marked_node() const {
    for (const auto& [id, e]: nodes_) {
        if (e.node.unfuse_marked) {
            return id;
        }
    }
    return std::nullopt;
}

void Diagram::set_edge_marked(EdgeKey e, bool marked) {
    if (marked) {
        if (!connected(e.lo, e.hi)) {
            throw ContractError("cannot mark a missing edge");
        }
        marked_edges_.insert(e);
    } else {
        marked_edges_.erase(e);
    }
}

void Diagram::clear_marks() {
    marked_edges_.clear();
    for (auto& [id, e]: nodes_) {
        e.node.unfuse_marked = false;
    }
}

SymbolId Diagram::max_symbol() const {
    SymbolId m = -1;
    for (const auto& [id, e]: nodes_) {
        if (!e.node.angle.symbols().empty()) {
            m = std::max(m, e.node.angle.symbols().rbegin()->first);
        }
    }
    return m;
}

bool Diagram::is_simple() const {
    for (const auto& [v, e]: nodes_) {
        for (const auto& [w, m]: e.adj) {
            if (w == v || m != 1) {
                return false;
            }
        }
    }
    return true;
}

void Diagram::validate() const {
    auto fail = [](NodeId v, const std::string& what) {
        throw InputError("node " + std::to_string(v) + ": " + what);
    };
    int nMarked = 0;
    for (const auto& [v, e]: nodes_) {
        for (const auto& [w, m]: e.adj) {
            if (w == v) {
                fail(v, "self-loop");
            }
            if (m != 1) {
                fail(v, "parallel edges to node " + std::to_string(w));
            }
        }
        const int  deg  = degree(v);
        const auto kind = e.node.kind;
        if (is_boundary(kind) && deg != 1) {
            fail(v, "boundary node has degree " + std::to_string(deg) + ", expected 1");
        }
        if (kind == NodeKind::Hadamard && deg != 2) {
            fail(v, "Hadamard node has degree " + std::to_string(deg) + ", expected 2");
        }
        if (!is_spider(kind) && !e.node.angle.is_zero()) {
            fail(v, "non-spider node carries a phase");
        }
        if (e.node.unfuse_marked) {
            ++nMarked;
            if (!is_spider(kind)) {
                fail(v, "only spiders can be marked for unfusing");
            }
        }
        if (kind == NodeKind::Input && std::count(inputs_.begin(), inputs_.end(), v) != 1) {
            fail(v, "input node missing from the input list");
        }
        if (kind == NodeKind::Output && std::count(outputs_.begin(), outputs_.end(), v) != 1) {
            fail(v, "output node missing from the output list");
        }
    }
    for (const NodeId v: inputs_) {
        if (!has_node(v) || kind(v) != NodeKind::Input) {
            throw InputError("inputs list entry " + std::to_string(v) + " is not an input node");
        }
    }
    for (const NodeId v: outputs_) {
        if (!has_node(v) || kind(v) != NodeKind::Output) {
            throw InputError("outputs list entry " + std::to_string(v) + " is not an output node");
        }
    }
    if (nMarked > 1) {
        throw InputError("more than one node marked for unfusing");
    }
    const auto marked = marked_node();
    for (const auto& e: marked_edges_) {
        if (!marked || (e.lo != *marked && e.hi != *marked)) {
            throw InputError("marked edge not incident to the marked node");
        }
    }
    std::set<NodeId>   seen;
    std::deque<NodeId> queue;
    for (const NodeId v: inputs_) {
        queue.push_back(v);
    }
    for (const NodeId v: outputs_) {
        queue.push_back(v);
    }
    while (!queue.empty()) {
        const NodeId v = queue.front();
        queue.pop_front();
        if (!seen.insert(v).second) {
            continue;
        }
        for (const auto& [w, m]: neighbors(v)) {
            queue.push_back(w);
        }
    }
    if (seen.size() != nodes_.size()) {
        for (const auto& [v, e]: nodes_) {
            if (!seen.contains(v)) {
                fail(v, "not connected to any input or output");
            }
        }
    }
}

namespace {

struct IsoSearch {
    const Diagram&              a;
    const Diagram&              b;
    std::vector<NodeId>         order;
    std::map<NodeId, NodeId>    fwd;
    std::map<NodeId, NodeId>    bwd;
    std::map<NodeId, int>       degA;
    std::map<NodeId, int>       degB;

    bool same_label(NodeId u, NodeId v) const {
        const auto& nu = a.node(u);
        const auto& nv = b.node(v);
        return nu.kind == nv.kind && nu.angle == nv.angle && nu.unfuse_marked == nv.unfuse_marked &&
               degA.at(u) == degB.at(v);
    }

    bool consistent(NodeId u, NodeId v) const {
        for (const auto& [w, m]: a.neighbors(u)) {
            if (w == u) {
                if (b.multiplicity(v, v) != m) {
                    return false;
                }
                continue;
            }
            const auto it = fwd.find(w);
            if (it != fwd.end()) {
                if (b.multiplicity(v, it->second) != m ||
                    a.edge_marked(EdgeKey::of(u, w)) != b.edge_marked(EdgeKey::of(v, it->second))) {
                    return false;
                }
            }
        }
        for (const auto& [w, m]: b.neighbors(v)) {
            const auto it = bwd.find(w);
            if (w != v && it != bwd.end() && a.multiplicity(u, it->second) != m) {
                return false;
            }
        }
        return b.multiplicity(v, v) == a.multiplicity(u, u);
    }

    bool assign(NodeId u, NodeId v) {
        if (!same_label(u, v) || !consistent(u, v)) {
            return false;
        }
        fwd[u] = v;
        bwd[v] = u;
        return true;
    }

    void unassign(NodeId u) {
        bwd.erase(fwd.at(u));
        fwd.erase(u);
    }

    bool search(std::size_t i) {
        if (i == order.size()) {
            return true;
        }
        const NodeId u = order[i];
        if (fwd.contains(u)) {
            return search(i + 1);
        }
        // Candidates: unmapped neighbors of an already mapped neighbor, else everything.
        std::vector<NodeId> candidates;
        for (const auto& [w, m]: a.neighbors(u)) {
            const auto it = fwd.find(w);
            if (w != u && it != fwd.end()) {
                for (const auto& [x, mx]: b.neighbors(it->second)) {
                    if (!bwd.contains(x)) {
                        candidates.push_back(x);
                    }
                }
                break;
            }
        }
        if (candidates.empty()) {
            for (const NodeId x: b.node_ids()) {
                if (!bwd.contains(x)) {
                    candidates.push_back(x);
                }
            }
        }
        for (const NodeId v: candidates) {
            if (assign(u, v)) {
                if (search(i + 1)) {
                    return true;
                }
                unassign(u);
            }
        }
        return false;
    }
};

} // namespace

bool are_isomorphic(const Diagram& a, const Diagram& b) {
    if (a.num_nodes() != b.num_nodes() || a.num_edges() != b.num_edges() ||
        a.inputs().size() != b.inputs().size() || a.outputs().size() != b.outputs().size() ||
        a.marked_edges().size() != b.marked_edges().size()) {
        return false;
    }
    IsoSearch s{a, b, {}, {}, {}, {}, {}};
    for (const NodeId v: a.node_ids()) {
        s.degA[v] = a.degree(v);
    }
    for (const NodeId v: b.node_ids()) {
        s.degB[v] = b.degree(v);
    }
    std::set<NodeId>   seen;
    std::deque<NodeId> queue;
    auto               push = [&](NodeId v) {
        if (seen.insert(v).second) {
            queue.push_back(v);
        }
    };
    for (const NodeId v: a.inputs()) {
        push(v);
    }
    for (const NodeId v: a.outputs()) {
        push(v);
    }
    const auto all = a.node_ids();
    std::size_t next = 0;
    while (s.order.size() < all.size()) {
        if (queue.empty()) {
            while (seen.contains(all[next])) {
                ++next;
            }
            push(all[next]);
        }
        const NodeId v = queue.front();
        queue.pop_front();
        s.order.push_back(v);
        for (const auto& [w, m]: a.neighbors(v)) {
            push(w);
        }
    }
    for (std::size_t i = 0; i < a.inputs().size(); ++i) {
        if (!s.assign(a.inputs()[i], b.inputs()[i])) {
            return false;
        }
    }
    for (std::size_t i = 0; i < a.outputs().size(); ++i) {
        if (!s.assign(a.outputs()[i], b.outputs()[i])) {
            return false;
        }
    }
    return s.search(0);
}

} // namespace zx
