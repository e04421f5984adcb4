#include "zx/rules.hpp"

#include "zx/errors.hpp"
#include "zx/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <tuple>

namespace zx {

std::string_view to_string(NodeActionKind k) {
    switch (k) {
    case NodeActionKind::ColorChange: return "ColorChange";
    case NodeActionKind::HadamardFuse: return "HadamardFuse";
    case NodeActionKind::HadamardUnfuse: return "HadamardUnfuse";
    case NodeActionKind::Euler: return "Euler";
    case NodeActionKind::StartUnfuse: return "StartUnfuse";
    case NodeActionKind::StopUnfuse: return "StopUnfuse";
    }
    return "?";
}

std::string_view to_string(EdgeActionKind k) {
    switch (k) {
    case EdgeActionKind::Fuse: return "Fuse";
    case EdgeActionKind::Pi: return "Pi";
    case EdgeActionKind::Copy: return "Copy";
    case EdgeActionKind::BialgebraLeft: return "BialgebraLeft";
    case EdgeActionKind::BialgebraRight: return "BialgebraRight";
    case EdgeActionKind::MarkEdge: return "MarkEdge";
    }
    return "?";
}

std::string describe(const Action& a) {
    if (const auto* n = std::get_if<NodeAction>(&a)) {
        return std::string(to_string(n->kind)) + "(" + std::to_string(n->node) + ")";
    }
    if (const auto* e = std::get_if<EdgeAction>(&a)) {
        return std::string(to_string(e->kind)) + "(" + std::to_string(e->edge.lo) + "," + std::to_string(e->edge.hi) + ")";
    }
    return "Stop";
}

// ---------------------------------------------------------------------------------------------
// automatic simplification

namespace {

bool has(const Diagram& d, NodeId v) {
    return d.has_node(v);
}

bool spider_at(const Diagram& d, NodeId v) {
    return d.has_node(v) && is_spider(d.kind(v));
}

/// The two distinct single-edge neighbors of a degree-2 node without loops.
std::optional<std::pair<NodeId, NodeId>> two_neighbors(const Diagram& d, NodeId v) {
    const auto& nb = d.neighbors(v);
    if (nb.size() != 2) {
        return std::nullopt;
    }
    auto it = nb.begin();
    const auto [a, ma] = *it++;
    const auto [b, mb] = *it;
    if (a == v || b == v || ma != 1 || mb != 1) {
        return std::nullopt;
    }
    return std::pair{a, b};
}

bool simplify_at(Diagram& d, NodeId v) {
    const NodeKind kind = d.kind(v);

    if (d.multiplicity(v, v) > 0) {
        if (is_spider(kind)) {
            d.set_multiplicity(v, v, 0);
            return true;
        }
        if (kind == NodeKind::Hadamard && d.degree(v) == 2) {
            d.remove_node(v);
            return true;
        }
    }

    const auto nbs = d.neighbors(v);
    for (const auto& [w, m]: nbs) {
        if (w == v || m < 2 || !d.has_node(w)) {
            continue;
        }
        const NodeKind kw = d.kind(w);
        if (is_spider(kind) && is_spider(kw)) {
            d.set_multiplicity(v, w, kind == kw ? 1 : m % 2);
            return true;
        }
        if (kind == NodeKind::Hadamard && kw == NodeKind::Hadamard && m == 2 && d.degree(v) == 2 &&
            d.degree(w) == 2) {
            d.remove_node(v);
            d.remove_node(w);
            return true;
        }
        const bool hLoop = (kind == NodeKind::Hadamard && is_spider(kw) && d.degree(v) == 2) ||
                           (kw == NodeKind::Hadamard && is_spider(kind) && d.degree(w) == 2);
        if (hLoop && m == 2) {
            const NodeId h = kind == NodeKind::Hadamard ? v : w;
            const NodeId s = kind == NodeKind::Hadamard ? w : v;
            d.remove_node(h);
            d.node(s).angle += Angle::pi();
            return true;
        }
    }

    if (is_spider(kind) && d.node(v).angle.is_zero() && !d.node(v).unfuse_marked) {
        if (const auto ab = two_neighbors(d, v)) {
            d.remove_node(v);
            d.add_edge(ab->first, ab->second);
            return true;
        }
    }

    if (kind == NodeKind::Hadamard) {
        if (const auto ab = two_neighbors(d, v)) {
            for (const NodeId w: {ab->first, ab->second}) {
                if (d.kind(w) != NodeKind::Hadamard) {
                    continue;
                }
                const auto wn = two_neighbors(d, w);
                if (!wn) {
                    continue;
                }
                const NodeId a = (ab->first == w) ? ab->second : ab->first;
                const NodeId b = (wn->first == v) ? wn->second : wn->first;
                d.remove_node(v);
                d.remove_node(w);
                d.add_edge(a, b);
                return true;
            }
        }
    }
    return false;
}

void remove_unanchored_components(Diagram& d) {
    std::set<NodeId>   seen;
    std::deque<NodeId> queue;
    d.for_each_node([&](NodeId id, const Node& n) {
        if (is_boundary(n.kind)) {
            queue.push_back(id);
        }
    });
    while (!queue.empty()) {
        const NodeId v = queue.front();
        queue.pop_front();
        if (!seen.insert(v).second) {
            continue;
        }
        for (const auto& [w, m]: d.neighbors(v)) {
            if (!seen.contains(w)) {
                queue.push_back(w);
            }
        }
    }
    if (seen.size() == d.num_nodes()) {
        return;
    }
    for (const NodeId v: d.node_ids()) {
        if (!seen.contains(v)) {
            d.remove_node(v);
        }
    }
}

} // namespace

void auto_simplify(Diagram& d) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (const NodeId v: d.node_ids()) {
            if (has(d, v) && simplify_at(d, v)) {
                changed = true;
            }
        }
    }
    remove_unanchored_components(d);
}

// ---------------------------------------------------------------------------------------------
// pattern matching

namespace {

bool simple_degree(const Diagram& d, NodeId v, int deg) {
    if (d.multiplicity(v, v) != 0 || d.degree(v) != deg) {
        return false;
    }
    for (const auto& [w, m]: d.neighbors(v)) {
        if (m != 1) {
            return false;
        }
    }
    return true;
}

bool valid_edge(const Diagram& d, EdgeKey e) {
    return e.lo != e.hi && d.has_node(e.lo) && d.has_node(e.hi) && d.multiplicity(e.lo, e.hi) == 1;
}

std::vector<NodeId> other_neighbors(const Diagram& d, NodeId v, NodeId except) {
    std::vector<NodeId> out;
    for (const auto& [w, m]: d.neighbors(v)) {
        if (w != except) {
            for (int k = 0; k < m; ++k) {
                out.push_back(w);
            }
        }
    }
    return out;
}

/// a - s1 - mid - s2 - b with all three inner nodes degree-2 spiders of alternating color.
struct Chain {
    NodeId s1, mid, s2, a, b;
};

std::optional<Chain> find_chain(const Diagram& d, NodeId mid) {
    if (!spider_at(d, mid) || !simple_degree(d, mid, 2)) {
        return std::nullopt;
    }
    const auto ends = two_neighbors(d, mid);
    if (!ends) {
        return std::nullopt;
    }
    const NodeId s1 = ends->first;
    const NodeId s2 = ends->second;
    const NodeKind outer = opposite_color(d.kind(mid));
    for (const NodeId s: {s1, s2}) {
        if (!spider_at(d, s) || d.kind(s) != outer || !simple_degree(d, s, 2)) {
            return std::nullopt;
        }
    }
    const auto n1 = two_neighbors(d, s1);
    const auto n2 = two_neighbors(d, s2);
    if (!n1 || !n2) {
        return std::nullopt;
    }
    const NodeId a = n1->first == mid ? n1->second : n1->first;
    const NodeId b = n2->first == mid ? n2->second : n2->first;
    const std::set<NodeId> inner{s1, mid, s2};
    if (inner.contains(a) || inner.contains(b)) {
        return std::nullopt;
    }
    return Chain{s1, mid, s2, a, b};
}

bool chain_concrete(const Diagram& d, const Chain& c) {
    return d.node(c.s1).angle.is_concrete() && d.node(c.mid).angle.is_concrete() && d.node(c.s2).angle.is_concrete();
}

Eigen::Matrix2cd rotation(NodeKind kind, int quarterTurns) {
    static const Complex kPhase[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    Eigen::Matrix2cd     z        = Eigen::Matrix2cd::Zero();
    z(0, 0)                       = 1.0;
    z(1, 1)                       = kPhase[((quarterTurns % 4) + 4) % 4];
    if (kind == NodeKind::Z) {
        return z;
    }
    const double     s = 1.0 / std::sqrt(2.0);
    Eigen::Matrix2cd h;
    h << s, s, s, -s;
    return h * z * h;
}

Eigen::Matrix2cd chain_matrix(NodeKind outer, std::array<int, 3> q) {
    const NodeKind inner = opposite_color(outer);
    return rotation(outer, q[2]) * rotation(inner, q[1]) * rotation(outer, q[0]);
}

bool is_hadamard_chain(const Diagram& d, const Chain& c) {
    if (!chain_concrete(d, c)) {
        return false;
    }
    const std::array<int, 3> q{d.node(c.s1).angle.quarter_turns(), d.node(c.mid).angle.quarter_turns(),
                               d.node(c.s2).angle.quarter_turns()};
    if (q[0] % 2 == 0 || q[1] % 2 == 0 || q[2] % 2 == 0) {
        return false;
    }
    const double     s = 1.0 / std::sqrt(2.0);
    Eigen::Matrix2cd h;
    h << s, s, s, -s;
    return equivalent_up_to_scalar(chain_matrix(d.kind(c.s1), q), h, 1e-9);
}

/// (u, v) with u the pi spider of degree <= 2 and v an opposite-color spider.
std::optional<std::pair<NodeId, NodeId>> pi_orientation(const Diagram& d, EdgeKey e) {
    if (!valid_edge(d, e) || !spider_at(d, e.lo) || !spider_at(d, e.hi) || d.kind(e.lo) == d.kind(e.hi)) {
        return std::nullopt;
    }
    std::optional<std::pair<NodeId, NodeId>> best;
    for (const auto& [u, v]: {std::pair{e.lo, e.hi}, std::pair{e.hi, e.lo}}) {
        const int deg = d.degree(u);
        if (!d.node(u).angle.is_pi() || deg > 2 || !simple_degree(d, u, deg)) {
            continue;
        }
        if (!best || (deg == 1 && d.degree(best->first) == 2)) {
            best = std::pair{u, v};
        }
    }
    return best;
}

/// (u, v) with u a Pauli state and v an opposite-color phase-0 spider.
std::optional<std::pair<NodeId, NodeId>> copy_orientation(const Diagram& d, EdgeKey e) {
    if (!valid_edge(d, e) || !spider_at(d, e.lo) || !spider_at(d, e.hi) || d.kind(e.lo) == d.kind(e.hi)) {
        return std::nullopt;
    }
    for (const auto& [u, v]: {std::pair{e.lo, e.hi}, std::pair{e.hi, e.lo}}) {
        if (d.degree(u) == 1 && d.node(u).angle.is_pauli() && d.node(v).angle.is_zero() &&
            d.multiplicity(v, v) == 0) {
            return std::pair{u, v};
        }
    }
    return std::nullopt;
}

bool plain_spider(const Diagram& d, NodeId v, NodeKind kind, int deg) {
    return spider_at(d, v) && d.kind(v) == kind && d.node(v).angle.is_zero() && simple_degree(d, v, deg);
}

/// (Z endpoint, X endpoint) for a bialgebra-left pair.
std::optional<std::pair<NodeId, NodeId>> bialgebra_pair(const Diagram& d, EdgeKey e) {
    if (!valid_edge(d, e)) {
        return std::nullopt;
    }
    for (const auto& [u, v]: {std::pair{e.lo, e.hi}, std::pair{e.hi, e.lo}}) {
        if (plain_spider(d, u, NodeKind::Z, 3) && plain_spider(d, v, NodeKind::X, 3)) {
            return std::pair{u, v};
        }
    }
    return std::nullopt;
}

struct BiPattern {
    std::array<NodeId, 2> z;
    std::array<NodeId, 2> x;
    std::array<NodeId, 2> zExt;
    std::array<NodeId, 2> xExt;
};

std::optional<BiPattern> bialgebra_pattern(const Diagram& d, EdgeKey e) {
    const auto pair = bialgebra_pair(d, e);
    if (!pair) {
        return std::nullopt;
    }
    const auto [z1, x1] = *pair;
    for (const NodeId x2: other_neighbors(d, z1, x1)) {
        if (!plain_spider(d, x2, NodeKind::X, 3)) {
            continue;
        }
        for (const NodeId z2: other_neighbors(d, x1, z1)) {
            if (z2 == z1 || !plain_spider(d, z2, NodeKind::Z, 3) || !d.connected(z2, x2)) {
                continue;
            }
            const std::set<NodeId> members{z1, z2, x1, x2};
            auto external = [&](NodeId v) -> std::optional<NodeId> {
                for (const auto& [w, m]: d.neighbors(v)) {
                    if (!members.contains(w)) {
                        return w;
                    }
                }
                return std::nullopt;
            };
            BiPattern p;
            p.z = {std::min(z1, z2), std::max(z1, z2)};
            p.x = {std::min(x1, x2), std::max(x1, x2)};
            bool ok = true;
            for (int i = 0; i < 2; ++i) {
                const auto ez = external(p.z[static_cast<std::size_t>(i)]);
                const auto ex = external(p.x[static_cast<std::size_t>(i)]);
                if (!ez || !ex) {
                    ok = false;
                    break;
                }
                p.zExt[static_cast<std::size_t>(i)] = *ez;
                p.xExt[static_cast<std::size_t>(i)] = *ex;
            }
            // Each member has two edges inside the pattern and exactly one outside.
            if (ok) {
                return p;
            }
        }
    }
    return std::nullopt;
}

bool normal_mode(const Diagram& d) {
    return !d.in_unfuse_mode();
}

bool can_node(const Diagram& d, NodeId v, NodeActionKind k) {
    if (!d.has_node(v)) {
        return false;
    }
    const NodeKind kind = d.kind(v);
    if (k == NodeActionKind::StopUnfuse) {
        return d.node(v).unfuse_marked;
    }
    if (!normal_mode(d)) {
        return false;
    }
    switch (k) {
    case NodeActionKind::ColorChange:
    case NodeActionKind::StartUnfuse: return is_spider(kind);
    case NodeActionKind::HadamardUnfuse: return kind == NodeKind::Hadamard && two_neighbors(d, v).has_value();
    case NodeActionKind::Euler: {
        const auto c = find_chain(d, v);
        return c && chain_concrete(d, *c);
    }
    case NodeActionKind::HadamardFuse: {
        const auto c = find_chain(d, v);
        return c && is_hadamard_chain(d, *c);
    }
    default: return false;
    }
}

bool can_edge(const Diagram& d, EdgeKey e, EdgeActionKind k) {
    if (!valid_edge(d, e)) {
        return false;
    }
    if (k == EdgeActionKind::MarkEdge) {
        const auto m = d.marked_node();
        return m && (e.lo == *m || e.hi == *m) && !d.edge_marked(e);
    }
    if (!normal_mode(d)) {
        return false;
    }
    switch (k) {
    case EdgeActionKind::Fuse:
        return spider_at(d, e.lo) && spider_at(d, e.hi) && d.kind(e.lo) == d.kind(e.hi);
    case EdgeActionKind::Pi: return pi_orientation(d, e).has_value();
    case EdgeActionKind::Copy: return copy_orientation(d, e).has_value();
    case EdgeActionKind::BialgebraLeft: return bialgebra_pair(d, e).has_value();
    case EdgeActionKind::BialgebraRight: return bialgebra_pattern(d, e).has_value();
    default: return false;
    }
}

RewriteOutcome finish(const Diagram& before, Diagram after) {
    auto_simplify(after);
    const int reward = static_cast<int>(before.num_nodes()) - static_cast<int>(after.num_nodes());
    return {std::move(after), reward};
}

[[noreturn]] void not_applicable(const Action& a) {
    throw ContractError("action not applicable: " + describe(a));
}

void require(const Diagram& d, const Action& a) {
    if (!is_applicable(d, a)) {
        not_applicable(a);
    }
}

} // namespace

std::array<int, 3> clifford_euler_flip(NodeKind outer, std::array<int, 3> q) {
    const Eigen::Matrix2cd target = chain_matrix(outer, q);
    const NodeKind         inner  = opposite_color(outer);
    auto matches = [&](NodeKind color) {
        std::vector<std::array<int, 3>> out;
        for (int p1 = 0; p1 < 4; ++p1) {
            for (int p2 = 0; p2 < 4; ++p2) {
                for (int p3 = 0; p3 < 4; ++p3) {
                    if (equivalent_up_to_scalar(target, chain_matrix(color, {p1, p2, p3}), 1e-6)) {
                        out.push_back({p1, p2, p3});
                    }
                }
            }
        }
        return out;
    };
    const auto flipped = matches(inner);
    if (flipped.empty()) {
        throw ContractError("no Clifford Euler decomposition found");
    }
    auto zeros = [](const std::array<int, 3>& t) { return std::count(t.begin(), t.end(), 0); };

    // Prefer the most degenerate decomposition: its phase-0 spiders vanish in auto_simplify.
    const auto best = std::max_element(flipped.begin(), flipped.end(), [&](const auto& x, const auto& y) {
        if (zeros(x) != zeros(y)) {
            return zeros(x) < zeros(y);
        }
        return std::tie(x[1], x[0], x[2]) > std::tie(y[1], y[0], y[2]);
    });
    if (zeros(*best) > 0) {
        return *best;
    }
    // No degenerate form: pair same-color and opposite-color forms by rank so the flip is an
    // involution.
    const auto same = matches(opposite_color(inner));
    const auto rank = static_cast<std::size_t>(std::find(same.begin(), same.end(), q) - same.begin());
    return flipped[std::min(rank, flipped.size() - 1)];
}

// ---------------------------------------------------------------------------------------------
// rewrites

RewriteOutcome fuse(const Diagram& d, EdgeKey e) {
    require(d, EdgeAction{e, EdgeActionKind::Fuse});
    Diagram      r    = d;
    const NodeId keep = e.lo;
    const NodeId gone = e.hi;
    r.node(keep).angle += r.node(gone).angle;
    for (const NodeId w: other_neighbors(r, gone, keep)) {
        r.add_edge(keep, w == gone ? keep : w);
    }
    r.remove_node(gone);
    return finish(d, std::move(r));
}

RewriteOutcome unfuse_start(const Diagram& d, NodeId v) {
    require(d, NodeAction{v, NodeActionKind::StartUnfuse});
    Diagram r               = d;
    r.node(v).unfuse_marked = true;
    return finish(d, std::move(r));
}

RewriteOutcome mark_edge(const Diagram& d, EdgeKey e) {
    require(d, EdgeAction{e, EdgeActionKind::MarkEdge});
    Diagram r = d;
    r.set_edge_marked(e, true);
    return finish(d, std::move(r));
}

RewriteOutcome unfuse_stop(const Diagram& d, NodeId v) {
    require(d, NodeAction{v, NodeActionKind::StopUnfuse});
    Diagram      r = d;
    const NodeId w = r.add_node(r.kind(v));
    std::vector<NodeId> moved;
    for (const EdgeKey& e: r.marked_edges()) {
        moved.push_back(e.other(v));
    }
    r.clear_marks();
    for (const NodeId x: moved) {
        r.remove_edge(v, x);
        r.add_edge(w, x);
    }
    r.add_edge(v, w);
    return finish(d, std::move(r));
}

RewriteOutcome color_change(const Diagram& d, NodeId v) {
    require(d, NodeAction{v, NodeActionKind::ColorChange});
    Diagram r      = d;
    r.node(v).kind = opposite_color(r.kind(v));
    for (const NodeId w: other_neighbors(r, v, v)) {
        r.remove_edge(v, w);
        const NodeId h = r.add_node(NodeKind::Hadamard);
        r.add_edge(v, h);
        r.add_edge(h, w);
    }
    return finish(d, std::move(r));
}

RewriteOutcome pi_push(const Diagram& d, EdgeKey e) {
    require(d, EdgeAction{e, EdgeActionKind::Pi});
    const auto [u, v] = *pi_orientation(d, e);
    Diagram        r     = d;
    const NodeKind color = r.kind(u);
    const auto     legs  = other_neighbors(r, v, u);
    if (r.degree(u) == 1) {
        // A pi state copies through any opposite-color spider (up to a phase).
        r.remove_node(u);
        r.remove_node(v);
        for (const NodeId w: legs) {
            r.add_edge(r.add_node(color, Angle::pi()), w);
        }
        return finish(d, std::move(r));
    }
    const NodeId x = other_neighbors(r, u, v).front();
    r.remove_node(u);
    r.node(v).angle = -r.node(v).angle;
    for (const NodeId w: legs) {
        r.remove_edge(v, w);
        const NodeId p = r.add_node(color, Angle::pi());
        r.add_edge(v, p);
        r.add_edge(p, w);
    }
    r.add_edge(x, v);
    return finish(d, std::move(r));
}

RewriteOutcome copy(const Diagram& d, EdgeKey e) {
    require(d, EdgeAction{e, EdgeActionKind::Copy});
    const auto [u, v] = *copy_orientation(d, e);
    Diagram     r     = d;
    const Node  state = r.node(u);
    const auto  legs  = other_neighbors(r, v, u);
    r.remove_node(u);
    r.remove_node(v);
    for (const NodeId w: legs) {
        r.add_edge(r.add_node(state.kind, state.angle), w);
    }
    return finish(d, std::move(r));
}

RewriteOutcome bialgebra_left(const Diagram& d, EdgeKey e) {
    require(d, EdgeAction{e, EdgeActionKind::BialgebraLeft});
    const auto [z, x] = *bialgebra_pair(d, e);
    Diagram    r      = d;
    const auto zLegs  = other_neighbors(r, z, x);
    const auto xLegs  = other_neighbors(r, x, z);
    r.remove_node(z);
    r.remove_node(x);
    std::vector<NodeId> newX;
    std::vector<NodeId> newZ;
    for (const NodeId a: zLegs) {
        newX.push_back(r.add_node(NodeKind::X));
        r.add_edge(newX.back(), a);
    }
    for (const NodeId b: xLegs) {
        newZ.push_back(r.add_node(NodeKind::Z));
        r.add_edge(newZ.back(), b);
    }
    for (const NodeId nx: newX) {
        for (const NodeId nz: newZ) {
            r.add_edge(nx, nz);
        }
    }
    return finish(d, std::move(r));
}

RewriteOutcome bialgebra_right(const Diagram& d, EdgeKey e) {
    require(d, EdgeAction{e, EdgeActionKind::BialgebraRight});
    const BiPattern p = *bialgebra_pattern(d, e);
    Diagram         r = d;
    for (const NodeId v: {p.z[0], p.z[1], p.x[0], p.x[1]}) {
        r.remove_node(v);
    }
    const NodeId z = r.add_node(NodeKind::Z);
    const NodeId x = r.add_node(NodeKind::X);
    r.add_edge(z, x);
    r.add_edge(z, p.xExt[0]);
    r.add_edge(z, p.xExt[1]);
    r.add_edge(x, p.zExt[0]);
    r.add_edge(x, p.zExt[1]);
    return finish(d, std::move(r));
}

RewriteOutcome euler(const Diagram& d, NodeId v) {
    require(d, NodeAction{v, NodeActionKind::Euler});
    const Chain    c     = *find_chain(d, v);
    const NodeKind outer = d.kind(c.s1);
    const auto     t     = clifford_euler_flip(
            outer, {d.node(c.s1).angle.quarter_turns(), d.node(c.mid).angle.quarter_turns(), d.node(c.s2).angle.quarter_turns()});
    Diagram r = d;
    r.remove_node(c.s1);
    r.remove_node(c.mid);
    r.remove_node(c.s2);
    const NodeKind inner = opposite_color(outer);
    const NodeId   t1    = r.add_node(inner, Angle(t[0]));
    const NodeId   t2    = r.add_node(outer, Angle(t[1]));
    const NodeId   t3    = r.add_node(inner, Angle(t[2]));
    r.add_edge(c.a, t1);
    r.add_edge(t1, t2);
    r.add_edge(t2, t3);
    r.add_edge(t3, c.b);
    return finish(d, std::move(r));
}

RewriteOutcome hadamard_fuse(const Diagram& d, NodeId v) {
    require(d, NodeAction{v, NodeActionKind::HadamardFuse});
    const Chain c = *find_chain(d, v);
    Diagram     r = d;
    r.remove_node(c.s1);
    r.remove_node(c.mid);
    r.remove_node(c.s2);
    const NodeId h = r.add_node(NodeKind::Hadamard);
    r.add_edge(c.a, h);
    r.add_edge(h, c.b);
    return finish(d, std::move(r));
}

RewriteOutcome hadamard_unfuse(const Diagram& d, NodeId v) {
    require(d, NodeAction{v, NodeActionKind::HadamardUnfuse});
    const auto [a, b] = *two_neighbors(d, v);
    Diagram    r      = d;
    r.remove_node(v);
    const NodeId z1 = r.add_node(NodeKind::Z, Angle::halfPi());
    const NodeId x  = r.add_node(NodeKind::X, Angle::halfPi());
    const NodeId z2 = r.add_node(NodeKind::Z, Angle::halfPi());
    r.add_edge(a, z1);
    r.add_edge(z1, x);
    r.add_edge(x, z2);
    r.add_edge(z2, b);
    return finish(d, std::move(r));
}

// ---------------------------------------------------------------------------------------------
// dispatch and masking

bool is_applicable(const Diagram& d, const Action& a) {
    if (const auto* n = std::get_if<NodeAction>(&a)) {
        return can_node(d, n->node, n->kind);
    }
    if (const auto* e = std::get_if<EdgeAction>(&a)) {
        return can_edge(d, e->edge, e->kind);
    }
    return normal_mode(d);
}

RewriteOutcome apply(const Diagram& d, const Action& a) {
    if (const auto* n = std::get_if<NodeAction>(&a)) {
        switch (n->kind) {
        case NodeActionKind::ColorChange: return color_change(d, n->node);
        case NodeActionKind::HadamardFuse: return hadamard_fuse(d, n->node);
        case NodeActionKind::HadamardUnfuse: return hadamard_unfuse(d, n->node);
        case NodeActionKind::Euler: return euler(d, n->node);
        case NodeActionKind::StartUnfuse: return unfuse_start(d, n->node);
        case NodeActionKind::StopUnfuse: return unfuse_stop(d, n->node);
        }
    }
    if (const auto* e = std::get_if<EdgeAction>(&a)) {
        switch (e->kind) {
        case EdgeActionKind::Fuse: return fuse(d, e->edge);
        case EdgeActionKind::Pi: return pi_push(d, e->edge);
        case EdgeActionKind::Copy: return copy(d, e->edge);
        case EdgeActionKind::BialgebraLeft: return bialgebra_left(d, e->edge);
        case EdgeActionKind::BialgebraRight: return bialgebra_right(d, e->edge);
        case EdgeActionKind::MarkEdge: return mark_edge(d, e->edge);
        }
    }
    require(d, a);
    return {d, 0};
}

ActionMask action_mask(const Diagram& d) {
    ActionMask m;
    m.node_ids = d.node_ids();
    m.edges    = d.edges();
    m.node.resize(m.node_ids.size());
    m.edge.resize(m.edges.size());
    for (std::size_t i = 0; i < m.node_ids.size(); ++i) {
        for (int k = 0; k < kNodeActionKinds; ++k) {
            m.node[i][static_cast<std::size_t>(k)] = can_node(d, m.node_ids[i], static_cast<NodeActionKind>(k));
        }
    }
    for (std::size_t i = 0; i < m.edges.size(); ++i) {
        for (int k = 0; k < kEdgeActionKinds; ++k) {
            m.edge[i][static_cast<std::size_t>(k)] = can_edge(d, m.edges[i], static_cast<EdgeActionKind>(k));
        }
    }
    m.stop = normal_mode(d);
    return m;
}

std::size_t ActionMask::count() const {
    std::size_t n = stop ? 1 : 0;
    for (const auto& a: node) {
        n += static_cast<std::size_t>(std::count(a.begin(), a.end(), true));
    }
    for (const auto& a: edge) {
        n += static_cast<std::size_t>(std::count(a.begin(), a.end(), true));
    }
    return n;
}

std::size_t ActionMask::count(NodeActionKind k) const {
    return static_cast<std::size_t>(
            std::count_if(node.begin(), node.end(), [&](const auto& a) { return a[static_cast<std::size_t>(k)]; }));
}

std::size_t ActionMask::count(EdgeActionKind k) const {
    return static_cast<std::size_t>(
            std::count_if(edge.begin(), edge.end(), [&](const auto& a) { return a[static_cast<std::size_t>(k)]; }));
}

std::vector<Action> ActionMask::actions() const {
    std::vector<Action> out;
    for (std::size_t i = 0; i < node.size(); ++i) {
        for (int k = 0; k < kNodeActionKinds; ++k) {
            if (node[i][static_cast<std::size_t>(k)]) {
                out.emplace_back(NodeAction{node_ids[i], static_cast<NodeActionKind>(k)});
            }
        }
    }
    for (std::size_t i = 0; i < edge.size(); ++i) {
        for (int k = 0; k < kEdgeActionKinds; ++k) {
            if (edge[i][static_cast<std::size_t>(k)]) {
                out.emplace_back(EdgeAction{edges[i], static_cast<EdgeActionKind>(k)});
            }
        }
    }
    if (stop) {
        out.emplace_back(StopAction{});
    }
    return out;
}

} // namespace zx
