#pragma once

#include "zx/diagram.hpp"
#include "zx/rng.hpp"
#include "zx/semantics.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include <gtest/gtest.h>

namespace zx::test {

/// Semantic equality up to a nonzero scalar under two independent random symbol assignments.
/// Symbols of `b` are a subset of those of `a` (rewrites never mint symbols). A vanishing `a`
/// is accepted: deleting a boundary-free component may discard a zero scalar.
inline ::testing::AssertionResult same_map(const Diagram& a, const Diagram& b, Rng& rng, double tol = 1e-9) {
    for (int trial = 0; trial < 2; ++trial) {
        const SymbolValues values = random_assignment(a, rng);
        const Matrix       ma     = semantics(a, values);
        const Matrix       mb     = semantics(b, values);
        if (ma.rows() != mb.rows() || ma.cols() != mb.cols()) {
            return ::testing::AssertionFailure() << "dimension mismatch";
        }
        if (max_abs(ma) <= 1e-10) {
            continue;
        }
        const double dev = scalar_deviation(ma, mb);
        if (!(dev <= tol)) {
            return ::testing::AssertionFailure() << "deviation " << dev << " on trial " << trial;
        }
    }
    return ::testing::AssertionSuccess();
}

/// Wire Input - spiders... - Output built from a list of (kind, quarter turns) pairs.
inline Diagram wire(std::initializer_list<std::pair<NodeKind, Angle>> nodes) {
    Diagram d;
    NodeId  prev = d.add_input();
    for (const auto& [k, a]: nodes) {
        const NodeId v = d.add_node(k, a);
        d.add_edge(prev, v);
        prev = v;
    }
    d.add_edge(prev, d.add_output());
    return d;
}

} // namespace zx::test

namespace zx::test {

/// Same diagram with node ids shuffled, so that id-ordered algorithms visit nodes differently.
inline Diagram relabel(const Diagram& d, Rng& rng, std::map<NodeId, NodeId>* mapping = nullptr) {
    std::vector<NodeId> ids = d.node_ids();
    std::vector<NodeId> fresh(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        fresh[i] = static_cast<NodeId>(i);
    }
    std::shuffle(fresh.begin(), fresh.end(), rng);
    std::map<NodeId, NodeId> map;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        map[ids[i]] = fresh[i];
    }
    Diagram r;
    for (const NodeId v: ids) {
        r.insert_node(map[v], d.node(v));
    }
    for (const EdgeKey& e: d.edges()) {
        r.add_edge(map[e.lo], map[e.hi], d.multiplicity(e.lo, e.hi));
    }
    std::vector<NodeId> in;
    std::vector<NodeId> out;
    for (const NodeId v: d.inputs()) {
        in.push_back(map[v]);
    }
    for (const NodeId v: d.outputs()) {
        out.push_back(map[v]);
    }
    r.set_boundary(in, out);
    for (const EdgeKey& e: d.marked_edges()) {
        r.set_edge_marked(EdgeKey::of(map[e.lo], map[e.hi]), true);
    }
    if (mapping != nullptr) {
        *mapping = map;
    }
    return r;
}

} // namespace zx::test
