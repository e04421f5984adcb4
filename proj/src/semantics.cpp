#include "zx/semantics.hpp"

#include "zx/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

namespace zx {

namespace {

using Label = int;

/// Dense tensor over binary indices; labels[0] is the most significant bit of the flat index.
struct Tensor {
    std::vector<Label>   labels;
    std::vector<Complex> data;
};

std::vector<Complex> spider_entries(NodeKind kind, double phase, int legs) {
    const std::size_t    n = std::size_t{1} << legs;
    std::vector<Complex> data(n, Complex{0.0, 0.0});
    const Complex        e = std::polar(1.0, phase);
    if (kind == NodeKind::Z) {
        data[0] += 1.0;
        data[n - 1] += e;
        return data;
    }
    const double norm = std::pow(2.0, -0.5 * legs);
    for (std::size_t i = 0; i < n; ++i) {
        const double sign = (std::popcount(i) % 2 == 0) ? 1.0 : -1.0;
        data[i]           = norm * (1.0 + sign * e);
    }
    return data;
}

Tensor permute(const Tensor& t, const std::vector<Label>& order) {
    const std::size_t n = t.labels.size();
    // shift[k]: bit position in the source index of the label placed at position k.
    std::vector<int> shift(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto pos = std::find(t.labels.begin(), t.labels.end(), order[k]) - t.labels.begin();
        shift[k]       = static_cast<int>(n - 1 - pos);
    }
    Tensor out{order, std::vector<Complex>(t.data.size())};
    for (std::size_t idx = 0; idx < out.data.size(); ++idx) {
        std::size_t src = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if ((idx >> (n - 1 - k)) & 1U) {
                src |= std::size_t{1} << shift[k];
            }
        }
        out.data[idx] = t.data[src];
    }
    return out;
}

struct PairShape {
    std::vector<Label> shared;
    std::vector<Label> freeA;
    std::vector<Label> freeB;
};

PairShape shape(const Tensor& a, const Tensor& b) {
    PairShape s;
    for (const Label l: a.labels) {
        if (std::find(b.labels.begin(), b.labels.end(), l) != b.labels.end()) {
            s.shared.push_back(l);
        } else {
            s.freeA.push_back(l);
        }
    }
    for (const Label l: b.labels) {
        if (std::find(s.shared.begin(), s.shared.end(), l) == s.shared.end()) {
            s.freeB.push_back(l);
        }
    }
    return s;
}

Tensor contract(const Tensor& a, const Tensor& b, int maxIndices) {
    const PairShape s = shape(a, b);
    if (static_cast<int>(s.freeA.size() + s.freeB.size()) > maxIndices) {
        throw OracleLimitError("intermediate tensor would carry " +
                               std::to_string(s.freeA.size() + s.freeB.size()) + " indices (cap " +
                               std::to_string(maxIndices) + ")");
    }
    std::vector<Label> orderA = s.freeA;
    orderA.insert(orderA.end(), s.shared.begin(), s.shared.end());
    std::vector<Label> orderB = s.shared;
    orderB.insert(orderB.end(), s.freeB.begin(), s.freeB.end());
    const Tensor pa = permute(a, orderA);
    const Tensor pb = permute(b, orderB);

    using RowMat      = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const auto rowsA  = static_cast<Eigen::Index>(std::size_t{1} << s.freeA.size());
    const auto inner  = static_cast<Eigen::Index>(std::size_t{1} << s.shared.size());
    const auto colsB  = static_cast<Eigen::Index>(std::size_t{1} << s.freeB.size());
    const Eigen::Map<const RowMat> ma(pa.data.data(), rowsA, inner);
    const Eigen::Map<const RowMat> mb(pb.data.data(), inner, colsB);

    Tensor out;
    out.labels = s.freeA;
    out.labels.insert(out.labels.end(), s.freeB.begin(), s.freeB.end());
    out.data.resize(static_cast<std::size_t>(rowsA * colsB));
    Eigen::Map<RowMat>(out.data.data(), rowsA, colsB).noalias() = ma * mb;
    return out;
}

Tensor contract_greedy(std::vector<Tensor> ts, int maxIndices) {
    while (ts.size() > 1) {
        std::size_t bestI = 0;
        std::size_t bestJ = 0;
        std::size_t bestSize = std::numeric_limits<std::size_t>::max();
        bool        found    = false;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            for (std::size_t j = i + 1; j < ts.size(); ++j) {
                const PairShape s = shape(ts[i], ts[j]);
                if (s.shared.empty()) {
                    continue;
                }
                const std::size_t size = s.freeA.size() + s.freeB.size();
                if (size < bestSize) {
                    bestSize = size;
                    bestI    = i;
                    bestJ    = j;
                    found    = true;
                }
            }
        }
        if (!found) {
            // Disconnected pieces: outer product of the two smallest.
            std::vector<std::size_t> idx(ts.size());
            for (std::size_t i = 0; i < idx.size(); ++i) {
                idx[i] = i;
            }
            std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
                return ts[x].labels.size() < ts[y].labels.size() ||
                       (ts[x].labels.size() == ts[y].labels.size() && x < y);
            });
            bestI = std::min(idx[0], idx[1]);
            bestJ = std::max(idx[0], idx[1]);
        }
        Tensor merged = contract(ts[bestI], ts[bestJ], maxIndices);
        ts.erase(ts.begin() + static_cast<std::ptrdiff_t>(bestJ));
        ts[bestI] = std::move(merged);
    }
    return std::move(ts.front());
}

Tensor contract_sequential(std::vector<Tensor> ts, int maxIndices) {
    Tensor acc = std::move(ts.front());
    for (std::size_t i = 1; i < ts.size(); ++i) {
        acc = contract(acc, ts[i], maxIndices);
    }
    return acc;
}

} // namespace

Matrix spider_tensor(NodeKind kind, double phase, int nIn, int nOut) {
    if (!is_spider(kind)) {
        throw ContractError("spider_tensor needs a Z or X spider");
    }
    const auto data = spider_entries(kind, phase, nIn + nOut);
    Matrix     m(Eigen::Index{1} << nOut, Eigen::Index{1} << nIn);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            m(r, c) = data[static_cast<std::size_t>((r << nIn) | c)];
        }
    }
    return m;
}

Matrix semantics(const Diagram& d, const SymbolValues& values, const SemanticsOptions& options) {
    std::map<NodeId, std::vector<Label>> legs;
    std::vector<Tensor>                  tensors;
    Label                                next = 0;
    const double                         h    = 1.0 / std::sqrt(2.0);

    for (const EdgeKey& e: d.edges()) {
        const int m = d.multiplicity(e.lo, e.hi);
        for (int k = 0; k < m; ++k) {
            if (e.lo == e.hi) {
                // A self-loop becomes two legs joined through an identity wire.
                const Label l1 = next++;
                const Label l2 = next++;
                legs[e.lo].push_back(l1);
                legs[e.lo].push_back(l2);
                tensors.push_back({{l1, l2}, {1.0, 0.0, 0.0, 1.0}});
            } else {
                const Label l = next++;
                legs[e.lo].push_back(l);
                legs[e.hi].push_back(l);
            }
        }
    }
    const Label outBase = next;
    const Label inBase  = outBase + static_cast<Label>(d.outputs().size());

    std::map<NodeId, Label> external;
    for (std::size_t i = 0; i < d.outputs().size(); ++i) {
        external[d.outputs()[i]] = outBase + static_cast<Label>(i);
    }
    for (std::size_t i = 0; i < d.inputs().size(); ++i) {
        external[d.inputs()[i]] = inBase + static_cast<Label>(i);
    }

    for (const NodeId v: d.node_ids()) {
        const Node& n = d.node(v);
        auto        l = legs[v];
        if (static_cast<int>(l.size()) > options.max_indices) {
            throw OracleLimitError("node " + std::to_string(v) + " has too many legs for the oracle");
        }
        switch (n.kind) {
        case NodeKind::Z:
        case NodeKind::X:
            tensors.push_back({l, spider_entries(n.kind, n.angle.radians(values), static_cast<int>(l.size()))});
            break;
        case NodeKind::Hadamard:
            if (l.size() != 2) {
                throw ContractError("Hadamard node " + std::to_string(v) + " must have degree 2");
            }
            tensors.push_back({l, {h, h, h, -h}});
            break;
        case NodeKind::Input:
        case NodeKind::Output: {
            if (l.size() != 1 || !external.contains(v)) {
                throw ContractError("boundary node " + std::to_string(v) + " must have degree 1");
            }
            tensors.push_back({{l[0], external.at(v)}, {1.0, 0.0, 0.0, 1.0}});
            break;
        }
        }
    }

    const std::size_t nOut = d.outputs().size();
    const std::size_t nIn  = d.inputs().size();
    if (tensors.empty()) {
        return Matrix::Ones(1, 1);
    }
    Tensor result = options.order == ContractionOrder::Greedy ? contract_greedy(std::move(tensors), options.max_indices)
                                                              : contract_sequential(std::move(tensors), options.max_indices);

    std::vector<Label> order;
    for (std::size_t i = 0; i < nOut; ++i) {
        order.push_back(outBase + static_cast<Label>(i));
    }
    for (std::size_t i = 0; i < nIn; ++i) {
        order.push_back(inBase + static_cast<Label>(i));
    }
    result = permute(result, order);
    Matrix m(Eigen::Index{1} << nOut, Eigen::Index{1} << nIn);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            m(r, c) = result.data[static_cast<std::size_t>((r << nIn) | c)];
        }
    }
    return m;
}

double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double scalar_deviation(const Matrix& a, const Matrix& b, double zeroTol) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ContractError("matrix dimensions differ");
    }
    const double na = max_abs(a);
    const double nb = max_abs(b);
    if (na <= zeroTol && nb <= zeroTol) {
        throw ContractError("both matrices vanish; the scalar is undefined");
    }
    if (na <= zeroTol || nb <= zeroTol) {
        return std::numeric_limits<double>::infinity();
    }
    const Matrix an = a / na;
    Eigen::Index r  = 0;
    Eigen::Index c  = 0;
    b.cwiseAbs().maxCoeff(&r, &c);
    const Complex lambda = an(r, c) / b(r, c);
    return max_abs(an - lambda * b);
}

bool equivalent_up_to_scalar(const Matrix& a, const Matrix& b, double tol) {
    return scalar_deviation(a, b, tol) <= tol;
}

} // namespace zx
