#include "zx/circuit.hpp"

#include "zx/errors.hpp"

#include <cmath>
#include <string>

namespace zx {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

void check_qubit(int q, int n) {
    if (q < 0 || q >= n) {
        throw ContractError("qubit index " + std::to_string(q) + " out of range");
    }
}

Matrix embed_single(const Eigen::Matrix2cd& u, int qubit, int n) {
    const Eigen::Index dim   = Eigen::Index{1} << n;
    const int          shift = n - 1 - qubit;
    Matrix             m     = Matrix::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        const int bit = static_cast<int>((col >> shift) & 1);
        for (int out = 0; out < 2; ++out) {
            const Eigen::Index row = (col & ~(Eigen::Index{1} << shift)) | (Eigen::Index{out} << shift);
            m(row, col) += u(out, bit);
        }
    }
    return m;
}

Matrix permutation(int n, auto&& map) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    Matrix             m   = Matrix::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        m(map(col), col) = 1.0;
    }
    return m;
}

} // namespace

Diagram from_circuit(const std::vector<Gate>& gates, int nQubits) {
    Diagram             d;
    std::vector<NodeId> inputs;
    std::vector<NodeId> frontier;
    for (int q = 0; q < nQubits; ++q) {
        inputs.push_back(d.add_input());
        frontier.push_back(inputs.back());
    }
    auto extend = [&](int q, NodeKind kind, Angle angle) {
        const NodeId v = d.add_node(kind, std::move(angle));
        d.add_edge(frontier[static_cast<std::size_t>(q)], v);
        frontier[static_cast<std::size_t>(q)] = v;
        return v;
    };
    for (const Gate& g: gates) {
        std::visit(Overloaded{
                           [&](const ZRot& r) {
                               check_qubit(r.qubit, nQubits);
                               extend(r.qubit, NodeKind::Z, r.angle);
                           },
                           [&](const XRot& r) {
                               check_qubit(r.qubit, nQubits);
                               extend(r.qubit, NodeKind::X, r.angle);
                           },
                           [&](const HGate& h) {
                               check_qubit(h.qubit, nQubits);
                               extend(h.qubit, NodeKind::Hadamard, {});
                           },
                           [&](const Cnot& c) {
                               check_qubit(c.control, nQubits);
                               check_qubit(c.target, nQubits);
                               if (c.control == c.target) {
                                   throw ContractError("CNOT control equals target");
                               }
                               const NodeId z = extend(c.control, NodeKind::Z, {});
                               const NodeId x = extend(c.target, NodeKind::X, {});
                               d.add_edge(z, x);
                           },
                           [&](const Swap& s) {
                               check_qubit(s.a, nQubits);
                               check_qubit(s.b, nQubits);
                               std::swap(frontier[static_cast<std::size_t>(s.a)], frontier[static_cast<std::size_t>(s.b)]);
                           },
                   },
                   g);
    }
    std::vector<NodeId> outputs;
    for (int q = 0; q < nQubits; ++q) {
        outputs.push_back(d.add_node(NodeKind::Output));
        d.add_edge(frontier[static_cast<std::size_t>(q)], outputs.back());
    }
    d.set_boundary(std::move(inputs), std::move(outputs));
    return d;
}

Matrix gate_matrix(const Gate& g, int n, const SymbolValues& values) {
    const double     s = 1.0 / std::sqrt(2.0);
    Eigen::Matrix2cd h;
    h << s, s, s, -s;
    return std::visit(Overloaded{
                              [&](const ZRot& r) -> Matrix {
                                  check_qubit(r.qubit, n);
                                  Eigen::Matrix2cd u = Eigen::Matrix2cd::Zero();
                                  u(0, 0)            = 1.0;
                                  u(1, 1)            = std::polar(1.0, r.angle.radians(values));
                                  return embed_single(u, r.qubit, n);
                              },
                              [&](const XRot& r) -> Matrix {
                                  check_qubit(r.qubit, n);
                                  Eigen::Matrix2cd u = Eigen::Matrix2cd::Zero();
                                  u(0, 0)            = 1.0;
                                  u(1, 1)            = std::polar(1.0, r.angle.radians(values));
                                  return embed_single(h * u * h, r.qubit, n);
                              },
                              [&](const HGate& x) -> Matrix {
                                  check_qubit(x.qubit, n);
                                  return embed_single(h, x.qubit, n);
                              },
                              [&](const Cnot& c) -> Matrix {
                                  check_qubit(c.control, n);
                                  check_qubit(c.target, n);
                                  const int cs = n - 1 - c.control;
                                  const int ts = n - 1 - c.target;
                                  return permutation(n, [&](Eigen::Index col) {
                                      return ((col >> cs) & 1) ? (col ^ (Eigen::Index{1} << ts)) : col;
                                  });
                              },
                              [&](const Swap& sw) -> Matrix {
                                  check_qubit(sw.a, n);
                                  check_qubit(sw.b, n);
                                  const int sa = n - 1 - sw.a;
                                  const int sb = n - 1 - sw.b;
                                  return permutation(n, [&](Eigen::Index col) {
                                      const auto ba = (col >> sa) & 1;
                                      const auto bb = (col >> sb) & 1;
                                      Eigen::Index r = col & ~((Eigen::Index{1} << sa) | (Eigen::Index{1} << sb));
                                      return r | (ba << sb) | (bb << sa);
                                  });
                              },
                      },
                      g);
}

Matrix circuit_matrix(const std::vector<Gate>& gates, int n, const SymbolValues& values) {
    Matrix m = Matrix::Identity(Eigen::Index{1} << n, Eigen::Index{1} << n);
    for (const Gate& g: gates) {
        m = gate_matrix(g, n, values) * m;
    }
    return m;
}

} // namespace zx
