#include "support.hpp"
#include "zx/circuit.hpp"
#include "zx/errors.hpp"
#include "zx/sampler.hpp"
#include "zx/semantics.hpp"
#include "zx/serialize.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

namespace zx {
namespace {

using std::numbers::pi;

Matrix hadamard() {
    Matrix h(2, 2);
    h << 1, 1, 1, -1;
    return h / std::sqrt(2.0);
}

Matrix cnot() {
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
    return m;
}

Matrix rz(double a) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0)  = 1;
    m(1, 1)  = std::polar(1.0, a);
    return m;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix m(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            m.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return m;
}

Matrix rx(double a) {
    return hadamard() * rz(a) * hadamard();
}

TEST(Angle, NormalizesAndDropsZeroCoefficients) {
    EXPECT_EQ(Angle(7).quarter_turns(), 3);
    EXPECT_EQ(Angle(-1).quarter_turns(), 3);
    EXPECT_EQ(Angle::symbol(2) + Angle::symbol(2, -1), Angle());
    EXPECT_TRUE((Angle::symbol(0) - Angle::symbol(0)).is_concrete());
    EXPECT_TRUE(Angle(2).is_pi());
    EXPECT_TRUE(Angle(2).is_pauli());
    EXPECT_FALSE(Angle(1).is_pauli());
    EXPECT_NEAR(Angle(3).radians(), 1.5 * pi, 1e-15);
    EXPECT_NEAR((Angle(1) + Angle::symbol(4, 2)).radians({{4, 0.25}}), 0.5 * pi + 0.5, 1e-15);
}

TEST(Angle, GroupLaws) {
    Rng                                rng(1);
    std::uniform_int_distribution<int> q(-9, 9);
    std::uniform_int_distribution<int> s(0, 3);
    auto draw = [&] {
        Angle a(q(rng));
        for (int k = 0; k < 2; ++k) {
            a += Angle::symbol(s(rng), q(rng) == 0 ? 1 : q(rng));
        }
        return a;
    };
    for (int i = 0; i < 200; ++i) {
        const Angle a = draw();
        const Angle b = draw();
        const Angle c = draw();
        EXPECT_EQ(a + b, b + a);
        EXPECT_EQ((a + b) + c, a + (b + c));
        EXPECT_EQ(a + (-a), Angle());
        EXPECT_GE((a + b).quarter_turns(), 0);
        EXPECT_LE((a + b).quarter_turns(), 3);
        const Angle diff = a - c;
        for (const auto& [id, coef]: diff.symbols()) {
            EXPECT_NE(coef, 0) << id;
        }
    }
}

TEST(SpiderTensor, Definitions) {
    EXPECT_TRUE(spider_tensor(NodeKind::Z, 0.0, 1, 1).isApprox(Matrix::Identity(2, 2)));
    EXPECT_TRUE(spider_tensor(NodeKind::Z, 0.7, 1, 1).isApprox(rz(0.7)));
    // |+> + |->
    Matrix plusMinus(2, 1);
    plusMinus << 1.0 / std::sqrt(2.0) + 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0) - 1.0 / std::sqrt(2.0);
    EXPECT_TRUE(equivalent_up_to_scalar(spider_tensor(NodeKind::X, 0.0, 0, 1), plusMinus, 1e-12));
    Matrix plus(2, 1);
    plus << 1, 1;
    EXPECT_TRUE(equivalent_up_to_scalar(spider_tensor(NodeKind::X, pi, 0, 1), Matrix::Identity(2, 2).col(1), 1e-12));
    EXPECT_TRUE(equivalent_up_to_scalar(spider_tensor(NodeKind::Z, 0.0, 0, 1), plus, 1e-12));
    const Matrix z3 = spider_tensor(NodeKind::Z, 0.3, 1, 2);
    EXPECT_EQ(z3.rows(), 4);
    EXPECT_EQ(z3.cols(), 2);
    EXPECT_NEAR(std::abs(z3(0, 0) - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(z3(3, 1) - std::polar(1.0, 0.3)), 0.0, 1e-15);
    EXPECT_NEAR(z3.cwiseAbs().sum(), 2.0, 1e-15);
}

TEST(Semantics, BareWireAndCnot) {
    Diagram w;
    w.add_edge(w.add_input(), w.add_output());
    EXPECT_TRUE(semantics(w).isApprox(Matrix::Identity(2, 2)));

    Diagram      d;
    const NodeId i0 = d.add_input();
    const NodeId i1 = d.add_input();
    const NodeId o0 = d.add_output();
    const NodeId o1 = d.add_output();
    const NodeId z  = d.add_spider(NodeKind::Z);
    const NodeId x  = d.add_spider(NodeKind::X);
    d.add_edge(i0, z);
    d.add_edge(z, o0);
    d.add_edge(i1, x);
    d.add_edge(x, o1);
    d.add_edge(z, x);
    EXPECT_TRUE(equivalent_up_to_scalar(semantics(d), cnot(), 1e-9));
    EXPECT_TRUE(equivalent_up_to_scalar(circuit_matrix({Cnot{0, 1}}, 2), semantics(d), 1e-9));
}

TEST(Semantics, EulerChainIsHadamard) {
    const Diagram d = test::wire({{NodeKind::Z, Angle(1)}, {NodeKind::X, Angle(1)}, {NodeKind::Z, Angle(1)}});
    const Matrix  oracle = rz(pi / 2) * rx(pi / 2) * rz(pi / 2);
    EXPECT_TRUE(equivalent_up_to_scalar(oracle, hadamard(), 1e-12));
    EXPECT_TRUE(equivalent_up_to_scalar(semantics(d), hadamard(), 1e-9));
}

TEST(Semantics, ContractionOrderIndependent) {
    const auto corpus = sample_corpus(SamplerConfig::with_spiders(5, 10), 30, 3);
    Rng        rng(4);
    for (const Diagram& d: corpus) {
        const SymbolValues v = random_assignment(d, rng);
        const Matrix       a = semantics(d, v, {.order = ContractionOrder::Greedy});
        const Matrix       b = semantics(d, v, {.order = ContractionOrder::Sequential});
        EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, max_abs(a)));
    }
}

TEST(Semantics, SizeCapRaises) {
    Diagram d;
    for (int q = 0; q < 7; ++q) {
        const NodeId v = d.add_spider(NodeKind::Z);
        d.add_edge(d.add_input(), v);
        d.add_edge(v, d.add_output());
    }
    EXPECT_THROW(semantics(d, {}, {.max_indices = 10}), OracleLimitError);
}

TEST(Equivalence, ScalarsAndErrors) {
    const Matrix id = Matrix::Identity(2, 2);
    EXPECT_TRUE(equivalent_up_to_scalar(id, Complex(0, 3) * id, 1e-9));
    Matrix px(2, 2);
    px << 0, 1, 1, 0;
    EXPECT_FALSE(equivalent_up_to_scalar(id, px, 1e-9));
    EXPECT_THROW(equivalent_up_to_scalar(id, Matrix::Identity(4, 4), 1e-9), ContractError);
    EXPECT_THROW(equivalent_up_to_scalar(Matrix::Zero(2, 2), Matrix::Zero(2, 2), 1e-9), ContractError);
}

TEST(Circuit, EmptyCircuitIsTwoWires) {
    const Diagram d = from_circuit({}, 2);
    EXPECT_EQ(d.num_nodes(), 4U);
    EXPECT_EQ(d.num_edges(), 2U);
    EXPECT_TRUE(semantics(d).isApprox(Matrix::Identity(4, 4)));
}

TEST(Circuit, OrderedProduct) {
    const std::vector<Gate> c{ZRot{0, Angle(1)}, Cnot{0, 1}, XRot{1, Angle(2)}};
    const Matrix oracle = kron(Matrix::Identity(2, 2), rx(pi)) * cnot() * kron(rz(pi / 2), Matrix::Identity(2, 2));
    EXPECT_TRUE(equivalent_up_to_scalar(circuit_matrix(c, 2), oracle, 1e-12));
    EXPECT_TRUE(equivalent_up_to_scalar(semantics(from_circuit(c, 2)), oracle, 1e-9));
}

TEST(Circuit, RandomSmallCircuitsMatchTheirMatrices) {
    Rng                                rng(5);
    std::uniform_int_distribution<int> kind(0, 4);
    std::uniform_int_distribution<int> quarter(0, 3);
    for (int trial = 0; trial < 60; ++trial) {
        const int                          n = 1 + trial % 3;
        std::uniform_int_distribution<int> qubit(0, n - 1);
        std::vector<Gate>                  gates;
        const int                          len = 1 + trial % 6;
        for (int g = 0; g < len; ++g) {
            const int a = qubit(rng);
            int       b = qubit(rng);
            if (n > 1) {
                while (b == a) {
                    b = qubit(rng);
                }
            }
            switch (n == 1 ? kind(rng) % 3 : kind(rng)) {
            case 0: gates.emplace_back(ZRot{a, Angle(quarter(rng))}); break;
            case 1: gates.emplace_back(XRot{a, Angle(quarter(rng))}); break;
            case 2: gates.emplace_back(HGate{a}); break;
            case 3: gates.emplace_back(Cnot{a, b}); break;
            default: gates.emplace_back(Swap{a, b}); break;
            }
        }
        // independent oracle: product of per-gate matrices
        Matrix oracle = Matrix::Identity(1 << n, 1 << n);
        for (const Gate& g: gates) {
            oracle = gate_matrix(g, n) * oracle;
        }
        EXPECT_TRUE(equivalent_up_to_scalar(semantics(from_circuit(gates, n)), oracle, 1e-9)) << trial;
    }
}

TEST(Serialize, RoundTripIsIsomorphic) {
    const auto corpus = sample_corpus(SamplerConfig{}, 40, 6);
    for (const Diagram& d: corpus) {
        EXPECT_TRUE(are_isomorphic(deserialize(serialize(d)), d));
    }
    std::stringstream ss;
    write_jsonl(ss, corpus);
    const auto back = read_jsonl(ss);
    ASSERT_EQ(back.size(), corpus.size());
    EXPECT_TRUE(are_isomorphic(back.back(), corpus.back()));
}

TEST(Serialize, RejectsInvariantViolations) {
    const std::string pendantH =
        R"({"version":1,"nodes":[{"id":0,"kind":"IN"},{"id":1,"kind":"H"},{"id":2,"kind":"Z","quarter_turns":0},)"
        R"({"id":3,"kind":"OUT"}],"edges":[[0,2],[2,3],[1,2]],"inputs":[0],"outputs":[3]})";
    EXPECT_THROW(deserialize(pendantH), InputError);
    EXPECT_THROW(deserialize("{not json"), InputError);
    EXPECT_THROW(deserialize(R"({"version":2,"nodes":[],"edges":[],"inputs":[],"outputs":[]})"), InputError);
}

TEST(Serialize, QuarterTurnsNormalized) {
    const std::string doc =
        R"({"version":1,"nodes":[{"id":0,"kind":"IN"},{"id":5,"kind":"Z","quarter_turns":7,"symbols":{"2":-1}},)"
        R"({"id":9,"kind":"OUT"}],"edges":[[0,5],[5,9]],"inputs":[0],"outputs":[9]})";
    const Diagram d = deserialize(doc);
    EXPECT_EQ(d.node(5).angle.quarter_turns(), 3);
    EXPECT_EQ(d.node(5).angle.symbols().at(2), -1);
}

TEST(Diagram, Isomorphism) {
    Rng           rng(7);
    const Diagram d = sample_corpus(SamplerConfig{}, 1, 8)[0];
    EXPECT_TRUE(are_isomorphic(d, test::relabel(d, rng)));
    Diagram e = d;
    e.node(e.node_ids().back()).angle += Angle(1);
    if (is_spider(e.kind(e.node_ids().back()))) {
        EXPECT_FALSE(are_isomorphic(d, e));
    }
}

} // namespace
} // namespace zx
