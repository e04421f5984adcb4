#pragma once

#include "zx/angle.hpp"
#include "zx/diagram.hpp"
#include "zx/semantics.hpp"

#include <variant>
#include <vector>

namespace zx {

struct ZRot {
    int   qubit;
    Angle angle;
};
struct XRot {
    int   qubit;
    Angle angle;
};
struct HGate {
    int qubit;
};
struct Cnot {
    int control;
    int target;
};
struct Swap {
    int a;
    int b;
};

using Gate = std::variant<ZRot, XRot, HGate, Cnot, Swap>;

/// Direct translation: rotations become degree-2 spiders, CNOT a connected Z(0)-X(0) pair,
/// H a Hadamard node, SWAP a wire permutation. No simplification is applied.
Diagram from_circuit(const std::vector<Gate>& gates, int nQubits);

/// Unitary of a single gate on n qubits (qubit 0 = most significant bit).
Matrix gate_matrix(const Gate& g, int nQubits, const SymbolValues& values = {});

/// Ordered product G_k ... G_1 of the circuit's gate matrices.
Matrix circuit_matrix(const std::vector<Gate>& gates, int nQubits, const SymbolValues& values = {});

} // namespace zx
