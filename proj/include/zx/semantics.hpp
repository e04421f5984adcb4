#pragma once

#include "zx/angle.hpp"
#include "zx/diagram.hpp"

#include <Eigen/Dense>
#include <complex>

namespace zx {

using Complex = std::complex<double>;
/// Dense 2^outputs x 2^inputs matrix; qubit 0 is the most significant bit of an index.
using Matrix = Eigen::MatrixXcd;

/// Z- or X-spider with `nIn` input and `nOut` output legs, phase given in radians.
Matrix spider_tensor(NodeKind kind, double phase, int nIn, int nOut);

enum class ContractionOrder {
    Greedy,     ///< repeatedly contract the pair with the smallest result
    Sequential, ///< fold tensors into one accumulator in node-id order
};

struct SemanticsOptions {
    /// Largest number of open indices any intermediate tensor may carry.
    int              max_indices = 24;
    ContractionOrder order       = ContractionOrder::Greedy;
};

/// Linear map denoted by the diagram, up to a global scalar. Parallel edges and self-loops are
/// contracted as ordinary wires, so non-simple intermediate diagrams are accepted.
Matrix semantics(const Diagram& d, const SymbolValues& values = {}, const SemanticsOptions& options = {});

/// True iff a == lambda * b for some nonzero lambda. `a` is first rescaled so its largest entry
/// has magnitude 1, which makes `tol` relative; lambda is read off b's largest entry.
/// Throws ContractError on dimension mismatch or when both matrices vanish.
bool equivalent_up_to_scalar(const Matrix& a, const Matrix& b, double tol);

/// max|a/|a|max - lambda*b| with lambda read off b's largest entry; infinity when exactly one
/// matrix is below `zeroTol`. Throws ContractError on dimension mismatch or when both vanish.
double scalar_deviation(const Matrix& a, const Matrix& b, double zeroTol = 1e-10);

/// Random value in [0, 2pi) for every symbol id in [0, d.max_symbol()]. Rewrites never mint
/// new symbols, so one assignment drawn from the source diagram covers every rewrite of it.
template <class Rng>
SymbolValues random_assignment(const Diagram& d, Rng& rng);

/// Largest-magnitude entry.
double max_abs(const Matrix& m);

} // namespace zx

#include <random>

namespace zx {
template <class Rng>
SymbolValues random_assignment(const Diagram& d, Rng& rng) {
    std::uniform_real_distribution<double> dist(0.0, 6.283185307179586);
    SymbolValues                           values;
    for (SymbolId id = 0; id <= d.max_symbol(); ++id) {
        values[id] = dist(rng);
    }
    return values;
}
} // namespace zx
