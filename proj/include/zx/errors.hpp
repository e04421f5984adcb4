#pragma once

#include <stdexcept>
#include <string>

namespace zx {

/// Caller violated an operation's precondition (masked action, bad index, ...).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Malformed or invariant-violating external input (files, config, flags).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The tensor-contraction oracle refused a diagram that is too large.
class OracleLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure during training (non-finite activations or losses).
class TrainingFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace zx
