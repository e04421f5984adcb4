#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace zx {

using SymbolId     = std::int32_t;
using SymbolValues = std::map<SymbolId, double>;

/// Exact spider phase: a multiple of pi/2 plus an integer combination of free symbols.
///
/// The quarter-turn part is always kept in {0,1,2,3}; the symbol map never stores a zero
/// coefficient, so two angles compare equal iff they denote the same linear expression.
class Angle {
public:
    Angle() = default;
    explicit Angle(int quarterTurns);

    static Angle symbol(SymbolId id, int coefficient = 1);
    static Angle pi() { return Angle(2); }
    static Angle halfPi() { return Angle(1); }

    [[nodiscard]] int quarter_turns() const { return quarter_turns_; }
    [[nodiscard]] const std::map<SymbolId, int>& symbols() const { return symbols_; }

    [[nodiscard]] bool is_concrete() const { return symbols_.empty(); }
    [[nodiscard]] bool is_zero() const { return is_concrete() && quarter_turns_ == 0; }
    [[nodiscard]] bool is_pi() const { return is_concrete() && quarter_turns_ == 2; }
    /// 0 or pi.
    [[nodiscard]] bool is_pauli() const { return is_concrete() && quarter_turns_ % 2 == 0; }

    /// Numeric value; every symbol must be present in `values`.
    [[nodiscard]] double radians(const SymbolValues& values = {}) const;

    Angle& operator+=(const Angle& other);
    Angle  operator+(const Angle& other) const;
    Angle  operator-() const;
    Angle  operator-(const Angle& other) const;

    bool operator==(const Angle&) const = default;

    [[nodiscard]] std::string to_string() const;

private:
    int                     quarter_turns_ = 0;
    std::map<SymbolId, int> symbols_;
};

} // namespace zx
