#include "zx/angle.hpp"

#include "zx/errors.hpp"

#include <numbers>
#include <sstream>

namespace zx {

namespace {
int mod4(int q) {
    return ((q % 4) + 4) % 4;
}
} // namespace

Angle::Angle(int quarterTurns): quarter_turns_(mod4(quarterTurns)) {}

Angle Angle::symbol(SymbolId id, int coefficient) {
    Angle a;
    if (coefficient != 0) {
        a.symbols_[id] = coefficient;
    }
    return a;
}

double Angle::radians(const SymbolValues& values) const {
    double r = quarter_turns_ * std::numbers::pi / 2.0;
    for (const auto& [id, coef]: symbols_) {
        const auto it = values.find(id);
        if (it == values.end()) {
            throw ContractError("no value assigned to symbol a" + std::to_string(id));
        }
        r += coef * it->second;
    }
    return r;
}

Angle& Angle::operator+=(const Angle& other) {
    quarter_turns_ = mod4(quarter_turns_ + other.quarter_turns_);
    for (const auto& [id, coef]: other.symbols_) {
        const int sum = (symbols_[id] += coef);
        if (sum == 0) {
            symbols_.erase(id);
        }
    }
    return *this;
}

Angle Angle::operator+(const Angle& other) const {
    Angle r = *this;
    r += other;
    return r;
}

Angle Angle::operator-() const {
    Angle r(-quarter_turns_);
    for (const auto& [id, coef]: symbols_) {
        r.symbols_[id] = -coef;
    }
    return r;
}

Angle Angle::operator-(const Angle& other) const {
    return *this + (-other);
}

std::string Angle::to_string() const {
    std::ostringstream os;
    static constexpr const char* kQuarter[] = {"0", "pi/2", "pi", "3pi/2"};
    bool                         first      = true;
    if (quarter_turns_ != 0 || symbols_.empty()) {
        os << kQuarter[quarter_turns_];
        first = false;
    }
    for (const auto& [id, coef]: symbols_) {
        if (coef < 0) {
            os << (first ? "-" : " - ");
        } else if (!first) {
            os << " + ";
        }
        if (std::abs(coef) != 1) {
            os << std::abs(coef) << '*';
        }
        os << 'a' << id;
        first = false;
    }
    return os.str();
}

} // namespace zx
