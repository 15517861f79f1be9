#pragma once

#include <cmath>
#include <limits>

namespace scde {

// Non-negative scalar message with a distinguished PERFECT element
// (infinite reliability). Finite values are SNRs for the RCA engines and
// LLR means for the GA engines. PERFECT is stored as +infinity, which makes
// ordinary addition absorb it for free.
class ExtScalar {
public:
    constexpr ExtScalar() : v_(0.0) {}
    constexpr explicit ExtScalar(double v) : v_(v) {}

    static constexpr ExtScalar perfect() {
        return ExtScalar(std::numeric_limits<double>::infinity());
    }

    constexpr bool is_perfect() const {
        return v_ == std::numeric_limits<double>::infinity();
    }

    // Raw stored value; +inf when PERFECT.
    constexpr double value() const { return v_; }

    friend constexpr bool operator==(ExtScalar a, ExtScalar b) { return a.v_ == b.v_; }
    friend constexpr bool operator!=(ExtScalar a, ExtScalar b) { return a.v_ != b.v_; }

private:
    double v_;
};

inline ExtScalar operator+(ExtScalar a, ExtScalar b) {
    return ExtScalar(a.value() + b.value());
}

// Multiplicity scaling: k == 0 contributes nothing even if the message is
// PERFECT (an absent edge carries no information).
inline ExtScalar scaled(int k, ExtScalar m) {
    if (k == 0) return ExtScalar(0.0);
    if (m.is_perfect()) return ExtScalar::perfect();
    return ExtScalar(static_cast<double>(k) * m.value());
}

}  // namespace scde
