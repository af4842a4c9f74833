#pragma once

// Index set (-inf,-0] u [0,inf] with distinct -0 < +0.

#include <charconv>
#include <cmath>
#include <compare>
#include <limits>
#include <string>
#include <system_error>

#include "cnw/error.hpp"

namespace cnw {

enum class Branch { Neg, Pos };

struct ExtendedLevel {
    Branch branch = Branch::Pos;
    double magnitude = 0.0; // >= 0, may be +inf

    static constexpr ExtendedLevel neg(double m) { return {Branch::Neg, m}; }
    static constexpr ExtendedLevel pos(double m) { return {Branch::Pos, m}; }
    static constexpr ExtendedLevel minus_zero() { return {Branch::Neg, 0.0}; }
    static constexpr ExtendedLevel plus_zero() { return {Branch::Pos, 0.0}; }
    static constexpr ExtendedLevel infinity() {
        return {Branch::Pos, std::numeric_limits<double>::infinity()};
    }

    bool is_neg() const noexcept { return branch == Branch::Neg; }

    friend std::strong_ordering operator<=>(const ExtendedLevel& a, const ExtendedLevel& b) noexcept {
        if (a.branch != b.branch)
            return a.branch == Branch::Neg ? std::strong_ordering::less : std::strong_ordering::greater;
        // Magnitudes are never NaN; (NEG,a) < (NEG,b) iff a > b.
        if (a.magnitude == b.magnitude) return std::strong_ordering::equal;
        const bool mag_less = a.magnitude < b.magnitude;
        if (a.branch == Branch::Pos)
            return mag_less ? std::strong_ordering::less : std::strong_ordering::greater;
        return mag_less ? std::strong_ordering::greater : std::strong_ordering::less;
    }
    friend bool operator==(const ExtendedLevel&, const ExtendedLevel&) = default;
};

inline std::strong_ordering compare_levels(const ExtendedLevel& a, const ExtendedLevel& b) noexcept {
    return a <=> b;
}

/// Shortest decimal that parses back to exactly `v` (finite values only).
inline std::string shortest_decimal(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Serialized token: "-0", "+0", "inf", "-inf", "-<m>" or "<m>".
inline std::string level_token(const ExtendedLevel& l) {
    if (l.magnitude == 0.0) return l.is_neg() ? "-0" : "+0";
    if (std::isinf(l.magnitude)) return l.is_neg() ? "-inf" : "inf";
    return (l.is_neg() ? "-" : "") + shortest_decimal(l.magnitude);
}

inline ExtendedLevel parse_level_token(const std::string& tok) {
    if (tok == "-0") return ExtendedLevel::minus_zero();
    if (tok == "+0") return ExtendedLevel::plus_zero();
    if (tok == "inf") return ExtendedLevel::infinity();
    if (tok == "-inf") return ExtendedLevel::neg(std::numeric_limits<double>::infinity());
    const bool neg = !tok.empty() && tok.front() == '-';
    const char* first = tok.data() + (neg ? 1 : 0);
    const char* last = tok.data() + tok.size();
    double m = 0.0;
    auto res = std::from_chars(first, last, m);
    if (res.ec != std::errc{} || res.ptr != last || !(m > 0.0) || std::isinf(m))
        throw SpecError("invalid level token '" + tok + "'");
    return neg ? ExtendedLevel::neg(m) : ExtendedLevel::pos(m);
}

} // namespace cnw
