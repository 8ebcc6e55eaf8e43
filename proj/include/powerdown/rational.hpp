#pragma once

// Exact rational arithmetic used for all time and energy quantities in the
// simulation core. Policies branch on threshold comparisons, so floating
// point is confined to the reporting boundary.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace powerdown {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Rat make_rat(std::int64_t num, std::int64_t den = 1) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    return Rat(BigInt(num), BigInt(den));
}

inline double to_double(const Rat& r) {
    return r.convert_to<double>();
}

// Accepts "p/q", plain integers and decimal strings ("1.25", "-0.5", "1e-3"
// is NOT supported; decimals are parsed exactly as p/10^k).
inline Rat parse_rat(std::string_view text) {
    auto fail = [&] { throw std::invalid_argument("bad rational: '" + std::string(text) + "'"); };
    if (text.empty()) fail();

    auto slash = text.find('/');
    if (slash != std::string_view::npos) {
        std::string num(text.substr(0, slash));
        std::string den(text.substr(slash + 1));
        if (num.empty() || den.empty()) fail();
        BigInt n(num), d(den);
        if (d == 0) fail();
        return Rat(n, d);
    }

    bool neg = false;
    std::size_t i = 0;
    if (text[0] == '+' || text[0] == '-') {
        neg = text[0] == '-';
        i = 1;
    }
    BigInt num = 0;
    BigInt den = 1;
    bool saw_digit = false, saw_dot = false;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c == '.') {
            if (saw_dot) fail();
            saw_dot = true;
        } else if (c >= '0' && c <= '9') {
            num = num * 10 + (c - '0');
            if (saw_dot) den *= 10;
            saw_digit = true;
        } else {
            fail();
        }
    }
    if (!saw_digit) fail();
    Rat r(num, den);
    return neg ? Rat(-r) : r;
}

inline std::string rat_to_string(const Rat& r) {
    const BigInt num = boost::multiprecision::numerator(r);
    const BigInt den = boost::multiprecision::denominator(r);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

inline Rat rat_abs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

inline Rat rat_min(const Rat& a, const Rat& b) { return a < b ? a : b; }
inline Rat rat_max(const Rat& a, const Rat& b) { return a < b ? b : a; }

// gcd over rationals: largest g with a = m*g, b = n*g for integers m, n.
inline Rat rat_gcd(const Rat& a, const Rat& b) {
    using boost::multiprecision::denominator;
    using boost::multiprecision::numerator;
    if (a == 0) return rat_abs(b);
    if (b == 0) return rat_abs(a);
    const BigInt an = numerator(a), ad = denominator(a);
    const BigInt bn = numerator(b), bd = denominator(b);
    const BigInt num = boost::multiprecision::gcd(BigInt(an * bd), BigInt(bn * ad));
    return rat_abs(Rat(num, ad * bd));
}

// true iff value is an integer multiple of step (step > 0)
inline bool is_multiple_of(const Rat& value, const Rat& step) {
    if (step <= 0) throw std::invalid_argument("step must be positive");
    Rat q = value / step;
    return boost::multiprecision::denominator(q) == 1;
}

inline std::int64_t exact_div(const Rat& value, const Rat& step) {
    Rat q = value / step;
    if (boost::multiprecision::denominator(q) != 1)
        throw std::invalid_argument("value not grid-aligned");
    return boost::multiprecision::numerator(q).convert_to<std::int64_t>();
}

}  // namespace powerdown
