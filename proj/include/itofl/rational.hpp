#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace itofl {

// Arbitrary-precision rational, always canonical: gcd-reduced, denominator > 0.
// boost::multiprecision::cpp_rational maintains that form on every operation,
// so equality is structural.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rational& r) { return r.template convert_to<double>(); }

inline BigInt num(const Rational& r) { return boost::multiprecision::numerator(r); }
inline BigInt den(const Rational& r) { return boost::multiprecision::denominator(r); }

// Accepts "n" or "n/d", optional leading '-'. Throws std::invalid_argument on junk.
inline Rational parse_rational(const std::string& s) {
    const auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(BigInt(s));
        BigInt n(s.substr(0, slash));
        BigInt d(s.substr(slash + 1));
        if (d == 0) throw std::invalid_argument("zero denominator");
        return Rational(n, d);
    } catch (const std::runtime_error&) {
        throw std::invalid_argument("not a rational: " + s);
    }
}

inline std::string to_string(const Rational& r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

// Exact value of a finite double as a rational (every finite double is dyadic).
inline Rational rational_from_double(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("rational_from_double: not finite");
    int e = 0;
    // 2^53 * frexp mantissa is an exact integer
    const double m = std::frexp(x, &e) * 9007199254740992.0;
    e -= 53;
    Rational r(BigInt(static_cast<std::int64_t>(m)));
    if (e >= 0)
        r *= Rational(BigInt(1) << e);
    else
        r /= Rational(BigInt(1) << -e);
    return r;
}

}  // namespace itofl
