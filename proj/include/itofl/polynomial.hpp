#pragma once

#include <cstddef>
#include <vector>

#include "itofl/rational.hpp"

namespace itofl {

// Univariate polynomial over Rational in the monomial basis; coeffs[i] is the
// coefficient of x^i. Kept trimmed: the leading coefficient is nonzero unless
// the polynomial is zero (empty coefficient vector).
struct RationalPoly {
    std::vector<Rational> coeffs;

    RationalPoly() = default;
    explicit RationalPoly(std::vector<Rational> c) : coeffs(std::move(c)) { trim(); }

    static RationalPoly constant(const Rational& c) {
        return c == 0 ? RationalPoly{} : RationalPoly{{c}};
    }

    bool is_zero() const { return coeffs.empty(); }
    // degree of the zero polynomial reported as -1
    int degree() const { return static_cast<int>(coeffs.size()) - 1; }

    void trim() {
        while (!coeffs.empty() && coeffs.back() == 0) coeffs.pop_back();
    }

    Rational eval(const Rational& x) const {
        Rational v = 0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * x + *it;
        return v;
    }

    bool operator==(const RationalPoly& o) const { return coeffs == o.coeffs; }
};

inline RationalPoly poly_add(const RationalPoly& a, const RationalPoly& b) {
    std::vector<Rational> r(std::max(a.coeffs.size(), b.coeffs.size()), Rational(0));
    for (std::size_t i = 0; i < a.coeffs.size(); ++i) r[i] += a.coeffs[i];
    for (std::size_t i = 0; i < b.coeffs.size(); ++i) r[i] += b.coeffs[i];
    return RationalPoly(std::move(r));
}

inline RationalPoly poly_sub(const RationalPoly& a, const RationalPoly& b) {
    std::vector<Rational> r(std::max(a.coeffs.size(), b.coeffs.size()), Rational(0));
    for (std::size_t i = 0; i < a.coeffs.size(); ++i) r[i] += a.coeffs[i];
    for (std::size_t i = 0; i < b.coeffs.size(); ++i) r[i] -= b.coeffs[i];
    return RationalPoly(std::move(r));
}

inline RationalPoly poly_mul(const RationalPoly& a, const RationalPoly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Rational> r(a.coeffs.size() + b.coeffs.size() - 1, Rational(0));
    for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
        if (a.coeffs[i] == 0) continue;
        for (std::size_t j = 0; j < b.coeffs.size(); ++j) r[i + j] += a.coeffs[i] * b.coeffs[j];
    }
    return RationalPoly(std::move(r));
}

inline RationalPoly poly_scale(const RationalPoly& a, const Rational& c) {
    if (c == 0) return {};
    std::vector<Rational> r = a.coeffs;
    for (auto& x : r) x *= c;
    return RationalPoly(std::move(r));
}

inline RationalPoly poly_derivative(const RationalPoly& a) {
    if (a.coeffs.size() <= 1) return {};
    std::vector<Rational> r(a.coeffs.size() - 1);
    for (std::size_t i = 1; i < a.coeffs.size(); ++i) r[i - 1] = a.coeffs[i] * static_cast<int>(i);
    return RationalPoly(std::move(r));
}

// F with F(y) = integral of a over [-1, y]; in particular F(-1) = 0.
inline RationalPoly integral_from_minus_one(const RationalPoly& a) {
    std::vector<Rational> r(a.coeffs.size() + 1, Rational(0));
    for (std::size_t i = 0; i < a.coeffs.size(); ++i) r[i + 1] = a.coeffs[i] / static_cast<int>(i + 1);
    Rational at_m1 = 0;
    for (std::size_t i = 1; i < r.size(); ++i) at_m1 += (i % 2 == 0 ? r[i] : -r[i]);
    r[0] = -at_m1;
    return RationalPoly(std::move(r));
}

// integral of a*b over [-1, 1]
inline Rational inner_product_11(const RationalPoly& a, const RationalPoly& b) {
    RationalPoly p = poly_mul(a, b);
    Rational s = 0;
    for (std::size_t i = 0; i < p.coeffs.size(); i += 2) s += p.coeffs[i] * Rational(2, static_cast<int>(i + 1));
    return s;
}

inline Rational integral_11(const RationalPoly& a) {
    Rational s = 0;
    for (std::size_t i = 0; i < a.coeffs.size(); i += 2) s += a.coeffs[i] * Rational(2, static_cast<int>(i + 1));
    return s;
}

}  // namespace itofl
