#pragma once

#include <mutex>
#include <stdexcept>
#include <vector>

#include "itofl/polynomial.hpp"

namespace itofl {

// Hard cap on the basis index; keeps accidental huge-degree requests from
// silently eating memory. Well above every supported use (tables need <= 12,
// the largest error sweeps stay under 400).
inline constexpr int kMaxLegendreIndex = 512;

// P_j on [-1,1] via the three-term recurrence
//   (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1},
// exact rationals, cached. Thread-safe.
inline const RationalPoly& legendre_poly(int j) {
    if (j < 0 || j > kMaxLegendreIndex) throw std::invalid_argument("legendre_poly: index out of range");
    static std::vector<RationalPoly> cache = {
        RationalPoly({Rational(1)}),
        RationalPoly({Rational(0), Rational(1)}),
    };
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    while (static_cast<int>(cache.size()) <= j) {
        const int n = static_cast<int>(cache.size()) - 1;
        RationalPoly x_pn({Rational(0), Rational(1)});
        RationalPoly next = poly_sub(poly_scale(poly_mul(x_pn, cache[n]), Rational(2 * n + 1)),
                                     poly_scale(cache[n - 1], Rational(n)));
        cache.push_back(poly_scale(next, Rational(1, n + 1)));
    }
    return cache[j];
}

// squared L2 norm of P_j on [-1,1]
inline Rational legendre_norm2(int j) { return Rational(2, 2 * j + 1); }

// double-precision P_j(x) by the same recurrence; for quadrature and
// noise-coupling grids where exact values are unnecessary.
inline double legendre_eval(int j, double x) {
    if (j == 0) return 1.0;
    if (j == 1) return x;
    double pm = 1.0, p = x;
    for (int n = 1; n < j; ++n) {
        double nx = ((2 * n + 1) * x * p - n * pm) / (n + 1);
        pm = p;
        p = nx;
    }
    return p;
}

}  // namespace itofl
