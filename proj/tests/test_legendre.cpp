#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "itofl/legendre.hpp"
#include "itofl/polynomial.hpp"
#include "itofl/rational.hpp"

using namespace itofl;

TEST_CASE("legendre_poly first members match the recurrence by hand") {
    REQUIRE(legendre_poly(0) == RationalPoly({Rational(1)}));
    REQUIRE(legendre_poly(1) == RationalPoly({Rational(0), Rational(1)}));
    REQUIRE(legendre_poly(2) == RationalPoly({Rational(-1, 2), Rational(0), Rational(3, 2)}));
    REQUIRE(legendre_poly(3) == RationalPoly({Rational(0), Rational(-3, 2), Rational(0), Rational(5, 2)}));
}

TEST_CASE("legendre_poly is 1 at x=1 for all cached degrees") {
    for (int j = 0; j <= 12; ++j) REQUIRE(legendre_poly(j).eval(1) == 1);
}

TEST_CASE("legendre polynomials are orthogonal with norm 2/(2j+1), exactly") {
    for (int i = 0; i <= 12; ++i) {
        for (int j = 0; j <= 12; ++j) {
            Rational ip = inner_product_11(legendre_poly(i), legendre_poly(j));
            if (i == j)
                REQUIRE(ip == legendre_norm2(j));
            else
                REQUIRE(ip == 0);
        }
    }
}

TEST_CASE("legendre_poly rejects out-of-range indices") {
    REQUIRE_THROWS_AS(legendre_poly(-1), std::invalid_argument);
    REQUIRE_THROWS_AS(legendre_poly(kMaxLegendreIndex + 1), std::invalid_argument);
}

TEST_CASE("poly_mul handles products and the zero polynomial") {
    RationalPoly x({Rational(0), Rational(1)});
    REQUIRE(poly_mul(x, x) == RationalPoly({Rational(0), Rational(0), Rational(1)}));
    REQUIRE(poly_mul(legendre_poly(1), legendre_poly(1)) ==
            RationalPoly({Rational(0), Rational(0), Rational(1)}));
    REQUIRE(poly_mul(x, RationalPoly{}).is_zero());
    RationalPoly a({Rational(1), Rational(2)});
    RationalPoly b({Rational(3), Rational(4)});
    REQUIRE(poly_mul(a, b).degree() == a.degree() + b.degree());
}

TEST_CASE("integral_from_minus_one vanishes at -1 and antidifferentiates") {
    // constant 1 -> y + 1
    REQUIRE(integral_from_minus_one(RationalPoly({Rational(1)})) ==
            RationalPoly({Rational(1), Rational(1)}));
    // P1 -> (y^2 - 1)/2
    REQUIRE(integral_from_minus_one(legendre_poly(1)) ==
            RationalPoly({Rational(-1, 2), Rational(0), Rational(1, 2)}));
    // P2 -> (P3 - P1)/5
    RationalPoly expect = poly_scale(poly_sub(legendre_poly(3), legendre_poly(1)), Rational(1, 5));
    REQUIRE(integral_from_minus_one(legendre_poly(2)) == expect);
    // general antiderivative identity for all j <= 12: integral P_j = (P_{j+1} - P_{j-1})/(2j+1)
    for (int j = 1; j <= 12; ++j) {
        RationalPoly want =
            poly_scale(poly_sub(legendre_poly(j + 1), legendre_poly(j - 1)), Rational(1, 2 * j + 1));
        REQUIRE(integral_from_minus_one(legendre_poly(j)) == want);
    }
}

TEST_CASE("differentiating the antiderivative recovers the input") {
    for (int j = 0; j <= 10; ++j) {
        RationalPoly p = legendre_poly(j);
        REQUIRE(poly_derivative(integral_from_minus_one(p)) == p);
    }
    RationalPoly mixed({Rational(3, 7), Rational(-2), Rational(0), Rational(5, 3)});
    REQUIRE(poly_derivative(integral_from_minus_one(mixed)) == mixed);
}

TEST_CASE("inner_product_11 on low-degree pairs") {
    REQUIRE(inner_product_11(legendre_poly(1), legendre_poly(1)) == Rational(2, 3));
    REQUIRE(inner_product_11(legendre_poly(1), legendre_poly(2)) == 0);
    REQUIRE(inner_product_11(legendre_poly(0), legendre_poly(0)) == 2);
}

TEST_CASE("poly arithmetic identities") {
    RationalPoly a({Rational(1), Rational(-4, 3), Rational(2)});
    RationalPoly b({Rational(0), Rational(7)});
    REQUIRE(poly_add(a, poly_sub(b, a)) == b);
    REQUIRE(poly_scale(a, Rational(0)).is_zero());
    REQUIRE(poly_add(a, RationalPoly{}) == a);
    // trimming: (x) + (-x) is the zero polynomial with degree -1
    RationalPoly x({Rational(0), Rational(1)});
    REQUIRE(poly_sub(x, x).degree() == -1);
}

TEST_CASE("rational parsing round-trips and rejects junk") {
    REQUIRE(parse_rational("2/105") == Rational(2, 105));
    REQUIRE(parse_rational("-8/945") == Rational(-8, 945));
    REQUIRE(parse_rational("7") == Rational(7));
    REQUIRE(to_string(Rational(-4, 6)) == "-2/3");
    REQUIRE_THROWS_AS(parse_rational("x/3"), std::invalid_argument);
    REQUIRE_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
}

namespace {

// composite Gauss quadrature on [a,b]: 8 panels x 8-point rule
double quad64(double a, double b, const std::function<double(double)>& f) {
    static const double xs[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                 0.9602898564975363};
    static const double ws[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                 0.1012285362903763};
    double total = 0.0;
    const int panels = 8;
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        const double half = 0.5 * h;
        double s = 0.0;
        for (int i = 0; i < 4; ++i) s += ws[i] * (f(mid - half * xs[i]) + f(mid + half * xs[i]));
        total += s * half;
    }
    return total;
}

}  // namespace

TEST_CASE("scaled basis functions are orthonormal under floating quadrature") {
    const double t = 0.3, T = 1.1, dt = T - t;
    auto phi = [&](int j, double s) {
        return std::sqrt((2 * j + 1) / dt) * legendre_eval(j, 2 * (s - t) / dt - 1);
    };
    for (int i = 0; i <= 10; ++i) {
        for (int j = 0; j <= 10; ++j) {
            double ip = quad64(t, T, [&](double s) { return phi(i, s) * phi(j, s); });
            double want = (i == j) ? 1.0 : 0.0;
            REQUIRE(std::abs(ip - want) <= 1e-10);
        }
    }
}

TEST_CASE("legendre_eval agrees with the exact polynomials") {
    for (int j = 0; j <= 12; ++j) {
        for (int n = -100; n <= 100; n += 25) {
            Rational x(n, 100);
            double exact = to_double(legendre_poly(j).eval(x));
            double fast = legendre_eval(j, to_double(x));
            REQUIRE(std::abs(exact - fast) < 1e-12);
        }
    }
}
