#pragma once

#include <stdexcept>
#include <vector>

#include "itofl/polynomial.hpp"

namespace itofl {

// Deterministic weight psi(s) of one integration level on [t, T], stored in
// the reference variable x in [-1,1] under the map s = t + (T-t)(x+1)/2.
// Weights homogeneous of degree m in the interval length keep a fixed
// reference polynomial: psi(s) = (T-t)^m * ref(x).
struct Weight {
    RationalPoly ref;
    int scale_degree = 0;

    static Weight unit() { return {RationalPoly({Rational(1)}), 0}; }
    // psi(s) = s - t = (T-t)(x+1)/2
    static Weight time_minus_start() { return {RationalPoly({Rational(1, 2), Rational(1, 2)}), 1}; }
    // psi(s) = t - s
    static Weight start_minus_time() { return {RationalPoly({Rational(-1, 2), Rational(-1, 2)}), 1}; }
    // psi(s) = T - s = (T-t)(1-x)/2
    static Weight end_minus_time() { return {RationalPoly({Rational(1, 2), Rational(-1, 2)}), 1}; }

    bool is_unit() const { return scale_degree == 0 && ref == RationalPoly({Rational(1)}); }
    bool operator==(const Weight&) const = default;
};

// Per-level weights; levels[0] belongs to the innermost integral.
struct WeightSpec {
    std::vector<Weight> levels;

    WeightSpec() = default;
    explicit WeightSpec(std::vector<Weight> l) : levels(std::move(l)) {}

    static WeightSpec unit(int k) {
        if (k < 1) throw std::invalid_argument("WeightSpec: multiplicity must be positive");
        return WeightSpec(std::vector<Weight>(static_cast<std::size_t>(k), Weight::unit()));
    }

    int multiplicity() const { return static_cast<int>(levels.size()); }

    int total_scale_degree() const {
        int s = 0;
        for (const auto& w : levels) s += w.scale_degree;
        return s;
    }

    bool all_unit() const {
        for (const auto& w : levels)
            if (!w.is_unit()) return false;
        return true;
    }

    bool operator==(const WeightSpec&) const = default;
};

}  // namespace itofl
