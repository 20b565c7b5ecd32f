#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "itofl/legendre.hpp"
#include "itofl/weights.hpp"

namespace itofl {

inline constexpr int kMaxMultiplicity = 6;

namespace detail {

inline void check_multiplicity(int k) {
    if (k < 1 || k > kMaxMultiplicity) throw std::invalid_argument("multiplicity must be in [1, 6]");
}

inline void check_index(int j) {
    if (j < 0 || j > kMaxLegendreIndex) throw std::invalid_argument("basis index out of range");
}

}  // namespace detail

// Exact iterated integral over the reference simplex -1 < x_1 < ... < x_k < 1:
//   cbar = integral w_k P_{j_k} integral ... integral w_1 P_{j_1} dx_1 ... dx_k.
// Indices are given innermost-first: indices[l] = j_{l+1}.
inline Rational cbar(const std::vector<int>& indices_inner_first, const WeightSpec& weights) {
    const int k = weights.multiplicity();
    detail::check_multiplicity(k);
    if (static_cast<int>(indices_inner_first.size()) != k)
        throw std::invalid_argument("cbar: index count must equal multiplicity");
    RationalPoly running = RationalPoly({Rational(1)});
    for (int l = 0; l < k; ++l) {
        detail::check_index(indices_inner_first[l]);
        RationalPoly f =
            poly_mul(poly_mul(weights.levels[l].ref, legendre_poly(indices_inner_first[l])), running);
        if (l + 1 < k)
            running = integral_from_minus_one(f);
        else
            return integral_11(f);
    }
    return 0;  // unreachable
}

inline Rational cbar(const std::vector<int>& indices_inner_first) {
    return cbar(indices_inner_first, WeightSpec::unit(static_cast<int>(indices_inner_first.size())));
}

// Dense exact coefficient tensor over the box 0 <= j_l <= bounds[l], with the
// scaling metadata that turns cbar into the dimensional coefficient
//   C = prod sqrt(2 j_l + 1) * (T-t)^{k/2 + total_scale_degree} * 2^{-k} * cbar.
class CoefficientGrid {
  public:
    CoefficientGrid(WeightSpec weights, std::vector<int> bounds)
        : weights_(std::move(weights)), bounds_(std::move(bounds)) {
        const int k = weights_.multiplicity();
        detail::check_multiplicity(k);
        if (static_cast<int>(bounds_.size()) != k)
            throw std::invalid_argument("CoefficientGrid: bounds count must equal multiplicity");
        for (int b : bounds_) detail::check_index(b);
        compute();
    }

    int multiplicity() const { return weights_.multiplicity(); }
    const std::vector<int>& bounds() const { return bounds_; }
    const WeightSpec& weights() const { return weights_; }
    std::int64_t size() const { return static_cast<std::int64_t>(values_.size()); }

    std::int64_t flat_index(const std::vector<int>& idx_inner_first) const {
        if (static_cast<int>(idx_inner_first.size()) != multiplicity())
            throw std::invalid_argument("CoefficientGrid: bad index arity");
        std::int64_t f = 0, stride = 1;
        for (int l = 0; l < multiplicity(); ++l) {
            const int j = idx_inner_first[l];
            if (j < 0 || j > bounds_[l]) throw std::out_of_range("CoefficientGrid: index outside bounds");
            f += stride * j;
            stride *= bounds_[l] + 1;
        }
        return f;
    }

    // inverse of flat_index; fills idx innermost-first
    void unflatten(std::int64_t f, std::vector<int>& idx_inner_first) const {
        idx_inner_first.resize(bounds_.size());
        for (std::size_t l = 0; l < bounds_.size(); ++l) {
            const int w = bounds_[l] + 1;
            idx_inner_first[l] = static_cast<int>(f % w);
            f /= w;
        }
    }

    const Rational& cbar_at(const std::vector<int>& idx_inner_first) const {
        return values_[static_cast<std::size_t>(flat_index(idx_inner_first))];
    }
    const Rational& cbar_flat(std::int64_t f) const { return values_[static_cast<std::size_t>(f)]; }

    // exponent of (T-t) in C, doubled to stay integral: C ~ (T-t)^{dt_pow2()/2}
    int dt_pow2() const { return multiplicity() + 2 * weights_.total_scale_degree(); }

    // dimensional coefficient C as a double
    double scaled(const std::vector<int>& idx_inner_first, double dt) const {
        return scaled_flat(flat_index(idx_inner_first), idx_inner_first, dt);
    }

    double scaled_flat(std::int64_t f, const std::vector<int>& idx_inner_first, double dt) const {
        double prod = 1.0;
        for (int j : idx_inner_first) prod *= 2.0 * j + 1.0;
        const double base = to_double(values_[static_cast<std::size_t>(f)]);
        return base * std::sqrt(prod) * std::pow(dt, 0.5 * dt_pow2()) /
               static_cast<double>(1 << multiplicity());
    }

    // exact C^2 at T-t = 1: prod(2 j_l + 1) * cbar^2 / 4^k
    Rational c_squared_unit(const std::vector<int>& idx_inner_first) const {
        Rational v = cbar_at(idx_inner_first);
        Rational w = 1;
        for (int j : idx_inner_first) w *= 2 * j + 1;
        return w * v * v / Rational(std::int64_t(1) << (2 * multiplicity()));
    }

    // exact sum of C^2 at T-t = 1 over the whole box
    Rational c_squared_sum_unit() const {
        Rational s = 0;
        std::vector<int> idx;
        for (std::int64_t f = 0; f < size(); ++f) {
            unflatten(f, idx);
            if (values_[static_cast<std::size_t>(f)] == 0) continue;
            Rational w = 1;
            for (int j : idx) w *= 2 * j + 1;
            s += w * values_[static_cast<std::size_t>(f)] * values_[static_cast<std::size_t>(f)];
        }
        return s / Rational(std::int64_t(1) << (2 * multiplicity()));
    }

  private:
    // Level-by-level sweep sharing every inner partial integral: level l holds
    // one antiderivative polynomial per index prefix (j_1 .. j_l).
    void compute() {
        const int k = multiplicity();
        std::vector<RationalPoly> cur = {RationalPoly({Rational(1)})};
        std::int64_t count = 1;
        for (int l = 0; l + 1 < k; ++l) {
            const int width = bounds_[l] + 1;
            std::vector<RationalPoly> next(static_cast<std::size_t>(count * width));
            for (int j = 0; j < width; ++j) {
                RationalPoly wp = poly_mul(weights_.levels[l].ref, legendre_poly(j));
                for (std::int64_t a = 0; a < count; ++a)
                    next[static_cast<std::size_t>(j * count + a)] =
                        integral_from_minus_one(poly_mul(wp, cur[static_cast<std::size_t>(a)]));
            }
            cur = std::move(next);
            count *= width;
        }
        const int width = bounds_[k - 1] + 1;
        values_.resize(static_cast<std::size_t>(count * width));
        for (int j = 0; j < width; ++j) {
            RationalPoly wp = poly_mul(weights_.levels[k - 1].ref, legendre_poly(j));
            for (std::int64_t a = 0; a < count; ++a)
                values_[static_cast<std::size_t>(j * count + a)] =
                    integral_11(poly_mul(wp, cur[static_cast<std::size_t>(a)]));
        }
    }

    WeightSpec weights_;
    std::vector<int> bounds_;
    std::vector<Rational> values_;
};

inline CoefficientGrid coefficient_grid(const WeightSpec& weights, int p) {
    return CoefficientGrid(weights, std::vector<int>(static_cast<std::size_t>(weights.multiplicity()), p));
}

// One-off dimensional coefficient without building a grid.
inline double c_scaled(const std::vector<int>& indices_inner_first, const WeightSpec& weights, double dt) {
    const int k = weights.multiplicity();
    double prod = 1.0;
    for (int j : indices_inner_first) prod *= 2.0 * j + 1.0;
    const int pow2 = k + 2 * weights.total_scale_degree();
    return to_double(cbar(indices_inner_first, weights)) * std::sqrt(prod) * std::pow(dt, 0.5 * pow2) /
           static_cast<double>(1 << k);
}

// Squared L2 norm of the ordered-simplex kernel prod psi_l, as an exact
// coefficient of (T-t)^dt_power. For unit weights this is (T-t)^k / k!.
struct KernelNorm {
    int multiplicity;
    Rational coeff;
    int dt_power;

    double value(double dt) const { return to_double(coeff) * std::pow(dt, dt_power); }
};

inline KernelNorm kernel_norm(const WeightSpec& weights) {
    const int k = weights.multiplicity();
    detail::check_multiplicity(k);
    RationalPoly running = RationalPoly({Rational(1)});
    Rational v = 0;
    for (int l = 0; l < k; ++l) {
        RationalPoly f =
            poly_mul(poly_mul(weights.levels[l].ref, weights.levels[l].ref), running);
        if (l + 1 < k)
            running = integral_from_minus_one(f);
        else
            v = integral_11(f);
    }
    v /= Rational(std::int64_t(1) << k);
    return {k, v, k + 2 * weights.total_scale_degree()};
}

}  // namespace itofl
