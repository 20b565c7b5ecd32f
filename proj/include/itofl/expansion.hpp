#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "itofl/coefficients.hpp"
#include "itofl/noise.hpp"
#include "itofl/partitions.hpp"

namespace itofl {

// Component indices i_1..i_k of the nested integral, innermost first.
// 0 marks a deterministic time level, 1..m pick a Wiener component.
using MultiIndex = std::vector<int>;

struct TruncationSpec {
    std::vector<int> orders;  // per-level basis bound, innermost first

    static TruncationSpec uniform(int k, int q) {
        if (k < 1 || q < 0) throw std::invalid_argument("TruncationSpec: need k >= 1, q >= 0");
        return {std::vector<int>(static_cast<std::size_t>(k), q)};
    }
};

struct ApproxOptions {
    bool compensated_sum = false;
};

// A time level contributes no Gaussian factor; it is absorbed into the weight
// polynomial of the adjacent stochastic level. Only boundary runs of time
// levels have an adjacent stochastic level to absorb them, so interior time
// levels are rejected. Every mixed integral used by the composite assemblies
// has this boundary shape.
struct FoldedIntegrand {
    MultiIndex idx;             // stochastic components only, all >= 1
    WeightSpec weights;         // same arity as idx
    std::vector<int> kept_levels;  // positions of the surviving levels in the original integrand
    bool deterministic = false;    // true when every level was a time level
    Rational deterministic_coeff;  // with dt_power below, the exact constant value
    int deterministic_dt_power = 0;
};

inline FoldedIntegrand fold_zero_levels(const MultiIndex& idx, const WeightSpec& weights) {
    const int k = weights.multiplicity();
    detail::check_multiplicity(k);
    if (static_cast<int>(idx.size()) != k)
        throw std::invalid_argument("fold_zero_levels: index count must equal multiplicity");

    std::vector<Weight> w = weights.levels;
    std::vector<int> comps = idx;
    std::vector<int> kept(static_cast<std::size_t>(k));
    for (int l = 0; l < k; ++l) kept[static_cast<std::size_t>(l)] = l;

    // pure time integral: nested antidifferentiation, exact
    bool all_zero = true;
    for (int c : comps) all_zero = all_zero && c == 0;
    if (all_zero) {
        RationalPoly running({Rational(1)});
        Rational v = 0;
        for (std::size_t l = 0; l < w.size(); ++l) {
            RationalPoly f = poly_mul(w[l].ref, running);
            if (l + 1 < w.size())
                running = integral_from_minus_one(f);
            else
                v = integral_11(f);
        }
        FoldedIntegrand out;
        out.deterministic = true;
        out.deterministic_coeff = v / Rational(std::int64_t(1) << k);
        int m = 0;
        for (const auto& wl : w) m += wl.scale_degree;
        out.deterministic_dt_power = k + m;
        return out;
    }

    // innermost run: integral over x_1 < x of the level's weight becomes a
    // polynomial factor on the next level, including the 1/2 Jacobian
    while (comps.front() == 0) {
        RationalPoly b = integral_from_minus_one(w.front().ref);
        w[1].ref = poly_mul(w[1].ref, poly_scale(b, Rational(1, 2)));
        w[1].scale_degree += w.front().scale_degree + 1;
        w.erase(w.begin());
        comps.erase(comps.begin());
        kept.erase(kept.begin());
    }
    // outermost run: the remaining integral over x < x_k uses the tail of the
    // antiderivative, B(1) - B(x)
    while (comps.back() == 0) {
        RationalPoly b = integral_from_minus_one(w.back().ref);
        RationalPoly tail = poly_sub(RationalPoly({b.eval(1)}), b);
        std::size_t target = w.size() - 2;
        w[target].ref = poly_mul(w[target].ref, poly_scale(tail, Rational(1, 2)));
        w[target].scale_degree += w.back().scale_degree + 1;
        w.pop_back();
        comps.pop_back();
        kept.pop_back();
    }
    for (int c : comps)
        if (c == 0)
            throw std::invalid_argument(
                "fold_zero_levels: interior time level; only boundary runs of time levels are supported");

    FoldedIntegrand out;
    out.idx = std::move(comps);
    out.weights = WeightSpec(std::move(w));
    out.kept_levels = std::move(kept);
    return out;
}

// Truncated expansion evaluator, prepared once and reusable across many draw
// matrices. Terms are accumulated largest coefficient first so the floating
// sum order is pinned by construction, not by enumeration layout.
class IteratedApproximator {
  public:
    IteratedApproximator(const MultiIndex& idx, const WeightSpec& weights, const TruncationSpec& trunc,
                         double dt)
        : dt_(dt) {
        if (dt <= 0) throw std::invalid_argument("IteratedApproximator: interval length must be positive");
        if (trunc.orders.size() != idx.size())
            throw std::invalid_argument("IteratedApproximator: truncation arity mismatch");
        folded_ = fold_zero_levels(idx, weights);
        if (folded_.deterministic) return;

        const int kk = folded_.weights.multiplicity();
        for (int c : folded_.idx)
            if (c < 1) throw std::invalid_argument("IteratedApproximator: component indices must be >= 1");
        std::vector<int> bounds;
        bounds.reserve(static_cast<std::size_t>(kk));
        for (int pos : folded_.kept_levels) bounds.push_back(trunc.orders[static_cast<std::size_t>(pos)]);

        CoefficientGrid grid(folded_.weights, bounds);
        partitions_ = pair_partitions_all(kk);

        std::vector<int> jt;
        terms_.reserve(static_cast<std::size_t>(grid.size()));
        for (std::int64_t f = 0; f < grid.size(); ++f) {
            grid.unflatten(f, jt);
            const double c = grid.scaled_flat(f, jt, dt);
            if (c == 0.0) continue;
            terms_.push_back({c, jt});
        }
        std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) {
            const double ma = std::abs(a.coeff), mb = std::abs(b.coeff);
            if (ma != mb) return ma > mb;
            return a.indices < b.indices;
        });
        max_basis_index_ = 0;
        for (int b : bounds) max_basis_index_ = std::max(max_basis_index_, b);
    }

    bool deterministic() const { return folded_.deterministic; }
    int required_components() const {
        int m = 0;
        for (int c : folded_.idx) m = std::max(m, c);
        return m;
    }
    int required_basis_index() const { return max_basis_index_; }
    std::int64_t term_count() const { return static_cast<std::int64_t>(terms_.size()); }

    double value(const NoiseMatrix& noise, const ApproxOptions& opt = {}) const {
        if (folded_.deterministic)
            return to_double(folded_.deterministic_coeff) * std::pow(dt_, folded_.deterministic_dt_power);
        return evaluate(folded_.idx, noise, opt);
    }

    // Evaluates the prepared term table with the stored component labels
    // replaced for this call: one entry per surviving stochastic level, each
    // >= 1. Lets a single construction serve every mode tuple of a spectral
    // sum, since the terms themselves do not depend on the labels.
    double value_for(const std::vector<int>& comps, const NoiseMatrix& noise,
                     const ApproxOptions& opt = {}) const {
        if (folded_.deterministic) {
            if (!comps.empty())
                throw std::invalid_argument("IteratedApproximator: no stochastic levels to relabel");
            return to_double(folded_.deterministic_coeff) * std::pow(dt_, folded_.deterministic_dt_power);
        }
        if (comps.size() != folded_.idx.size())
            throw std::invalid_argument("IteratedApproximator: component relabeling arity mismatch");
        for (int c : comps)
            if (c < 1) throw std::invalid_argument("IteratedApproximator: component indices must be >= 1");
        return evaluate(comps, noise, opt);
    }

  private:
    double evaluate(const std::vector<int>& comps, const NoiseMatrix& noise,
                    const ApproxOptions& opt) const {
        int needed = 0;
        for (int c : comps) needed = std::max(needed, c);
        if (noise.components() < needed || noise.max_index() < max_basis_index_)
            throw std::out_of_range("IteratedApproximator: noise matrix too small for this truncation");

        const std::size_t kk = comps.size();
        double sum = 0.0, comp = 0.0;
        for (const Term& t : terms_) {
            double bracket = 1.0;
            for (std::size_t l = 0; l < kk; ++l)
                bracket *= noise.zeta(comps[l], t.indices[l]);
            double sign = -1.0;
            for (std::size_t r = 1; r < partitions_.size(); ++r) {
                for (const PairPartition& pp : partitions_[r]) {
                    bool alive = true;
                    for (auto [a, b] : pp.pairs) {
                        if (comps[static_cast<std::size_t>(a)] != comps[static_cast<std::size_t>(b)] ||
                            t.indices[static_cast<std::size_t>(a)] != t.indices[static_cast<std::size_t>(b)]) {
                            alive = false;
                            break;
                        }
                    }
                    if (!alive) continue;
                    double prod = 1.0;
                    for (int s : pp.singles)
                        prod *= noise.zeta(comps[static_cast<std::size_t>(s)],
                                           t.indices[static_cast<std::size_t>(s)]);
                    bracket += sign * prod;
                }
                sign = -sign;
            }
            const double term = t.coeff * bracket;
            if (opt.compensated_sum) {
                const double y = term - comp;
                const double s = sum + y;
                comp = (s - sum) - y;
                sum = s;
            } else {
                sum += term;
            }
        }
        return sum;
    }

    struct Term {
        double coeff;
        std::vector<int> indices;
    };

    double dt_;
    FoldedIntegrand folded_;
    std::vector<std::vector<PairPartition>> partitions_;
    std::vector<Term> terms_;
    int max_basis_index_ = 0;
};

inline double approx_iterated(const MultiIndex& idx, const WeightSpec& weights, const TruncationSpec& trunc,
                              const NoiseMatrix& noise, double dt, const ApproxOptions& opt = {}) {
    return IteratedApproximator(idx, weights, trunc, dt).value(noise, opt);
}

// Equal-component closed forms in delta = int psi dw and Delta = int psi^2 ds,
// one Hermite polynomial per multiplicity, divided by k!.
inline double hermite_exact(int k, double delta, double Delta) {
    const double d = delta, D = Delta;
    switch (k) {
        case 1: return d;
        case 2: return (d * d - D) / 2;
        case 3: return (d * d * d - 3 * d * D) / 6;
        case 4: return (d * d * d * d - 6 * d * d * D + 3 * D * D) / 24;
        case 5: return (d * d * d * d * d - 10 * d * d * d * D + 15 * d * D * D) / 120;
        case 6: {
            const double d2 = d * d, D2 = D * D;
            return (d2 * d2 * d2 - 15 * d2 * d2 * D + 45 * d2 * D2 - 15 * D2 * D) / 720;
        }
        default: throw std::invalid_argument("hermite_exact: multiplicity must be in [1, 6]");
    }
}

// Banded closed forms for the plain pair integral and the two time-weighted
// pair integrals. One term per basis position (j1, j2), where j1 multiplies
// the first component's draw; the exact value is rat / sqrt(root), and root
// always divides (2 j1 + 1)(2 j2 + 1) with a perfect-square quotient, so
// squared masses and cross products against the coefficient grid stay
// rational. Values are per (T-t)^2 for the weighted pairs, per (T-t) plain.
struct ExactBandTerm {
    int j1 = 0;
    int j2 = 0;
    Rational rat;
    std::int64_t root = 1;

    double value() const { return to_double(rat) / std::sqrt(static_cast<double>(root)); }
};

namespace detail {

// accumulate a term; repeated positions must share the same radical
inline void band_add(std::vector<ExactBandTerm>& band, int j1, int j2, Rational rat,
                     std::int64_t root = 1) {
    for (ExactBandTerm& t : band) {
        if (t.j1 == j1 && t.j2 == j2) {
            if (t.root != root) throw std::logic_error("band_add: radical mismatch at a shared position");
            t.rat += rat;
            return;
        }
    }
    band.push_back({j1, j2, std::move(rat), root});
}

}  // namespace detail

// dw dw: diagonal start plus one antisymmetric stripe per retained order.
// The constant -1/2 applies when the two components coincide.
inline std::vector<ExactBandTerm> i11_band(int q) {
    if (q < 0) throw std::invalid_argument("i11_band: q must be >= 0");
    std::vector<ExactBandTerm> out;
    detail::band_add(out, 0, 0, Rational(1, 2));
    for (int i = 1; i <= q; ++i) {
        detail::band_add(out, i - 1, i, Rational(1, 2), 4 * std::int64_t(i) * i - 1);
        detail::band_add(out, i, i - 1, Rational(-1, 2), 4 * std::int64_t(i) * i - 1);
    }
    return out;
}

// (t - s) weight on the outer level. The constant +1/4 applies when the
// components coincide.
inline std::vector<ExactBandTerm> j01_band(int q) {
    if (q < 0) throw std::invalid_argument("j01_band: q must be >= 0");
    std::vector<ExactBandTerm> out;
    detail::band_add(out, 0, 0, Rational(-1, 4));
    for (int i = 1; i <= q; ++i) {
        detail::band_add(out, i - 1, i, Rational(-1, 4), 4 * std::int64_t(i) * i - 1);
        detail::band_add(out, i, i - 1, Rational(1, 4), 4 * std::int64_t(i) * i - 1);
    }
    detail::band_add(out, 0, 1, Rational(-1, 4), 3);
    for (int i = 0; i <= q; ++i) {
        const std::int64_t d = (2 * std::int64_t(i) + 1) * (2 * i + 5);
        detail::band_add(out, i, i + 2, Rational(-(i + 2), 4 * (2 * i + 3)), d);
        detail::band_add(out, i + 2, i, Rational(i + 1, 4 * (2 * i + 3)), d);
        detail::band_add(out, i, i, Rational(1) / (4 * (2 * i - 1) * (2 * i + 3)));
    }
    return out;
}

// (t - s) weight on the inner level; mirror structure of j01_band.
inline std::vector<ExactBandTerm> j10_band(int q) {
    if (q < 0) throw std::invalid_argument("j10_band: q must be >= 0");
    std::vector<ExactBandTerm> out;
    detail::band_add(out, 0, 0, Rational(-1, 4));
    for (int i = 1; i <= q; ++i) {
        detail::band_add(out, i - 1, i, Rational(-1, 4), 4 * std::int64_t(i) * i - 1);
        detail::band_add(out, i, i - 1, Rational(1, 4), 4 * std::int64_t(i) * i - 1);
    }
    detail::band_add(out, 1, 0, Rational(-1, 4), 3);
    for (int i = 0; i <= q; ++i) {
        const std::int64_t d = (2 * std::int64_t(i) + 1) * (2 * i + 5);
        detail::band_add(out, i, i + 2, Rational(-(i + 1), 4 * (2 * i + 3)), d);
        detail::band_add(out, i + 2, i, Rational(i + 2, 4 * (2 * i + 3)), d);
        detail::band_add(out, i, i, Rational(-1) / (4 * (2 * i - 1) * (2 * i + 3)));
    }
    return out;
}

namespace detail {

inline double band_value(const std::vector<ExactBandTerm>& band, int r1, int r2,
                         const NoiseMatrix& noise, double scale, double indicator_term) {
    double s = 0.0;
    for (const ExactBandTerm& t : band) s += t.value() * noise.zeta(r1, t.j1) * noise.zeta(r2, t.j2);
    if (r1 == r2) s += indicator_term;
    return s * scale;
}

}  // namespace detail

inline double i11_approx(int r1, int r2, int q, const NoiseMatrix& noise, double dt) {
    return detail::band_value(i11_band(q), r1, r2, noise, dt, -0.5);
}

inline double j01_approx(int r1, int r2, int q, const NoiseMatrix& noise, double dt) {
    return detail::band_value(j01_band(q), r1, r2, noise, dt * dt, 0.25);
}

inline double j10_approx(int r1, int r2, int q, const NoiseMatrix& noise, double dt) {
    return detail::band_value(j10_band(q), r1, r2, noise, dt * dt, 0.25);
}

// single Wiener integral with weight (s - t): exactly two basis terms
inline double i01_approx(int r, int q, const NoiseMatrix& noise, double dt) {
    if (q < 0) throw std::invalid_argument("i01_approx: q must be >= 0");
    double v = 0.5 * noise.zeta(r, 0);
    if (q >= 1) v += 0.5 / std::sqrt(3.0) * noise.zeta(r, 1);
    return v * std::pow(dt, 1.5);
}

// single Wiener integral with weight (T - s): sign-flipped second term
inline double i10_approx(int r, int q, const NoiseMatrix& noise, double dt) {
    if (q < 0) throw std::invalid_argument("i10_approx: q must be >= 0");
    double v = 0.5 * noise.zeta(r, 0);
    if (q >= 1) v -= 0.5 / std::sqrt(3.0) * noise.zeta(r, 1);
    return v * std::pow(dt, 1.5);
}

// plain single Wiener integral
inline double i1_approx(int r, const NoiseMatrix& noise, double dt) {
    return std::sqrt(dt) * noise.zeta(r, 0);
}

}  // namespace itofl
