#pragma once

// Finite-mode approximation of iterated stochastic integrals driven by a
// trace class covariance operator: the generic multiplicity-k spectral
// assembly, its mean-square error bound, and the nine composite integral
// shapes that appear in second-order expansions of semilinear evolution
// equations, each reduced to scalar building blocks sharing one draw matrix.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "itofl/error.hpp"
#include "itofl/expansion.hpp"
#include "itofl/noise.hpp"
#include "itofl/weights.hpp"

namespace itofl {

// Retained eigenvalues of the covariance operator together with the full
// spectrum trace. The trace is carried separately from the retained modes so
// error bounds charge the whole operator even when only M modes are kept;
// dropping a mode changes an assembled value by exactly the omitted terms but
// never changes a bound.
struct QWienerSpec {
    std::vector<double> eigenvalues;  // mode r = 1..M at [r-1], each > 0
    double trace = 0.0;               // full-spectrum sum, >= retained sum

    int modes() const { return static_cast<int>(eigenvalues.size()); }

    double eigenvalue(int r) const {
        if (r < 1 || r > modes()) throw std::out_of_range("QWienerSpec: mode index out of range");
        return eigenvalues[static_cast<std::size_t>(r - 1)];
    }

    double retained_sum() const {
        double s = 0.0;
        for (double v : eigenvalues) s += v;
        return s;
    }

    // trace_hint < 0 means "retained modes are the whole spectrum".
    static QWienerSpec from_eigenvalues(std::vector<double> lam, double trace_hint = -1.0) {
        if (lam.empty()) throw std::invalid_argument("QWienerSpec: need at least one mode");
        double partial = 0.0;
        for (double v : lam) {
            if (!(v > 0.0)) throw std::invalid_argument("QWienerSpec: eigenvalues must be positive");
            partial += v;
        }
        QWienerSpec spec;
        spec.eigenvalues = std::move(lam);
        if (trace_hint < 0.0) {
            spec.trace = partial;
        } else {
            if (trace_hint < partial * (1.0 - 1e-12))
                throw std::invalid_argument("QWienerSpec: trace below the retained sum");
            spec.trace = trace_hint;
        }
        return spec;
    }

    // lambda_r = scale * r^-decay with the infinite tail summed in closed
    // form, so the trace is the honest full-spectrum value.
    static QWienerSpec power_spectrum(int retained, double scale, double decay) {
        if (retained < 1) throw std::invalid_argument("QWienerSpec: need at least one mode");
        if (!(scale > 0.0)) throw std::invalid_argument("QWienerSpec: scale must be positive");
        if (!(decay > 1.0)) throw std::invalid_argument("QWienerSpec: decay must exceed 1 for a finite trace");
        QWienerSpec spec;
        spec.eigenvalues.resize(static_cast<std::size_t>(retained));
        for (int r = 1; r <= retained; ++r)
            spec.eigenvalues[static_cast<std::size_t>(r - 1)] = scale * std::pow(static_cast<double>(r), -decay);
        spec.trace = scale * std::riemann_zeta(decay);
        return spec;
    }
};

// Dense real tensor holding one target-space vector per ordered mode tuple:
// the composition of the problem's operators evaluated on basis modes, which
// is all the assembly formulas ever consume. Layout is row-major over the
// mode indices with the target coordinate fastest.
struct MultilinearOperator {
    int arity = 0;
    int modes = 0;  // tensor covers mode indices 1..modes per slot
    int dim = 0;    // dimension of the target space
    std::vector<double> data;

    std::size_t expected_size() const {
        std::size_t n = static_cast<std::size_t>(dim);
        for (int l = 0; l < arity; ++l) n *= static_cast<std::size_t>(modes);
        return n;
    }

    std::size_t tuple_offset(const std::vector<int>& rs) const {
        if (static_cast<int>(rs.size()) != arity)
            throw std::invalid_argument("MultilinearOperator: tuple arity mismatch");
        std::size_t f = 0;
        for (int r : rs) {
            if (r < 1 || r > modes) throw std::out_of_range("MultilinearOperator: mode index out of range");
            f = f * static_cast<std::size_t>(modes) + static_cast<std::size_t>(r - 1);
        }
        return f * static_cast<std::size_t>(dim);
    }

    const double* column(const std::vector<int>& rs) const { return data.data() + tuple_offset(rs); }

    // Largest squared target-space norm over all mode tuples: the operator
    // constant the error bounds call for.
    double max_column_norm2() const {
        const std::size_t n = static_cast<std::size_t>(dim);
        double best = 0.0;
        for (std::size_t off = 0; off < data.size(); off += n) {
            double s = 0.0;
            for (std::size_t h = 0; h < n; ++h) s += data[off + h] * data[off + h];
            best = std::max(best, s);
        }
        return best;
    }

    // Seeded Gaussian entries scaled by 1/sqrt(dim) so per-tuple squared
    // norms are O(1). Pure function of (seed, shape); tag bytes differ from
    // the draw-matrix stream so tensors never alias noise at a shared seed.
    static MultilinearOperator synthetic(int arity, int modes, int dim, std::uint64_t seed) {
        if (arity < 1 || modes < 1 || dim < 1)
            throw std::invalid_argument("MultilinearOperator: shape values must be positive");
        MultilinearOperator op;
        op.arity = arity;
        op.modes = modes;
        op.dim = dim;
        op.data.resize(op.expected_size());
        const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
        for (std::size_t f = 0; f < op.data.size(); ++f) {
            const std::uint64_t uf = static_cast<std::uint64_t>(f);
            op.data[f] = scale * rng::gaussian(rng::hash4(seed, 0x3c, uf, 0x1ull),
                                               rng::hash4(seed, 0xc3, uf, 0x2ull));
        }
        return op;
    }
};

namespace detail {

// Lexicographic odometer over mode tuples (1..modes)^arity; returns false
// once the sequence wraps. Iteration order is pinned so accumulation is
// reproducible bit for bit.
inline bool next_tuple(std::vector<int>& rs, int modes) {
    for (std::size_t l = rs.size(); l-- > 0;) {
        if (rs[l] < modes) {
            ++rs[l];
            for (std::size_t j = l + 1; j < rs.size(); ++j) rs[j] = 1;
            return true;
        }
    }
    return false;
}

inline void check_spectrum_fits(const MultilinearOperator& op, const QWienerSpec& spec,
                                const NoiseMatrix& noise) {
    if (spec.modes() > op.modes)
        throw std::invalid_argument("qwiener: operator tensor covers fewer modes than the spectrum retains");
    if (noise.components() < spec.modes())
        throw std::invalid_argument("qwiener: draw matrix has fewer components than retained modes");
}

}  // namespace detail

// Spectral assembly over all ordered mode tuples: tensor column times the
// square root of the eigenvalue product times the scalar truncated expansion
// on the shared draws. One prepared term table serves every tuple.
inline std::vector<double> approx_generic(const MultilinearOperator& op, const QWienerSpec& spec,
                                          const WeightSpec& weights, const TruncationSpec& trunc,
                                          const NoiseMatrix& noise, double dt,
                                          const ApproxOptions& opt = {}) {
    if (weights.multiplicity() != op.arity)
        throw std::invalid_argument("approx_generic: weight arity does not match the operator");
    detail::check_spectrum_fits(op, spec, noise);

    const MultiIndex rep(static_cast<std::size_t>(op.arity), 1);
    const IteratedApproximator scalar(rep, weights, trunc, dt);

    const int M = spec.modes();
    std::vector<double> acc(static_cast<std::size_t>(op.dim), 0.0);
    std::vector<int> rs(static_cast<std::size_t>(op.arity), 1);
    do {
        double lam = 1.0;
        for (int r : rs) lam *= spec.eigenvalue(r);
        const double w = std::sqrt(lam) * scalar.value_for(rs, noise, opt);
        const double* col = op.column(rs);
        for (int h = 0; h < op.dim; ++h) acc[static_cast<std::size_t>(h)] += w * col[h];
    } while (detail::next_tuple(rs, M));
    return acc;
}

// Mean-square error bound for the generic assembly: operator constant times
// (k!)^2 times trace^k times the coefficient-tail defect. Depends on the
// spectrum only through its trace, never on how many modes are retained.
inline double qwiener_mse_bound(const WeightSpec& weights, const TruncationSpec& trunc,
                                double operator_bound, const QWienerSpec& spec, double dt) {
    if (!(operator_bound >= 0.0))
        throw std::invalid_argument("qwiener_mse_bound: operator bound must be nonnegative");
    const int k = weights.multiplicity();
    if (static_cast<std::size_t>(k) != trunc.orders.size())
        throw std::invalid_argument("qwiener_mse_bound: truncation arity mismatch");
    const Rational defect = parseval_defect_coeff(weights, trunc.orders);
    double fact2 = 1.0;
    for (int i = 2; i <= k; ++i) fact2 *= static_cast<double>(i);
    fact2 *= fact2;
    const int dt_power = k + 2 * weights.total_scale_degree();
    return operator_bound * fact2 * std::pow(spec.trace, k) * to_double(defect) * std::pow(dt, dt_power);
}

// The nine composite integral shapes. Arity of the operator tensor each kind
// consumes: I0, I1 take 1 mode slot; I2 takes 3; I3..I5 take 4; I6..I8 take 2.
enum class CompositeKind { I0, I1, I2, I3, I4, I5, I6, I7, I8 };

inline int composite_arity(CompositeKind kind) {
    switch (kind) {
        case CompositeKind::I0:
        case CompositeKind::I1: return 1;
        case CompositeKind::I2: return 3;
        case CompositeKind::I3:
        case CompositeKind::I4:
        case CompositeKind::I5: return 4;
        case CompositeKind::I6:
        case CompositeKind::I7:
        case CompositeKind::I8: return 2;
    }
    throw std::invalid_argument("composite_arity: unknown kind");
}

inline const char* composite_name(CompositeKind kind) {
    switch (kind) {
        case CompositeKind::I0: return "I0";
        case CompositeKind::I1: return "I1";
        case CompositeKind::I2: return "I2";
        case CompositeKind::I3: return "I3";
        case CompositeKind::I4: return "I4";
        case CompositeKind::I5: return "I5";
        case CompositeKind::I6: return "I6";
        case CompositeKind::I7: return "I7";
        case CompositeKind::I8: return "I8";
    }
    throw std::invalid_argument("composite_name: unknown kind");
}

inline CompositeKind composite_from_name(const std::string& name) {
    for (int i = 0; i <= 8; ++i) {
        const CompositeKind kind = static_cast<CompositeKind>(i);
        if (name == composite_name(kind)) return kind;
    }
    throw std::invalid_argument("composite_from_name: expected one of I0..I8, got '" + name + "'");
}

// Highest basis index a kind's scalar building blocks read at level q: the
// time-weighted pair blocks reach two places past q, the order-(0,1) blocks
// stop at index one.
inline int composite_required_basis_index(CompositeKind kind, int q) {
    switch (kind) {
        case CompositeKind::I0:
        case CompositeKind::I1: return q >= 1 ? 1 : 0;
        case CompositeKind::I2: return q;
        case CompositeKind::I3:
        case CompositeKind::I4:
        case CompositeKind::I5:
        case CompositeKind::I6:
        case CompositeKind::I7:
        case CompositeKind::I8: return q + 2;
    }
    throw std::invalid_argument("composite_required_basis_index: unknown kind");
}

namespace detail {

// Table of scalar values for every ordered mode tuple of the given arity,
// filled in one lexicographic pass so each tuple is evaluated exactly once.
template <typename F>
std::vector<double> tuple_table(int arity, int modes, F&& eval) {
    std::size_t n = 1;
    for (int l = 0; l < arity; ++l) n *= static_cast<std::size_t>(modes);
    std::vector<double> table(n);
    std::vector<int> rs(static_cast<std::size_t>(arity), 1);
    std::size_t f = 0;
    do {
        table[f++] = eval(rs);
    } while (next_tuple(rs, modes));
    return table;
}

inline std::size_t tuple_flat(const std::vector<int>& rs, int modes) {
    std::size_t f = 0;
    for (int r : rs) f = f * static_cast<std::size_t>(modes) + static_cast<std::size_t>(r - 1);
    return f;
}

}  // namespace detail

// Assembles one composite shape from scalar truncated expansions on shared
// draws. The per-tuple scalar combinations transcribe the algebraic
// reductions of the nested integrals term for term, including the indicator
// corrections that appear when mode indices coincide.
inline std::vector<double> approx_composite(CompositeKind kind, const MultilinearOperator& op,
                                            const QWienerSpec& spec, int q, const NoiseMatrix& noise,
                                            double dt, const ApproxOptions& opt = {}) {
    if (q < 0) throw std::invalid_argument("approx_composite: truncation level must be >= 0");
    const int arity = composite_arity(kind);
    if (op.arity != arity)
        throw std::invalid_argument(std::string("approx_composite: kind ") + composite_name(kind) +
                                    " needs an operator of arity " + std::to_string(arity));
    detail::check_spectrum_fits(op, spec, noise);
    if (noise.max_index() < composite_required_basis_index(kind, q))
        throw std::invalid_argument("approx_composite: draw matrix does not reach the needed basis index");

    const int M = spec.modes();
    const double dt2 = dt * dt;

    // Per-tuple scalar tables for the building blocks the kind consumes.
    std::vector<double> table1, table2a, table2b, table3, table4;
    switch (kind) {
        case CompositeKind::I0:
            table1 = detail::tuple_table(1, M, [&](const std::vector<int>& rs) {
                return i01_approx(rs[0], q, noise, dt);
            });
            break;
        case CompositeKind::I1:
            table1 = detail::tuple_table(1, M, [&](const std::vector<int>& rs) {
                return i10_approx(rs[0], q, noise, dt);
            });
            break;
        case CompositeKind::I2: {
            const IteratedApproximator triple(MultiIndex(3, 1), WeightSpec::unit(3),
                                              TruncationSpec::uniform(3, q), dt);
            table3 = detail::tuple_table(3, M, [&](const std::vector<int>& rs) {
                return triple.value_for(rs, noise, opt);
            });
            table1 = detail::tuple_table(1, M, [&](const std::vector<int>& rs) {
                return i01_approx(rs[0], q, noise, dt);
            });
            break;
        }
        case CompositeKind::I3:
        case CompositeKind::I4:
        case CompositeKind::I5: {
            const IteratedApproximator quad(MultiIndex(4, 1), WeightSpec::unit(4),
                                            TruncationSpec::uniform(4, q), dt);
            table4 = detail::tuple_table(4, M, [&](const std::vector<int>& rs) {
                return quad.value_for(rs, noise, opt);
            });
            if (kind != CompositeKind::I4)
                table2a = detail::tuple_table(2, M, [&](const std::vector<int>& rs) {
                    return j01_approx(rs[0], rs[1], q, noise, dt);
                });
            if (kind != CompositeKind::I3)
                table2b = detail::tuple_table(2, M, [&](const std::vector<int>& rs) {
                    return j10_approx(rs[0], rs[1], q, noise, dt);
                });
            break;
        }
        case CompositeKind::I6:
            table2a = detail::tuple_table(2, M, [&](const std::vector<int>& rs) {
                return j01_approx(rs[0], rs[1], q, noise, dt);
            });
            table2b = detail::tuple_table(2, M, [&](const std::vector<int>& rs) {
                return i11_approx(rs[0], rs[1], q, noise, dt);
            });
            break;
        case CompositeKind::I7:
            table2a = detail::tuple_table(2, M, [&](const std::vector<int>& rs) {
                return j01_approx(rs[0], rs[1], q, noise, dt);
            });
            table1 = detail::tuple_table(1, M, [&](const std::vector<int>& rs) {
                return i1_approx(rs[0], noise, dt);
            });
            break;
        case CompositeKind::I8:
            table2a = detail::tuple_table(2, M, [&](const std::vector<int>& rs) {
                return j01_approx(rs[0], rs[1], q, noise, dt);
            });
            break;
    }

    const auto at1 = [&](int a) { return table1[static_cast<std::size_t>(a - 1)]; };
    const auto at2a = [&](int a, int b) { return table2a[detail::tuple_flat({a, b}, M)]; };
    const auto at2b = [&](int a, int b) { return table2b[detail::tuple_flat({a, b}, M)]; };
    const auto at3 = [&](int a, int b, int c) { return table3[detail::tuple_flat({a, b, c}, M)]; };
    const auto at4 = [&](int a, int b, int c, int d) { return table4[detail::tuple_flat({a, b, c, d}, M)]; };

    std::vector<double> acc(static_cast<std::size_t>(op.dim), 0.0);
    std::vector<int> rs(static_cast<std::size_t>(arity), 1);
    do {
        double s = 0.0;
        switch (kind) {
            case CompositeKind::I0:
            case CompositeKind::I1:
                s = at1(rs[0]);
                break;
            case CompositeKind::I2: {
                const int r1 = rs[0], r2 = rs[1], r3 = rs[2];
                s = at3(r1, r2, r3) + at3(r2, r1, r3);
                if (r1 == r2) s += at1(r3);
                break;
            }
            case CompositeKind::I3: {
                const int r1 = rs[0], r2 = rs[1], r3 = rs[2], r4 = rs[3];
                s = at4(r1, r2, r3, r4) + at4(r1, r3, r2, r4) + at4(r2, r1, r3, r4) +
                    at4(r2, r3, r1, r4) + at4(r3, r1, r2, r4) + at4(r3, r2, r1, r4);
                if (r1 == r2) s -= at2a(r3, r4);
                if (r1 == r3) s -= at2a(r2, r4);
                if (r2 == r3) s -= at2a(r1, r4);
                break;
            }
            case CompositeKind::I4: {
                const int r1 = rs[0], r2 = rs[1], r3 = rs[2], r4 = rs[3];
                s = at4(r1, r2, r3, r4) + at4(r2, r1, r3, r4);
                if (r1 == r2) s -= at2b(r3, r4);
                break;
            }
            case CompositeKind::I5: {
                const int r1 = rs[0], r2 = rs[1], r3 = rs[2], r4 = rs[3];
                s = at4(r2, r1, r3, r4) + at4(r2, r3, r1, r4) + at4(r3, r2, r1, r4);
                if (r1 == r3) s += at2b(r2, r4) - at2a(r2, r4);
                if (r2 == r3) s -= at2b(r1, r4);
                break;
            }
            case CompositeKind::I6: {
                const int r1 = rs[0], r2 = rs[1];
                s = dt * at2b(r1, r2) + at2a(r1, r2);
                break;
            }
            case CompositeKind::I7: {
                const int r1 = rs[0], r2 = rs[1];
                s = dt * at1(r1) * at1(r2) + at2a(r1, r2) + at2a(r2, r1);
                if (r1 == r2) s -= 0.5 * dt2;
                break;
            }
            case CompositeKind::I8: {
                const int r1 = rs[0], r2 = rs[1];
                s = -at2a(r1, r2);
                break;
            }
        }

        double lam = 1.0;
        for (int r : rs) lam *= spec.eigenvalue(r);
        const double w = std::sqrt(lam) * s;
        const double* col = op.column(rs);
        for (int h = 0; h < op.dim; ++h) acc[static_cast<std::size_t>(h)] += w * col[h];
    } while (detail::next_tuple(rs, M));
    return acc;
}

// Mean-square error bound for each composite shape, in terms of the operator
// constant, the full trace, and the exact coefficient-tail defects. The
// order-(0,1) and order-(1,0) shapes are reproduced exactly at q >= 1, so
// their bound is zero. The time-weighted pair tail here is the closed-form
// series, which understates the q = 0 family defect (see
// weighted_pair_mse_series_coeff); prefer q >= 1 when certifying against
// simulation.
inline double composite_error_bound(CompositeKind kind, double operator_bound, const QWienerSpec& spec,
                                    int q, double dt) {
    if (q < 0) throw std::invalid_argument("composite_error_bound: truncation level must be >= 0");
    if (!(operator_bound >= 0.0))
        throw std::invalid_argument("composite_error_bound: operator bound must be nonnegative");
    const double tr = spec.trace;
    const double dt4 = dt * dt * dt * dt;
    const double e_pair = to_double(weighted_pair_mse_series_coeff(q)) * dt4;
    switch (kind) {
        case CompositeKind::I0:
        case CompositeKind::I1:
            return 0.0;
        case CompositeKind::I2: {
            const double defect3 = to_double(mse_exact_distinct_coeff(3, q)) * dt * dt * dt;
            return 4.0 * operator_bound * 36.0 * tr * tr * tr * defect3;
        }
        case CompositeKind::I3: {
            const double defect4 = to_double(mse_exact_distinct_coeff(4, q)) * dt4;
            return operator_bound * std::pow(tr, 4) * (36.0 * 576.0 * defect4 + 36.0 * e_pair);
        }
        case CompositeKind::I4: {
            const double defect4 = to_double(mse_exact_distinct_coeff(4, q)) * dt4;
            return operator_bound * std::pow(tr, 4) * (4.0 * 576.0 * defect4 + 4.0 * e_pair);
        }
        case CompositeKind::I5: {
            const double defect4 = to_double(mse_exact_distinct_coeff(4, q)) * dt4;
            return operator_bound * std::pow(tr, 4) * (9.0 * 576.0 * defect4 + 36.0 * e_pair);
        }
        case CompositeKind::I6: {
            const double g_pair = to_double(i11_mse_coeff(q)) * dt * dt;
            return 2.0 * operator_bound * 4.0 * tr * tr * (dt * dt * g_pair + e_pair);
        }
        case CompositeKind::I7:
            return 4.0 * operator_bound * 4.0 * tr * tr * e_pair;
        case CompositeKind::I8:
            return operator_bound * 4.0 * tr * tr * e_pair;
    }
    throw std::invalid_argument("composite_error_bound: unknown kind");
}

// True when the two mode tuples differ as multisets: the condition under
// which approximation errors of distinct tuples are uncorrelated, which the
// simulation layer exploits when pooling cross terms.
inline bool check_orthogonality_inputs(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return true;
    std::vector<int> sa(a), sb(b);
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    return sa != sb;
}

}  // namespace itofl
