#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "itofl/expansion.hpp"
#include "itofl/qwiener.hpp"

namespace itofl {

// Brute-force side of the library: fine-grid path simulation of the nested
// integrals, estimation of mean-square errors against the closed forms, and
// statistical checks that need a genuinely different computational route than
// the series construction.

// Uniform grid over an interval of length dt with m independent Wiener
// components. Increment (i, j) is a pure function of (seed, i, j): a larger
// step count or component count extends a path without reshuffling the
// entries that already existed, and no state survives between calls.
class GridPath {
  public:
    GridPath(int components, int steps, double dt, std::uint64_t seed)
        : m_(components), n_(steps), dt_(dt) {
        if (components < 1) throw std::invalid_argument("GridPath: need at least one component");
        if (steps < 2) throw std::invalid_argument("GridPath: need at least two steps");
        if (!(dt > 0.0)) throw std::invalid_argument("GridPath: interval length must be positive");
        dtau_ = dt_ / n_;
        dw_.resize(static_cast<std::size_t>(m_) * static_cast<std::size_t>(n_));
        regenerate(seed);
    }

    // refill every increment from a new seed, keeping the shape and buffers
    void regenerate(std::uint64_t seed) {
        seed_ = seed;
        const double root = std::sqrt(dtau_);
        for (int i = 1; i <= m_; ++i) {
            double* row = &dw_[static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(n_)];
            for (int j = 0; j < n_; j += 2) {
                // one Box-Muller evaluation feeds two consecutive steps; both
                // halves are independent standard normals, and entry j still
                // depends only on (seed, i, j)
                const double u = rng::u01(rng::hash4(seed, 0x77, static_cast<std::uint64_t>(i),
                                                     static_cast<std::uint64_t>(j >> 1)));
                const double v = rng::u01(rng::hash4(seed, 0x7e, static_cast<std::uint64_t>(i),
                                                     static_cast<std::uint64_t>(j >> 1)));
                const double r = root * std::sqrt(-2.0 * std::log(u));
                const double a = 6.283185307179586476925286766559 * v;
                row[j] = r * std::cos(a);
                if (j + 1 < n_) row[j + 1] = r * std::sin(a);
            }
        }
    }

    int components() const { return m_; }
    int steps() const { return n_; }
    double dt() const { return dt_; }
    double dtau() const { return dtau_; }
    std::uint64_t seed() const { return seed_; }

    double increment(int comp, int j) const {
        if (comp < 1 || comp > m_ || j < 0 || j >= n_)
            throw std::out_of_range("GridPath: (component, step) outside the path");
        return dw_[static_cast<std::size_t>(comp - 1) * static_cast<std::size_t>(n_) +
                   static_cast<std::size_t>(j)];
    }

    const double* row(int comp) const {
        if (comp < 1 || comp > m_) throw std::out_of_range("GridPath: component outside the path");
        return &dw_[static_cast<std::size_t>(comp - 1) * static_cast<std::size_t>(n_)];
    }

  private:
    int m_;
    int n_;
    double dt_;
    double dtau_;
    std::uint64_t seed_ = 0;
    std::vector<double> dw_;
};

namespace detail {

// Path-independent part of a reference simulation: the per-level weight
// values psi_l(tau_j) at the left endpoints tau_j = j * dtau, precomputed so
// replication loops do not rebuild them.
struct ReferencePlan {
    int k = 0;
    int n = 0;
    std::vector<std::vector<double>> psi;
    mutable std::vector<double> prev;
    mutable std::vector<double> cur;
};

inline ReferencePlan make_reference_plan(const WeightSpec& weights, int n, double dt) {
    ReferencePlan plan;
    plan.k = weights.multiplicity();
    plan.n = n;
    plan.psi.resize(static_cast<std::size_t>(plan.k));
    for (int l = 0; l < plan.k; ++l) {
        const Weight& w = weights.levels[static_cast<std::size_t>(l)];
        std::vector<double> coeffs(w.ref.coeffs.size());
        for (std::size_t c = 0; c < coeffs.size(); ++c) coeffs[c] = to_double(w.ref.coeffs[c]);
        const double scale = std::pow(dt, w.scale_degree);
        std::vector<double>& out = plan.psi[static_cast<std::size_t>(l)];
        out.resize(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            const double x = 2.0 * j / n - 1.0;
            double v = 0.0;
            for (std::size_t c = coeffs.size(); c-- > 0;) v = v * x + coeffs[c];
            out[static_cast<std::size_t>(j)] = scale * v;
        }
    }
    plan.prev.resize(static_cast<std::size_t>(n));
    plan.cur.resize(static_cast<std::size_t>(n));
    return plan;
}

inline double run_reference_plan(const MultiIndex& idx, const ReferencePlan& plan,
                                 const GridPath& path) {
    const int k = plan.k;
    const int n = plan.n;
    const double dtau = path.dtau();
    // increments of level l; a null row marks a time level
    auto level_row = [&](int l) -> const double* {
        const int c = idx[static_cast<std::size_t>(l)];
        return c == 0 ? nullptr : path.row(c);
    };

    std::vector<double>& prev = plan.prev;
    std::vector<double>& cur = plan.cur;
    for (int l = 0; l + 1 < k; ++l) {
        const double* psi = plan.psi[static_cast<std::size_t>(l)].data();
        const double* inc = level_row(l);
        double running = 0.0;
        if (l == 0) {
            for (int j = 0; j < n; ++j) {
                running += psi[j] * (inc ? inc[j] : dtau);
                cur[static_cast<std::size_t>(j)] = running;
            }
        } else {
            cur[0] = 0.0;
            for (int j = 1; j < n; ++j) {
                running += psi[j] * (inc ? inc[j] : dtau) * prev[static_cast<std::size_t>(j - 1)];
                cur[static_cast<std::size_t>(j)] = running;
            }
        }
        std::swap(prev, cur);
    }

    const double* psi = plan.psi[static_cast<std::size_t>(k - 1)].data();
    const double* inc = level_row(k - 1);
    double out = 0.0;
    if (k == 1) {
        for (int j = 0; j < n; ++j) out += psi[j] * (inc ? inc[j] : dtau);
    } else {
        for (int j = 1; j < n; ++j)
            out += psi[j] * (inc ? inc[j] : dtau) * prev[static_cast<std::size_t>(j - 1)];
    }
    return out;
}

inline void check_reference_args(const MultiIndex& idx, const WeightSpec& weights,
                                 const GridPath& path) {
    const int k = weights.multiplicity();
    if (static_cast<int>(idx.size()) != k)
        throw std::invalid_argument("simulate_reference: index count must equal multiplicity");
    if (k < 1 || k > 4)
        throw std::invalid_argument("simulate_reference: supported multiplicities are 1..4");
    for (int c : idx)
        if (c < 0 || c > path.components())
            throw std::out_of_range("simulate_reference: component outside the path");
}

}  // namespace detail

// Left-point Riemann-Ito sum of the nested integral over strictly increasing
// step indices. Component 0 marks a deterministic time level (increment
// dtau); unlike the series engine, time levels may sit anywhere. The value is
// the integral of the discretized path, so it carries an O(sqrt(dtau))
// mean-square discretization gap; cost is O(k N), and k is capped at 4
// because statistical work at higher multiplicity runs through the
// closed-form error route instead.
inline double simulate_reference(const MultiIndex& idx, const WeightSpec& weights,
                                 const GridPath& path) {
    detail::check_reference_args(idx, weights, path);
    const detail::ReferencePlan plan = detail::make_reference_plan(weights, path.steps(), path.dt());
    return detail::run_reference_plan(idx, plan, path);
}

// Basis draws computed from the path itself: zeta_j = sum_l phi_j(tau_l) dw_l
// with phi_j the orthonormal scaled Legendre functions on the interval. The
// draws and the reference values then share one source of randomness, so a
// reference-minus-approximation difference estimates the true mean-square
// error instead of the sum of two variances.
inline void couple_noise_into(const GridPath& path, NoiseMatrix& out) {
    if (out.components() > path.components())
        throw std::invalid_argument("couple_noise: path has fewer components than the draw matrix");
    const int p = out.max_index();
    if (p > kMaxLegendreIndex)
        throw std::invalid_argument("couple_noise: basis index beyond the supported range");
    const int n = path.steps();
    const int m = out.components();
    for (int i = 1; i <= m; ++i)
        for (int j = 0; j <= p; ++j) out.zeta_mut(i, j) = 0.0;

    std::vector<double> pj(static_cast<std::size_t>(p + 1));
    for (int l = 0; l < n; ++l) {
        const double x = 2.0 * l / n - 1.0;
        pj[0] = 1.0;
        if (p >= 1) pj[1] = x;
        for (int j = 2; j <= p; ++j)
            pj[static_cast<std::size_t>(j)] =
                ((2 * j - 1) * x * pj[static_cast<std::size_t>(j - 1)] -
                 (j - 1) * pj[static_cast<std::size_t>(j - 2)]) /
                j;
        for (int i = 1; i <= m; ++i) {
            const double dwl = path.row(i)[l];
            for (int j = 0; j <= p; ++j) out.zeta_mut(i, j) += pj[static_cast<std::size_t>(j)] * dwl;
        }
    }
    for (int j = 0; j <= p; ++j) {
        const double scale = std::sqrt((2.0 * j + 1.0) / path.dt());
        for (int i = 1; i <= m; ++i) out.zeta_mut(i, j) *= scale;
    }
}

inline NoiseMatrix couple_noise(const GridPath& path, int p_max) {
    NoiseMatrix out(path.components(), p_max, path.seed());
    couple_noise_into(path, out);
    return out;
}

struct MseEstimate {
    double estimate = 0.0;
    double se = 0.0;
    long long replications = 0;
};

// One measured quantity of a shared-path sweep: a reference integral plus the
// coupled-draw approximation whose mean-square gap is wanted. basis_index is
// the highest Legendre index the approximation reads.
struct MseCase {
    std::string label;
    MultiIndex idx;
    WeightSpec weights;
    int basis_index = 0;
    std::function<double(const NoiseMatrix&)> approx;
};

// rectangular-truncation approximation of the same integral
inline MseCase mse_case(std::string label, const MultiIndex& idx, const WeightSpec& weights,
                        const TruncationSpec& trunc, double dt) {
    auto eng = std::make_shared<IteratedApproximator>(idx, weights, trunc, dt);
    MseCase c;
    c.label = std::move(label);
    c.idx = idx;
    c.weights = weights;
    c.basis_index = eng->required_basis_index();
    c.approx = [eng](const NoiseMatrix& nm) { return eng->value(nm); };
    return c;
}

// banded pair approximations with a time weight on one level; dt must match
// the sweep interval
inline MseCase j01_mse_case(int r1, int r2, int q, double dt) {
    MseCase c;
    c.label = "j01";
    c.idx = {r1, r2};
    c.weights = WeightSpec({Weight::unit(), Weight::start_minus_time()});
    c.basis_index = q + 2;
    c.approx = [=](const NoiseMatrix& nm) { return j01_approx(r1, r2, q, nm, dt); };
    return c;
}

inline MseCase j10_mse_case(int r1, int r2, int q, double dt) {
    MseCase c;
    c.label = "j10";
    c.idx = {r1, r2};
    c.weights = WeightSpec({Weight::start_minus_time(), Weight::unit()});
    c.basis_index = q + 2;
    c.approx = [=](const NoiseMatrix& nm) { return j10_approx(r1, r2, q, nm, dt); };
    return c;
}

// single-level time-weighted integrals whose q >= 1 approximation is exact;
// their measured estimates are pure discretization floor, used to calibrate
// the grid-bias allowance
inline MseCase i01_mse_case(int r, int q, double dt) {
    MseCase c;
    c.label = "i01";
    c.idx = {0, r};
    c.weights = WeightSpec::unit(2);
    c.basis_index = q >= 1 ? 1 : 0;
    c.approx = [=](const NoiseMatrix& nm) { return i01_approx(r, q, nm, dt); };
    return c;
}

inline MseCase i10_mse_case(int r, int q, double dt) {
    MseCase c;
    c.label = "i10";
    c.idx = {r, 0};
    c.weights = WeightSpec::unit(2);
    c.basis_index = q >= 1 ? 1 : 0;
    c.approx = [=](const NoiseMatrix& nm) { return i10_approx(r, q, nm, dt); };
    return c;
}

namespace detail {

inline constexpr int kReductionChunks = 256;

// chunk assignment and in-order combination pin the reduction tree, so the
// totals cannot depend on how replications are scheduled
inline int chunk_of(long long rep, long long total) {
    return static_cast<int>(rep * kReductionChunks / total);
}

struct MomentAccumulator {
    std::vector<double> sum1;
    std::vector<double> sum2;

    explicit MomentAccumulator(std::size_t cases)
        : sum1(cases * kReductionChunks, 0.0), sum2(cases * kReductionChunks, 0.0) {}

    void add(std::size_t c, int chunk, double v) {
        const std::size_t at = c * kReductionChunks + static_cast<std::size_t>(chunk);
        sum1[at] += v;
        sum2[at] += v * v;
    }

    MseEstimate finish(std::size_t c, long long r) const {
        double t1 = 0.0;
        double t2 = 0.0;
        for (int ch = 0; ch < kReductionChunks; ++ch) {
            t1 += sum1[c * kReductionChunks + static_cast<std::size_t>(ch)];
            t2 += sum2[c * kReductionChunks + static_cast<std::size_t>(ch)];
        }
        MseEstimate out;
        out.replications = r;
        out.estimate = t1 / static_cast<double>(r);
        const double var = std::max(0.0, t2 / static_cast<double>(r) - out.estimate * out.estimate);
        out.se = std::sqrt(var / static_cast<double>(r - 1));
        return out;
    }
};

}  // namespace detail

// Mean over R replications of (reference - approximation)^2 for every case on
// shared paths: one path and one coupled draw matrix per replication serve
// all cases, and cases with identical reference integrals share the simulated
// value. Replication seeds derive from (seed, replication index), so the
// estimates are bit-identical for a fixed (seed, R, N) regardless of how the
// replication range is partitioned.
inline std::vector<MseEstimate> estimate_mse_sweep(const std::vector<MseCase>& cases, long long R,
                                                   int N, double dt, std::uint64_t seed) {
    if (cases.empty()) throw std::invalid_argument("estimate_mse_sweep: no cases");
    if (R < 2) throw std::invalid_argument("estimate_mse_sweep: need at least two replications");
    int m = 1;
    int p_needed = 0;
    for (const MseCase& c : cases) {
        if (!c.approx) throw std::invalid_argument("estimate_mse_sweep: case without approximation");
        for (int comp : c.idx) m = std::max(m, comp);
        p_needed = std::max(p_needed, c.basis_index);
    }

    // cases sharing (idx, weights) read one simulated value per replication
    std::vector<std::size_t> ref_slot(cases.size());
    std::vector<std::size_t> distinct;
    for (std::size_t c = 0; c < cases.size(); ++c) {
        std::size_t found = distinct.size();
        for (std::size_t d = 0; d < distinct.size(); ++d) {
            const MseCase& o = cases[distinct[d]];
            if (o.idx == cases[c].idx && o.weights == cases[c].weights) {
                found = d;
                break;
            }
        }
        if (found == distinct.size()) distinct.push_back(c);
        ref_slot[c] = found;
    }

    GridPath path(m, N, dt, seed);
    for (const MseCase& c : cases) detail::check_reference_args(c.idx, c.weights, path);
    std::vector<detail::ReferencePlan> plans;
    plans.reserve(distinct.size());
    for (std::size_t d : distinct)
        plans.push_back(detail::make_reference_plan(cases[d].weights, N, dt));

    NoiseMatrix nm(m, p_needed, seed);
    detail::MomentAccumulator acc(cases.size());
    std::vector<double> refs(distinct.size());
    for (long long rep = 0; rep < R; ++rep) {
        path.regenerate(rng::hash2(seed, static_cast<std::uint64_t>(rep)));
        couple_noise_into(path, nm);
        for (std::size_t d = 0; d < distinct.size(); ++d)
            refs[d] = detail::run_reference_plan(cases[distinct[d]].idx, plans[d], path);
        const int chunk = detail::chunk_of(rep, R);
        for (std::size_t c = 0; c < cases.size(); ++c) {
            const double diff = refs[ref_slot[c]] - cases[c].approx(nm);
            acc.add(c, chunk, diff * diff);
        }
    }

    std::vector<MseEstimate> out(cases.size());
    for (std::size_t c = 0; c < cases.size(); ++c) out[c] = acc.finish(c, R);
    return out;
}

inline MseEstimate estimate_mse(const MultiIndex& idx, const WeightSpec& weights,
                                const TruncationSpec& trunc, long long R, int N, double dt,
                                std::uint64_t seed) {
    return estimate_mse_sweep({mse_case("case", idx, weights, trunc, dt)}, R, N, dt, seed)[0];
}

// Discretization allowance for a coupled estimate: the floor measured on
// cases whose exact error vanishes scales like dt^(k + 2m) / N, where k is
// the stochastic multiplicity and m the total time-weight degree of the
// folded integral. The constant 3 envelopes the calibration measurements
// with headroom; the cross term covers the interaction between the floor and
// a nonzero target.
inline double grid_bias_allowance(int k, int scale_degree, double target, double dt, int N) {
    if (k < 1 || scale_degree < 0 || N < 2 || !(dt > 0.0) || target < 0.0)
        throw std::invalid_argument("grid_bias_allowance: bad arguments");
    const double floor = 3.0 * std::pow(dt, k + 2 * scale_degree) / static_cast<double>(N);
    return floor + 2.0 * std::sqrt(floor * target);
}

// Dense term table of an approximation on products of coupled draws when the
// stochastic components are pairwise distinct: the approximation then equals
// sum over index tuples of values[flat] * prod_l zeta_{j_l}, with level 0
// fastest in the flat order and no correction terms.
struct CoupledTermTable {
    std::vector<int> bounds;
    std::vector<double> values;

    std::int64_t size() const { return static_cast<std::int64_t>(values.size()); }
};

inline CoupledTermTable truncated_term_table(const WeightSpec& weights,
                                             const TruncationSpec& trunc, double dt) {
    CoefficientGrid grid(weights, trunc.orders);
    CoupledTermTable out;
    out.bounds = trunc.orders;
    out.values.resize(static_cast<std::size_t>(grid.size()));
    std::vector<int> idx;
    for (std::int64_t f = 0; f < grid.size(); ++f) {
        grid.unflatten(f, idx);
        out.values[static_cast<std::size_t>(f)] = grid.scaled_flat(f, idx, dt);
    }
    return out;
}

inline CoupledTermTable banded_term_table(const std::vector<ExactBandTerm>& band, double scale) {
    int top = 0;
    for (const ExactBandTerm& t : band) top = std::max({top, t.j1, t.j2});
    CoupledTermTable out;
    out.bounds = {top, top};
    out.values.assign(static_cast<std::size_t>(top + 1) * static_cast<std::size_t>(top + 1), 0.0);
    for (const ExactBandTerm& t : band)
        out.values[static_cast<std::size_t>(t.j2) * static_cast<std::size_t>(top + 1) +
                   static_cast<std::size_t>(t.j1)] += scale * t.value();
    return out;
}

// Exact mean square of (left-point reference - coupled approximation) over
// the increment distribution for pairwise distinct components, computed as a
// deterministic quadratic-form trace: no sampling at all. Its gap from the
// continuum mean-square error is the exact discretization bias of the
// coupled estimator at this (N, dt), which is what a Monte Carlo tolerance
// has to absorb on top of statistical error.
inline double grid_mse_exact(const WeightSpec& weights, const CoupledTermTable& coef, int N,
                             double dt) {
    const int k = weights.multiplicity();
    if (static_cast<int>(coef.bounds.size()) != k)
        throw std::invalid_argument("grid_mse_exact: table arity must equal multiplicity");
    if (k < 1 || k > 4)
        throw std::invalid_argument("grid_mse_exact: supported multiplicities are 1..4");
    if (N < 2) throw std::invalid_argument("grid_mse_exact: need at least two steps");
    if (!(dt > 0.0)) throw std::invalid_argument("grid_mse_exact: interval length must be positive");
    int maxb = 0;
    for (int b : coef.bounds) {
        if (b < 0) throw std::invalid_argument("grid_mse_exact: negative bound");
        maxb = std::max(maxb, b);
    }

    const detail::ReferencePlan plan = detail::make_reference_plan(weights, N, dt);

    // coupling rows f_j(l): the grid functional behind zeta_j
    std::vector<std::vector<double>> f(static_cast<std::size_t>(maxb + 1),
                                       std::vector<double>(static_cast<std::size_t>(N)));
    for (int l = 0; l < N; ++l) {
        const double x = 2.0 * l / N - 1.0;
        f[0][static_cast<std::size_t>(l)] = 1.0;
        if (maxb >= 1) f[1][static_cast<std::size_t>(l)] = x;
        for (int j = 2; j <= maxb; ++j)
            f[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)] =
                ((2 * j - 1) * x * f[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(l)] -
                 (j - 1) * f[static_cast<std::size_t>(j - 2)][static_cast<std::size_t>(l)]) /
                j;
    }
    for (int j = 0; j <= maxb; ++j) {
        const double scale = std::sqrt((2.0 * j + 1.0) / dt);
        for (int l = 0; l < N; ++l) f[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)] *= scale;
    }

    // sum over strictly increasing step tuples of prod_l g_l(step_l)
    std::vector<double> prev(static_cast<std::size_t>(N));
    std::vector<double> cur(static_cast<std::size_t>(N));
    auto strict_sum = [&](const std::vector<const double*>& g) {
        for (int l = 0; l + 1 < k; ++l) {
            double running = 0.0;
            if (l == 0) {
                for (int j = 0; j < N; ++j) {
                    running += g[0][j];
                    cur[static_cast<std::size_t>(j)] = running;
                }
            } else {
                cur[0] = 0.0;
                for (int j = 1; j < N; ++j) {
                    running += g[static_cast<std::size_t>(l)][j] * prev[static_cast<std::size_t>(j - 1)];
                    cur[static_cast<std::size_t>(j)] = running;
                }
            }
            std::swap(prev, cur);
        }
        double out = 0.0;
        if (k == 1) {
            for (int j = 0; j < N; ++j) out += g[0][j];
        } else {
            for (int j = 1; j < N; ++j)
                out += g[static_cast<std::size_t>(k - 1)][j] * prev[static_cast<std::size_t>(j - 1)];
        }
        return out;
    };

    // squared-reference term
    std::vector<std::vector<double>> psi2(static_cast<std::size_t>(k));
    std::vector<const double*> rows(static_cast<std::size_t>(k));
    for (int l = 0; l < k; ++l) {
        psi2[static_cast<std::size_t>(l)].resize(static_cast<std::size_t>(N));
        for (int j = 0; j < N; ++j) {
            const double v = plan.psi[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)];
            psi2[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)] = v * v;
        }
        rows[static_cast<std::size_t>(l)] = psi2[static_cast<std::size_t>(l)].data();
    }
    const double term_ref = strict_sum(rows);

    // cross term: per index tuple, the strict sum of prod psi_l f_{j_l}
    std::vector<std::vector<double>> psif(
        static_cast<std::size_t>(k) * static_cast<std::size_t>(maxb + 1),
        std::vector<double>(static_cast<std::size_t>(N)));
    for (int l = 0; l < k; ++l)
        for (int j = 0; j <= maxb; ++j) {
            std::vector<double>& out = psif[static_cast<std::size_t>(l) * static_cast<std::size_t>(maxb + 1) +
                                            static_cast<std::size_t>(j)];
            for (int s = 0; s < N; ++s)
                out[static_cast<std::size_t>(s)] =
                    plan.psi[static_cast<std::size_t>(l)][static_cast<std::size_t>(s)] *
                    f[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)];
        }
    double term_cross = 0.0;
    std::vector<int> idx(static_cast<std::size_t>(k), 0);
    for (std::int64_t fl = 0; fl < coef.size(); ++fl) {
        const double c = coef.values[static_cast<std::size_t>(fl)];
        std::int64_t rem = fl;
        for (int l = 0; l < k; ++l) {
            idx[static_cast<std::size_t>(l)] = static_cast<int>(rem % (coef.bounds[static_cast<std::size_t>(l)] + 1));
            rem /= coef.bounds[static_cast<std::size_t>(l)] + 1;
        }
        if (c == 0.0) continue;
        for (int l = 0; l < k; ++l)
            rows[static_cast<std::size_t>(l)] =
                psif[static_cast<std::size_t>(l) * static_cast<std::size_t>(maxb + 1) +
                     static_cast<std::size_t>(idx[static_cast<std::size_t>(l)])]
                    .data();
        term_cross += c * strict_sum(rows);
    }

    // squared-approximation term through the coupling Gram matrix
    std::vector<double> gram(static_cast<std::size_t>(maxb + 1) * static_cast<std::size_t>(maxb + 1), 0.0);
    for (int a = 0; a <= maxb; ++a)
        for (int b = a; b <= maxb; ++b) {
            double s = 0.0;
            for (int l = 0; l < N; ++l)
                s += f[static_cast<std::size_t>(a)][static_cast<std::size_t>(l)] *
                     f[static_cast<std::size_t>(b)][static_cast<std::size_t>(l)];
            gram[static_cast<std::size_t>(a) * static_cast<std::size_t>(maxb + 1) + static_cast<std::size_t>(b)] = s;
            gram[static_cast<std::size_t>(b) * static_cast<std::size_t>(maxb + 1) + static_cast<std::size_t>(a)] = s;
        }
    double term_sq = 0.0;
    std::vector<int> idx2(static_cast<std::size_t>(k), 0);
    for (std::int64_t fa = 0; fa < coef.size(); ++fa) {
        const double ca = coef.values[static_cast<std::size_t>(fa)];
        if (ca == 0.0) continue;
        std::int64_t rem = fa;
        for (int l = 0; l < k; ++l) {
            idx[static_cast<std::size_t>(l)] = static_cast<int>(rem % (coef.bounds[static_cast<std::size_t>(l)] + 1));
            rem /= coef.bounds[static_cast<std::size_t>(l)] + 1;
        }
        for (std::int64_t fb = 0; fb < coef.size(); ++fb) {
            const double cb = coef.values[static_cast<std::size_t>(fb)];
            if (cb == 0.0) continue;
            rem = fb;
            double g = 1.0;
            for (int l = 0; l < k; ++l) {
                idx2[static_cast<std::size_t>(l)] = static_cast<int>(rem % (coef.bounds[static_cast<std::size_t>(l)] + 1));
                rem /= coef.bounds[static_cast<std::size_t>(l)] + 1;
                g *= gram[static_cast<std::size_t>(idx[static_cast<std::size_t>(l)]) * static_cast<std::size_t>(maxb + 1) +
                          static_cast<std::size_t>(idx2[static_cast<std::size_t>(l)])];
            }
            term_sq += ca * cb * g;
        }
    }

    return std::pow(dt / N, k) * (term_ref - 2.0 * term_cross + term_sq);
}

// Pathwise consistency checks: both sides evaluated from the same path with
// the same left-point convention, so the residual is pure discretization
// error with a known O(N^(-1/2)) (or better) envelope.
enum class IdentityKind {
    // product of two first-order integrals against the two interleavings
    // plus the quadratic covariation
    PairProduct,
    // triple integral with a trailing time level against dt times the plain
    // pair plus the time-weighted pair
    TrailingTimeSplit,
    // time integral of the product of two running first-order integrals
    // against its expansion into pair integrals
    PrefixProductIntegral,
};

inline const char* identity_name(IdentityKind kind) {
    switch (kind) {
        case IdentityKind::PairProduct: return "pair-product";
        case IdentityKind::TrailingTimeSplit: return "time-split";
        case IdentityKind::PrefixProductIntegral: return "prefix-product";
    }
    throw std::invalid_argument("identity_name: unknown identity");
}

inline IdentityKind identity_from_name(const std::string& name) {
    if (name == "pair-product") return IdentityKind::PairProduct;
    if (name == "time-split") return IdentityKind::TrailingTimeSplit;
    if (name == "prefix-product") return IdentityKind::PrefixProductIntegral;
    throw std::invalid_argument("identity_from_name: unknown identity " + name);
}

inline double check_identity(IdentityKind kind, int r1, int r2, const GridPath& path) {
    if (r1 < 1 || r1 > path.components() || r2 < 1 || r2 > path.components())
        throw std::out_of_range("check_identity: component outside the path");
    const double dt = path.dt();
    const WeightSpec unit1 = WeightSpec::unit(1);
    const WeightSpec unit2 = WeightSpec::unit(2);
    const WeightSpec w01({Weight::unit(), Weight::start_minus_time()});
    switch (kind) {
        case IdentityKind::PairProduct: {
            const double lhs = simulate_reference({r1}, unit1, path) *
                               simulate_reference({r2}, unit1, path);
            const double rhs = simulate_reference({r1, r2}, unit2, path) +
                               simulate_reference({r2, r1}, unit2, path) +
                               (r1 == r2 ? dt : 0.0);
            return std::abs(lhs - rhs);
        }
        case IdentityKind::TrailingTimeSplit: {
            const double lhs = simulate_reference({r1, r2, 0}, WeightSpec::unit(3), path);
            const double rhs = dt * simulate_reference({r1, r2}, unit2, path) +
                               simulate_reference({r1, r2}, w01, path);
            return std::abs(lhs - rhs);
        }
        case IdentityKind::PrefixProductIntegral: {
            // lhs integrand is a product of two running integrals, so it is
            // not a nested integral; accumulate it directly
            const int n = path.steps();
            const double dtau = path.dtau();
            const double* a = path.row(r1);
            const double* b = path.row(r2);
            double lhs = 0.0;
            double pa = 0.0;
            double pb = 0.0;
            for (int j = 0; j < n; ++j) {
                lhs += dtau * pa * pb;
                pa += a[j];
                pb += b[j];
            }
            const double rhs = dt * simulate_reference({r1}, unit1, path) *
                                   simulate_reference({r2}, unit1, path) +
                               simulate_reference({r1, r2}, w01, path) +
                               simulate_reference({r2, r1}, w01, path) -
                               (r1 == r2 ? 0.5 * dt * dt : 0.0);
            return std::abs(lhs - rhs);
        }
    }
    throw std::invalid_argument("check_identity: unknown identity");
}

// Sample cross moment of the error terms of two component tuples on coupled
// replications; its z-score tests that errors of tuples with different
// multisets are uncorrelated.
struct CrossMoment {
    double mean = 0.0;
    double se = 0.0;
    long long replications = 0;

    double z() const { return se > 0.0 ? mean / se : 0.0; }
};

struct TuplePair {
    std::vector<int> a;
    std::vector<int> b;
};

inline std::vector<CrossMoment> orthogonality_sweep(const std::vector<TuplePair>& pairs, int q,
                                                    long long R, int N, double dt,
                                                    std::uint64_t seed) {
    if (pairs.empty()) throw std::invalid_argument("orthogonality_sweep: no tuple pairs");
    if (R < 2) throw std::invalid_argument("orthogonality_sweep: need at least two replications");
    if (q < 0) throw std::invalid_argument("orthogonality_sweep: truncation must be >= 0");
    int m = 1;
    for (const TuplePair& p : pairs) {
        for (const std::vector<int>* t : {&p.a, &p.b}) {
            if (t->empty() || t->size() > 4)
                throw std::invalid_argument("orthogonality_sweep: tuple sizes are 1..4");
            for (int c : *t) {
                if (c < 1) throw std::invalid_argument("orthogonality_sweep: components must be >= 1");
                m = std::max(m, c);
            }
        }
        if (!check_orthogonality_inputs(p.a, p.b))
            throw std::invalid_argument(
                "orthogonality_sweep: tuples with equal multisets have a nonzero cross moment");
    }

    std::vector<std::vector<int>> tuples;
    auto slot_of = [&](const std::vector<int>& t) {
        for (std::size_t d = 0; d < tuples.size(); ++d)
            if (tuples[d] == t) return d;
        tuples.push_back(t);
        return tuples.size() - 1;
    };
    std::vector<std::pair<std::size_t, std::size_t>> slots;
    slots.reserve(pairs.size());
    for (const TuplePair& p : pairs) {
        const std::size_t sa = slot_of(p.a);
        slots.emplace_back(sa, slot_of(p.b));
    }

    std::vector<std::unique_ptr<IteratedApproximator>> engines;
    std::vector<detail::ReferencePlan> plans;
    engines.reserve(tuples.size());
    plans.reserve(tuples.size());
    for (const std::vector<int>& t : tuples) {
        const int k = static_cast<int>(t.size());
        engines.push_back(std::make_unique<IteratedApproximator>(
            t, WeightSpec::unit(k), TruncationSpec::uniform(k, q), dt));
        plans.push_back(detail::make_reference_plan(WeightSpec::unit(k), N, dt));
    }

    GridPath path(m, N, dt, seed);
    NoiseMatrix nm(m, q, seed);
    detail::MomentAccumulator acc(pairs.size());
    std::vector<double> errs(tuples.size());
    for (long long rep = 0; rep < R; ++rep) {
        path.regenerate(rng::hash2(seed, static_cast<std::uint64_t>(rep)));
        couple_noise_into(path, nm);
        for (std::size_t d = 0; d < tuples.size(); ++d)
            errs[d] = detail::run_reference_plan(tuples[d], plans[d], path) - engines[d]->value(nm);
        const int chunk = detail::chunk_of(rep, R);
        for (std::size_t c = 0; c < pairs.size(); ++c)
            acc.add(c, chunk, errs[slots[c].first] * errs[slots[c].second]);
    }

    std::vector<CrossMoment> out(pairs.size());
    for (std::size_t c = 0; c < pairs.size(); ++c) {
        const MseEstimate e = acc.finish(c, R);
        out[c] = {e.estimate, e.se, e.replications};
    }
    return out;
}

inline CrossMoment orthogonality_test(const std::vector<int>& a, const std::vector<int>& b, int q,
                                      long long R, int N, double dt, std::uint64_t seed) {
    return orthogonality_sweep({TuplePair{a, b}}, q, R, N, dt, seed)[0];
}

// Mean squared H-norm of the gap between the spectrally assembled integral
// with exact mode integrals and the same assembly with truncated integrals,
// on coupled replications. The matching upper bound is qwiener_mse_bound.
inline MseEstimate qwiener_mse_estimate(const MultilinearOperator& op, const QWienerSpec& spec,
                                        const WeightSpec& weights, const TruncationSpec& trunc,
                                        long long R, int N, double dt, std::uint64_t seed) {
    if (R < 2) throw std::invalid_argument("qwiener_mse_estimate: need at least two replications");
    const int k = weights.multiplicity();
    if (op.arity != k)
        throw std::invalid_argument("qwiener_mse_estimate: operator arity must match multiplicity");
    if (k > 4)
        throw std::invalid_argument("qwiener_mse_estimate: supported multiplicities are 1..4");
    if (op.modes < spec.modes())
        throw std::invalid_argument(
            "qwiener_mse_estimate: operator covers fewer modes than the spectrum");
    const int M = spec.modes();

    IteratedApproximator engine(MultiIndex(static_cast<std::size_t>(k), 1), weights, trunc, dt);
    GridPath path(M, N, dt, seed);
    NoiseMatrix nm(M, engine.required_basis_index(), seed);
    const detail::ReferencePlan plan = detail::make_reference_plan(weights, N, dt);
    detail::MomentAccumulator acc(1);

    // per-tuple amplitude: sqrt of the retained eigenvalue product
    std::vector<double> amp;
    {
        std::vector<int> rs(static_cast<std::size_t>(k), 1);
        do {
            double a = 1.0;
            for (int c : rs) a *= spec.eigenvalue(c);
            amp.push_back(std::sqrt(a));
        } while (detail::next_tuple(rs, M));
    }

    std::vector<double> h(static_cast<std::size_t>(op.dim));
    for (long long rep = 0; rep < R; ++rep) {
        path.regenerate(rng::hash2(seed, static_cast<std::uint64_t>(rep)));
        couple_noise_into(path, nm);
        std::fill(h.begin(), h.end(), 0.0);
        std::vector<int> rs(static_cast<std::size_t>(k), 1);
        std::size_t flat = 0;
        do {
            const double ref = detail::run_reference_plan(rs, plan, path);
            const double gap = amp[flat++] * (ref - engine.value_for(rs, nm));
            const double* col = op.column(rs);
            for (int d = 0; d < op.dim; ++d) h[static_cast<std::size_t>(d)] += gap * col[d];
        } while (detail::next_tuple(rs, M));
        double norm2 = 0.0;
        for (double v : h) norm2 += v * v;
        acc.add(0, detail::chunk_of(rep, R), norm2);
    }
    return acc.finish(0, R);
}

}  // namespace itofl
