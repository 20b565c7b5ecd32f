#pragma once

// Straight-line reference implementations of the composite assemblies, kept
// deliberately separate from the library: coefficients come from a local
// polynomial integrator, the scalar blocks are written out term by term, and
// mode sums index the operator tensor directly. Shares only the data types
// and the draw matrix with the code under test, so agreement is evidence the
// library's algebra is right, not a tautology.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "itofl/noise.hpp"
#include "itofl/qwiener.hpp"

namespace naive {

using Poly = std::vector<double>;  // p[i] is the coefficient of x^i

inline Poly legendre(int n) {
    Poly pm1{1.0};
    if (n == 0) return pm1;
    Poly p{0.0, 1.0};
    for (int m = 1; m < n; ++m) {
        Poly next(static_cast<std::size_t>(m) + 2, 0.0);
        for (std::size_t i = 0; i < p.size(); ++i)
            next[i + 1] += (2.0 * m + 1.0) / (m + 1.0) * p[i];
        for (std::size_t i = 0; i < pm1.size(); ++i)
            next[i] -= static_cast<double>(m) / (m + 1.0) * pm1[i];
        pm1 = p;
        p = next;
    }
    return p;
}

inline double eval(const Poly& p, double x) {
    double v = 0.0;
    for (std::size_t i = p.size(); i-- > 0;) v = v * x + p[i];
    return v;
}

inline Poly mul(const Poly& a, const Poly& b) {
    Poly r(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

// Antiderivative vanishing at -1.
inline Poly integral_from_minus1(const Poly& p) {
    Poly r(p.size() + 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) r[i + 1] = p[i] / static_cast<double>(i + 1);
    r[0] = -eval(r, -1.0);
    return r;
}

// Nested integral of the product of Legendre polynomials over the ordered
// simplex in [-1, 1]^k; indices are listed innermost first.
inline double cbar(const std::vector<int>& j_inner_first) {
    Poly acc{1.0};
    for (std::size_t l = 0; l < j_inner_first.size(); ++l) {
        acc = mul(legendre(j_inner_first[l]), acc);
        acc = integral_from_minus1(acc);
    }
    return eval(acc, 1.0);
}

inline double coeff3(int j1, int j2, int j3, double dt) {
    return std::sqrt((2.0 * j1 + 1.0) * (2.0 * j2 + 1.0) * (2.0 * j3 + 1.0)) * std::pow(dt, 1.5) / 8.0 *
           cbar({j1, j2, j3});
}

inline double coeff4(int j1, int j2, int j3, int j4, double dt) {
    return std::sqrt((2.0 * j1 + 1.0) * (2.0 * j2 + 1.0) * (2.0 * j3 + 1.0) * (2.0 * j4 + 1.0)) * dt * dt /
           16.0 * cbar({j1, j2, j3, j4});
}

inline double triple(int i1, int i2, int i3, int q, const itofl::NoiseMatrix& z, double dt) {
    double s = 0.0;
    for (int j1 = 0; j1 <= q; ++j1)
        for (int j2 = 0; j2 <= q; ++j2)
            for (int j3 = 0; j3 <= q; ++j3) {
                double b = z.zeta(i1, j1) * z.zeta(i2, j2) * z.zeta(i3, j3);
                if (i1 == i2 && j1 == j2) b -= z.zeta(i3, j3);
                if (i2 == i3 && j2 == j3) b -= z.zeta(i1, j1);
                if (i1 == i3 && j1 == j3) b -= z.zeta(i2, j2);
                s += coeff3(j1, j2, j3, dt) * b;
            }
    return s;
}

inline double quadruple(int i1, int i2, int i3, int i4, int q, const itofl::NoiseMatrix& z, double dt) {
    double s = 0.0;
    for (int j1 = 0; j1 <= q; ++j1)
        for (int j2 = 0; j2 <= q; ++j2)
            for (int j3 = 0; j3 <= q; ++j3)
                for (int j4 = 0; j4 <= q; ++j4) {
                    double b = z.zeta(i1, j1) * z.zeta(i2, j2) * z.zeta(i3, j3) * z.zeta(i4, j4);
                    if (i1 == i2 && j1 == j2) b -= z.zeta(i3, j3) * z.zeta(i4, j4);
                    if (i1 == i3 && j1 == j3) b -= z.zeta(i2, j2) * z.zeta(i4, j4);
                    if (i1 == i4 && j1 == j4) b -= z.zeta(i2, j2) * z.zeta(i3, j3);
                    if (i2 == i3 && j2 == j3) b -= z.zeta(i1, j1) * z.zeta(i4, j4);
                    if (i2 == i4 && j2 == j4) b -= z.zeta(i1, j1) * z.zeta(i3, j3);
                    if (i3 == i4 && j3 == j4) b -= z.zeta(i1, j1) * z.zeta(i2, j2);
                    if (i1 == i2 && j1 == j2 && i3 == i4 && j3 == j4) b += 1.0;
                    if (i1 == i3 && j1 == j3 && i2 == i4 && j2 == j4) b += 1.0;
                    if (i1 == i4 && j1 == j4 && i2 == i3 && j2 == j3) b += 1.0;
                    s += coeff4(j1, j2, j3, j4, dt) * b;
                }
    return s;
}

inline double order01(int r, int q, const itofl::NoiseMatrix& z, double dt) {
    double s = z.zeta(r, 0);
    if (q >= 1) s += z.zeta(r, 1) / std::sqrt(3.0);
    return std::pow(dt, 1.5) / 2.0 * s;
}

inline double pair11(int r1, int r2, int q, const itofl::NoiseMatrix& z, double dt) {
    double s = z.zeta(r1, 0) * z.zeta(r2, 0);
    for (int i = 1; i <= q; ++i)
        s += (z.zeta(r1, i - 1) * z.zeta(r2, i) - z.zeta(r1, i) * z.zeta(r2, i - 1)) /
             std::sqrt(4.0 * i * i - 1.0);
    if (r1 == r2) s -= 1.0;
    return dt / 2.0 * s;
}

inline double pair01(int r1, int r2, int q, const itofl::NoiseMatrix& z, double dt) {
    double s = z.zeta(r1, 0) * z.zeta(r2, 1) / std::sqrt(3.0);
    for (int i = 0; i <= q; ++i) {
        s += ((i + 2.0) * z.zeta(r1, i) * z.zeta(r2, i + 2) - (i + 1.0) * z.zeta(r1, i + 2) * z.zeta(r2, i)) /
             (std::sqrt((2.0 * i + 1.0) * (2.0 * i + 5.0)) * (2.0 * i + 3.0));
        s -= z.zeta(r1, i) * z.zeta(r2, i) / ((2.0 * i - 1.0) * (2.0 * i + 3.0));
    }
    return -dt / 2.0 * pair11(r1, r2, q, z, dt) - dt * dt / 4.0 * s;
}

inline double pair10(int r1, int r2, int q, const itofl::NoiseMatrix& z, double dt) {
    double s = z.zeta(r2, 0) * z.zeta(r1, 1) / std::sqrt(3.0);
    for (int i = 0; i <= q; ++i) {
        s += ((i + 1.0) * z.zeta(r2, i + 2) * z.zeta(r1, i) - (i + 2.0) * z.zeta(r2, i) * z.zeta(r1, i + 2)) /
             (std::sqrt((2.0 * i + 1.0) * (2.0 * i + 5.0)) * (2.0 * i + 3.0));
        s += z.zeta(r1, i) * z.zeta(r2, i) / ((2.0 * i - 1.0) * (2.0 * i + 3.0));
    }
    return -dt / 2.0 * pair11(r1, r2, q, z, dt) - dt * dt / 4.0 * s;
}

inline const double* tensor_column2(const itofl::MultilinearOperator& op, int r1, int r2) {
    const std::size_t f = (static_cast<std::size_t>(r1 - 1) * static_cast<std::size_t>(op.modes) +
                           static_cast<std::size_t>(r2 - 1)) *
                          static_cast<std::size_t>(op.dim);
    return op.data.data() + f;
}

inline const double* tensor_column3(const itofl::MultilinearOperator& op, int r1, int r2, int r3) {
    std::size_t f = static_cast<std::size_t>(r1 - 1);
    f = f * static_cast<std::size_t>(op.modes) + static_cast<std::size_t>(r2 - 1);
    f = f * static_cast<std::size_t>(op.modes) + static_cast<std::size_t>(r3 - 1);
    return op.data.data() + f * static_cast<std::size_t>(op.dim);
}

inline const double* tensor_column4(const itofl::MultilinearOperator& op, int r1, int r2, int r3, int r4) {
    std::size_t f = static_cast<std::size_t>(r1 - 1);
    f = f * static_cast<std::size_t>(op.modes) + static_cast<std::size_t>(r2 - 1);
    f = f * static_cast<std::size_t>(op.modes) + static_cast<std::size_t>(r3 - 1);
    f = f * static_cast<std::size_t>(op.modes) + static_cast<std::size_t>(r4 - 1);
    return op.data.data() + f * static_cast<std::size_t>(op.dim);
}

// The plain multiplicity-3 spectral sum with unit weights, mode by mode.
inline std::vector<double> generic3(const itofl::MultilinearOperator& op, const itofl::QWienerSpec& spec,
                                    int q, const itofl::NoiseMatrix& z, double dt) {
    std::vector<double> acc(static_cast<std::size_t>(op.dim), 0.0);
    const int M = spec.modes();
    for (int r1 = 1; r1 <= M; ++r1)
        for (int r2 = 1; r2 <= M; ++r2)
            for (int r3 = 1; r3 <= M; ++r3) {
                const double w =
                    std::sqrt(spec.eigenvalue(r1) * spec.eigenvalue(r2) * spec.eigenvalue(r3)) *
                    triple(r1, r2, r3, q, z, dt);
                const double* col = tensor_column3(op, r1, r2, r3);
                for (int h = 0; h < op.dim; ++h) acc[static_cast<std::size_t>(h)] += w * col[h];
            }
    return acc;
}

inline std::vector<double> composite_i2(const itofl::MultilinearOperator& op, const itofl::QWienerSpec& spec,
                                        int q, const itofl::NoiseMatrix& z, double dt) {
    std::vector<double> acc(static_cast<std::size_t>(op.dim), 0.0);
    const int M = spec.modes();
    for (int r1 = 1; r1 <= M; ++r1)
        for (int r2 = 1; r2 <= M; ++r2)
            for (int r3 = 1; r3 <= M; ++r3) {
                double s = triple(r1, r2, r3, q, z, dt) + triple(r2, r1, r3, q, z, dt);
                if (r1 == r2) s += order01(r3, q, z, dt);
                const double w =
                    std::sqrt(spec.eigenvalue(r1) * spec.eigenvalue(r2) * spec.eigenvalue(r3)) * s;
                const double* col = tensor_column3(op, r1, r2, r3);
                for (int h = 0; h < op.dim; ++h) acc[static_cast<std::size_t>(h)] += w * col[h];
            }
    return acc;
}

inline std::vector<double> composite_i4(const itofl::MultilinearOperator& op, const itofl::QWienerSpec& spec,
                                        int q, const itofl::NoiseMatrix& z, double dt) {
    std::vector<double> acc(static_cast<std::size_t>(op.dim), 0.0);
    const int M = spec.modes();
    for (int r1 = 1; r1 <= M; ++r1)
        for (int r2 = 1; r2 <= M; ++r2)
            for (int r3 = 1; r3 <= M; ++r3)
                for (int r4 = 1; r4 <= M; ++r4) {
                    double s = quadruple(r1, r2, r3, r4, q, z, dt) + quadruple(r2, r1, r3, r4, q, z, dt);
                    if (r1 == r2) s -= pair10(r3, r4, q, z, dt);
                    const double w = std::sqrt(spec.eigenvalue(r1) * spec.eigenvalue(r2) *
                                               spec.eigenvalue(r3) * spec.eigenvalue(r4)) *
                                     s;
                    const double* col = tensor_column4(op, r1, r2, r3, r4);
                    for (int h = 0; h < op.dim; ++h) acc[static_cast<std::size_t>(h)] += w * col[h];
                }
    return acc;
}

}  // namespace naive
