#pragma once

// Test-side oracle: numeric eigenvalues of a small real matrix obtained
// *without* the closed forms under test.  Characteristic-polynomial
// coefficients come from the Faddeev-LeVerrier recurrence and the roots from
// Durand-Kerner iteration with a Newton polish.  Double-precision accurate
// (~1e-14 relative) for simple, well-separated roots.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

namespace oracle {

using mat4 = std::array<std::array<double, 4>, 4>;
using cplx = std::complex<double>;

inline mat4 matmul(const mat4& a, const mat4& b) {
    mat4 c{};
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k)
            for (int j = 0; j < 4; ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

inline double trace(const mat4& a) { return a[0][0] + a[1][1] + a[2][2] + a[3][3]; }

// Monic characteristic polynomial of A:
//   det(lambda I - A) = lambda^4 + c[3] lambda^3 + c[2] lambda^2 + c[1] lambda + c[0].
// Faddeev-LeVerrier: M_1 = A, a_k = tr(M_k)/k, M_{k+1} = A (M_k - a_k I);
// the coefficients are lambda^{n-k} |-> -a_k alternating per the recurrence.
inline std::array<double, 4> char_poly(const mat4& a) {
    mat4 m = a;
    std::array<double, 4> c{}; // c[3] is the lambda^3 coefficient
    double ak = trace(m) / 1.0;
    c[3] = -ak;
    for (int k = 2; k <= 4; ++k) {
        mat4 shifted = m;
        for (int i = 0; i < 4; ++i) shifted[i][i] -= ak;
        m = matmul(a, shifted);
        ak = trace(m) / k;
        c[4 - k] = -ak;
    }
    return c;
}

inline cplx poly_eval(const std::array<double, 4>& c, cplx x) {
    // Horner on lambda^4 + c3 x^3 + c2 x^2 + c1 x + c0
    cplx v = x + c[3];
    v = v * x + c[2];
    v = v * x + c[1];
    v = v * x + c[0];
    return v;
}

inline cplx poly_deriv(const std::array<double, 4>& c, cplx x) {
    cplx v = 4.0 * x + 3.0 * c[3];
    v = v * x + 2.0 * c[2];
    v = v * x + c[1];
    return v;
}

// All four roots of the monic quartic, via Durand-Kerner followed by a few
// Newton steps per root.
inline std::array<cplx, 4> quartic_roots(const std::array<double, 4>& c) {
    double scale = 1.0;
    for (double ci : c) scale = std::max(scale, std::fabs(ci));
    std::array<cplx, 4> r;
    const cplx seed(0.4, 0.9); // standard non-real seed, avoids symmetry traps
    cplx pw(1.0, 0.0);
    for (int i = 0; i < 4; ++i) {
        pw *= seed;
        r[i] = pw * (1.0 + scale);
    }
    for (int it = 0; it < 200; ++it) {
        double moved = 0.0;
        for (int i = 0; i < 4; ++i) {
            cplx denom(1.0, 0.0);
            for (int j = 0; j < 4; ++j)
                if (j != i) denom *= (r[i] - r[j]);
            const cplx delta = poly_eval(c, r[i]) / denom;
            r[i] -= delta;
            moved = std::max(moved, std::abs(delta));
        }
        if (moved < 1e-15 * (1.0 + scale)) break;
    }
    for (int i = 0; i < 4; ++i) { // quadratic-convergence polish
        for (int it = 0; it < 4; ++it) {
            const cplx d = poly_deriv(c, r[i]);
            if (std::abs(d) == 0.0) break;
            r[i] -= poly_eval(c, r[i]) / d;
        }
    }
    return r;
}

// Distance from x to the nearest of the four roots (complex modulus).
inline double nearest_root_distance(const std::array<cplx, 4>& roots, double x) {
    double best = std::abs(roots[0] - cplx(x, 0.0));
    for (int i = 1; i < 4; ++i) best = std::min(best, std::abs(roots[i] - cplx(x, 0.0)));
    return best;
}

} // namespace oracle
