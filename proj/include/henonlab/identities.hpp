#pragma once

// Integral identities and pointwise residuals on radial profiles: the
// Rellich-Pohozaev balance between a coefficient-weighted volume integral of
// |u|^{p+1} and a five-term surface expression, the energy functional
//   J(u) = (1/2) int |x|^alpha (Delta u)^2 - 1/(p+1) int |x|^l |u|^{p+1}
// with its Nehari gap, and a finite-difference residual of the radial system.
// All volume integrals reduce to 1D quadrature against the area factor
// omega_N r^{N-1}; Delta u is substituted by -r^{-alpha} v throughout.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "errors.hpp"
#include "exponents.hpp"
#include "transform.hpp"

namespace henonlab {

struct PohozaevReport {
    double lhs = 0.0;               // coefficient x volume integral
    double rhs = 0.0;               // surface expression at R
    double residual = 0.0;          // |lhs - rhs|
    double relative_residual = 0.0; // residual / max(|lhs|, |rhs|, floor)
    double R = 0.0;
};

struct EnergyReport {
    double value = 0.0;      // J = quadratic/2 - nonlinear/(p+1)
    double quadratic = 0.0;  // int |x|^alpha (Delta u)^2 = omega int r^{N-1-alpha} v^2
    double nonlinear = 0.0;  // int |x|^l |u|^{p+1}   = omega int r^{N+l-1} |u|^{p+1}
    double nehari_gap = 0.0; // quadratic - nonlinear; zero on weak solutions
    double R = 0.0;
};

namespace detail {

inline void require_coverage(const RadialProfile& prof, double R, const char* who) {
    validate(prof);
    if (!(R > 0.0)) throw validation_error(std::string(who) + ": R must be > 0");
    if (!(prof.r.front() < R) || prof.r.back() < R * (1.0 - 1e-12))
        throw validation_error(std::string(who) + ": profile does not cover (0, R]");
}

// (u, du, v, dv) at radius R by linear interpolation between bracketing nodes.
inline std::array<double, 4> values_at(const RadialProfile& prof, double R) {
    const auto& r = prof.r;
    auto hi = std::lower_bound(r.begin(), r.end(), R);
    if (hi == r.end()) --hi; // R == r.back() up to roundoff
    if (hi == r.begin()) ++hi;
    const std::size_t j = static_cast<std::size_t>(hi - r.begin());
    const std::size_t i = j - 1;
    const double s = (R - r[i]) / (r[j] - r[i]);
    auto lerp = [&](const std::vector<double>& f) { return f[i] + s * (f[j] - f[i]); };
    return {lerp(prof.u), lerp(prof.du), lerp(prof.v), lerp(prof.dv)};
}

// int_0^R r^{k-1} g(r) dr with g sampled at the profile nodes: the cell
// [0, r_0] is done analytically with g frozen at g_0 (k > 0 makes the
// integrand vanish at the origin), interior cells by the trapezoid rule, and
// the last partial cell ends exactly at R with g interpolated.
template <typename G>
double weighted_volume_integral(const RadialProfile& prof, double R, double k, G&& g) {
    const auto& r = prof.r;
    const double R_eff = std::min(R, r.back());
    double acc = std::pow(r[0], k) / k * g(0);
    auto f = [&](std::size_t i) { return std::pow(r[i], k - 1.0) * g(i); };
    std::size_t i = 0;
    for (; i + 1 < r.size() && r[i + 1] <= R_eff; ++i)
        acc += 0.5 * (r[i + 1] - r[i]) * (f(i) + f(i + 1));
    if (i + 1 < r.size() && r[i] < R_eff) {
        const double s = (R_eff - r[i]) / (r[i + 1] - r[i]);
        const double g_R = g(i) + s * (g(i + 1) - g(i));
        acc += 0.5 * (R_eff - r[i]) * (f(i) + std::pow(R_eff, k - 1.0) * g_R);
    }
    return acc;
}

} // namespace detail

// Rellich-Pohozaev balance on the ball B_R.  The volume side is
//   pohozaev_coefficient x omega_N int_0^R r^{N+l-1} |u|^{p+1} dr,
// the surface side collects the five boundary terms of the identity after
// radial reduction (d sigma_R = omega_N R^{N-1}, grad u . grad v = u'v').
inline PohozaevReport pohozaev_check(const ProblemParams& prm, const RadialProfile& prof,
                                     double R) {
    validate(prm);
    detail::require_coverage(prof, R, "pohozaev_check");
    const DerivedExponents d = derive_exponents(prm);
    const double omega = surface_area(prm.N);

    const double volume = detail::weighted_volume_integral(
        prof, R, prm.N + prm.l,
        [&](std::size_t i) { return std::pow(std::fabs(prof.u[i]), prm.p + 1.0); });

    PohozaevReport rep;
    rep.R = R;
    rep.lhs = pohozaev_coefficient(prm) * omega * volume;

    const auto [u, du, v, dv] = detail::values_at(prof, R);
    // Five surface terms at r = R:
    const double s1 = std::pow(R, prm.l + 1.0) * std::pow(std::fabs(u), prm.p + 1.0) /
                      (prm.p + 1.0);                       // weight-shifted nonlinear flux
    const double s2 = std::pow(R, 1.0 - prm.alpha) * v * v / 2.0; // v^2 flux
    const double s3 = R * du * dv;                         // 2R u'v' - R grad u . grad v
    const double s4 = 0.5 * (prm.N - prm.alpha) * v * du;  // v times normal derivative of u
    const double s5 = 0.5 * (d.Nprime - 4.0) * u * dv;     // u times normal derivative of v
    rep.rhs = omega * std::pow(R, prm.N - 1.0) * (s1 + s2 + s3 + s4 + s5);

    rep.residual = std::fabs(rep.lhs - rep.rhs);
    rep.relative_residual =
        rep.residual / std::max({std::fabs(rep.lhs), std::fabs(rep.rhs), 1e-300});
    return rep;
}

// Energy J on B_R plus the Nehari gap (testing the weak form with u itself):
// both vanish on the zero profile, and the gap vanishes on weak solutions.
inline EnergyReport energy(const ProblemParams& prm, const RadialProfile& prof, double R) {
    validate(prm);
    detail::require_coverage(prof, R, "energy");
    const double omega = surface_area(prm.N);

    EnergyReport rep;
    rep.R = R;
    rep.quadratic =
        omega * detail::weighted_volume_integral(prof, R, prm.N - prm.alpha, [&](std::size_t i) {
            return prof.v[i] * prof.v[i];
        });
    rep.nonlinear =
        omega * detail::weighted_volume_integral(prof, R, prm.N + prm.l, [&](std::size_t i) {
            return std::pow(std::fabs(prof.u[i]), prm.p + 1.0);
        });
    rep.value = 0.5 * rep.quadratic - rep.nonlinear / (prm.p + 1.0);
    rep.nehari_gap = rep.quadratic - rep.nonlinear;
    return rep;
}

namespace detail {

// Fornberg's recursion: weights of the k-th derivative (k = 0..m) at x0 from
// samples at xs[0..n-1].  Returns the first- and second-derivative rows.
inline void fornberg_weights_12(double x0, const double* xs, int n, double* w1, double* w2) {
    constexpr int kmax = 2;
    double C[8][kmax + 1] = {};
    double c1 = 1.0, c4 = xs[0] - x0;
    C[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, kmax);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = xs[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = xs[i] - xs[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    C[i][k] = c1 * (k * C[i - 1][k - 1] - c5 * C[i - 1][k]) / c2;
                C[i][0] = -c1 * c5 * C[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) C[j][k] = (c4 * C[j][k] - k * C[j][k - 1]) / c3;
            C[j][0] = c4 * C[j][0] / c3;
        }
        c1 = c2;
    }
    for (int j = 0; j < n; ++j) {
        w1[j] = C[j][1];
        w2[j] = C[j][2];
    }
}

} // namespace detail

// Sup over interior nodes of the finite-difference residuals of the radial
// system, each normalized by the sum of its term magnitudes:
//   u'' + ((N-1)/r) u' + r^{-alpha} v          = 0
//   v'' + ((N-1)/r) v' + r^{l} |u|^{p-1} u     = 0
// Derivatives come from 5-point stencils on the stored nodes (the stored du,
// dv columns are deliberately not consulted: the residual certifies the u, v
// samples as functions of r).
inline double pde_residual(const ProblemParams& prm, const RadialProfile& prof) {
    validate(prm);
    validate(prof);
    const std::size_t n = prof.size();
    if (n < 5) throw validation_error("pde_residual: needs at least 5 nodes");

    const double N1 = prm.N - 1.0;
    double worst = 0.0;
    double w1[5], w2[5];
    for (std::size_t i = 2; i + 2 < n; ++i) {
        const double* xs = prof.r.data() + (i - 2);
        const double r = prof.r[i];
        detail::fornberg_weights_12(r, xs, 5, w1, w2);
        double u1 = 0.0, u2 = 0.0, v1 = 0.0, v2 = 0.0;
        for (int j = 0; j < 5; ++j) {
            u1 += w1[j] * prof.u[i - 2 + j];
            u2 += w2[j] * prof.u[i - 2 + j];
            v1 += w1[j] * prof.v[i - 2 + j];
            v2 += w2[j] * prof.v[i - 2 + j];
        }
        const double fu = std::pow(r, -prm.alpha) * prof.v[i];
        const double fv = std::pow(r, prm.l) *
                          std::copysign(std::pow(std::fabs(prof.u[i]), prm.p), prof.u[i]);
        const double e1 = u2 + (N1 / r) * u1 + fu;
        const double e2 = v2 + (N1 / r) * v1 + fv;
        const double m1 = std::fabs(u2) + std::fabs((N1 / r) * u1) + std::fabs(fu);
        const double m2 = std::fabs(v2) + std::fabs((N1 / r) * v1) + std::fabs(fv);
        worst = std::max(worst, std::fabs(e1) / std::max(m1, 1e-300));
        worst = std::max(worst, std::fabs(e2) / std::max(m2, 1e-300));
    }
    return worst;
}

} // namespace henonlab
