#pragma once

// Rayleigh-quotient machinery on the logarithmic chart.  The interior change
// of variables turns the weighted quadratic integral into a constant-
// coefficient form,
//
//   int_B |x|^alpha (Delta u)^2 dx      = omega_N int (w''^2 + 2 delta_tilde w'^2 + delta w^2) dt,
//   int_B |x|^l |u|^q dx                = omega_N int e^{-q_* t} |w|^q dt,
//
// on the half line t in (-ln R, infinity).  This header truncates the line to
// a finite window, discretizes both forms, minimizes the associated quotient,
// and computes the first eigenpair of the linear operator behind the
// quadratic form.
//
// The stiffness matrix is assembled in factored form.  With
//
//   L w = w'' + (alpha - 2) w' - gamma_alpha w
//
// (so that z = -L w is the chart image of v = -r^alpha Delta u), the
// quadratic integral is exactly the v-side volume integral,
//
//   int_B |x|^alpha (Delta u)^2 dx = omega_N int r^{N-alpha-1} v^2 dr
//                                  = omega_N int (L w)^2 dt,
//
// an identity with no boundary conditions attached.  Expanding the square
// and integrating the cross terms by parts recovers the direct integrand:
//
//   int (L w)^2 dt = int (w''^2 + 2 delta_tilde w'^2 + delta w^2) dt
//                    + (alpha - 2) [w'^2] - 2 gamma_alpha [w w'] - (alpha - 2) gamma_alpha [w^2]
//
// (delta = gamma_alpha^2 and (alpha - 2)^2 + 2 gamma_alpha = 2 delta_tilde),
// so the two agree when w and w' both vanish at the window ends, but differ
// by (alpha - 2) w'(t_min)^2 on profiles that merely satisfy u(R) = 0 with a
// nonzero normal derivative.  The factored form keeps the physical meaning
// in that case, which is why it is the one discretized here: K = h L_h^T L_h
// with L_h the centered tridiagonal stencil of L and only the essential
// boundary values w = 0 eliminated at the window ends.  Stationary vectors
// then satisfy the natural condition L w = 0, i.e. Delta u = 0 on the
// sphere, the same boundary condition the shooting and collocation solvers
// impose.  L_h is strictly diagonally dominant (gamma_alpha > 0 for
// admissible parameters), hence nonsingular, so K is symmetric positive
// definite by construction.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "banded.hpp"
#include "errors.hpp"
#include "exponents.hpp"
#include "transform.hpp"

namespace henonlab {

// ------------------------------------------------------------------- grids

// Uniform window [t_min, t_max], n nodes including both boundary nodes.
// For the ball B_R the left end is t_min = -ln R.
struct Grid1D {
    double t_min = 0.0;
    double t_max = 0.0;
    int n = 0;
    double spacing = 0.0; // uniform step h = (t_max - t_min)/(n - 1)
};

inline Grid1D make_grid(double t_min, double t_max, int n) {
    Grid1D g;
    g.t_min = t_min;
    g.t_max = t_max;
    g.n = n;
    g.spacing = (n > 1) ? (t_max - t_min) / (n - 1) : 0.0;
    return g;
}

inline void validate(const Grid1D& g) {
    if (!(std::isfinite(g.t_min) && std::isfinite(g.t_max) && g.t_min < g.t_max))
        throw validation_error("grid: need finite t_min < t_max");
    if (g.n < 16)
        throw validation_error("grid: resolution too coarse, need at least 16 nodes");
    if (!(g.t_max - g.t_min >= 10.0))
        throw validation_error("grid: truncation window too short, need t_max - t_min >= 10");
    const double h = (g.t_max - g.t_min) / (g.n - 1);
    if (!(std::fabs(g.spacing - h) <= 1e-12 * h))
        throw validation_error("grid: spacing does not equal (t_max - t_min)/(n - 1)");
}

// -------------------------------------------------------------------- forms

// Discrete quadratic and mass forms on the n - 2 interior nodes of a window.
struct DiscreteOperator {
    Grid1D grid;
    double q = 2.0;      // exponent of the mass form
    double q_star = 0.0; // weight decay rate; 0 exactly at the critical q = p_s + 1
    SymBanded stiffness; // K = h L_h^T L_h, pentadiagonal, positive definite
    std::vector<double> mass_q; // trapezoid weights h e^{-q_* t_i}, all > 0
};

namespace detail {

// Row coefficients of the centered tridiagonal stencil of
// L w = w'' + (alpha - 2) w' - gamma_alpha w on a uniform step h.
struct ChartStencil {
    double sub, diag, sup;
};

inline ChartStencil chart_stencil(const ProblemParams& prm, double h) {
    const DerivedExponents d = derive_exponents(prm);
    const double c = prm.alpha - 2.0;
    ChartStencil s;
    s.sub = 1.0 / (h * h) - c / (2.0 * h);
    s.diag = -2.0 / (h * h) - d.gamma_alpha;
    s.sup = 1.0 / (h * h) + c / (2.0 * h);
    return s;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

} // namespace detail

inline DiscreteOperator assemble_forms(const ProblemParams& prm, const Grid1D& grid, double q) {
    validate(prm);
    validate(grid);
    const DerivedExponents d = derive_exponents(prm);
    if (!(q >= 1.0 && q <= d.p_s + 1.0))
        throw validation_error("assemble_forms: q must lie in [1, p_s + 1]");

    const int m = grid.n - 2;
    const double h = grid.spacing;
    const detail::ChartStencil L = detail::chart_stencil(prm, h);

    DiscreteOperator op;
    op.grid = grid;
    op.q = q;
    op.q_star = q_star(prm, q);
    op.stiffness = SymBanded(m, 2);

    // K = h L^T L band by band.  Rows of L are clipped at the window ends,
    // where the eliminated boundary values vanish; the band products below
    // are exact, so K is bitwise symmetric simply because only the lower
    // band is ever stored.
    const double aa = L.sub * L.sub, bb = L.diag * L.diag, ee = L.sup * L.sup;
    for (int i = 0; i < m; ++i) {
        double s = bb;
        if (i > 0) s += ee;     // row i-1 reaches node i through its sup entry
        if (i + 1 < m) s += aa; // row i+1 reaches node i through its sub entry
        op.stiffness.at(0, i) = h * s;
    }
    for (int i = 0; i + 1 < m; ++i) op.stiffness.at(1, i) = h * L.diag * (L.sub + L.sup);
    for (int i = 0; i + 2 < m; ++i) op.stiffness.at(2, i) = h * L.sub * L.sup;

    op.mass_q.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        const double t = grid.t_min + (i + 1) * h;
        op.mass_q[static_cast<std::size_t>(i)] = h * std::exp(-op.q_star * t);
    }
    return op;
}

// --------------------------------------------------------- result packaging

namespace detail {

// Interior coefficient vector -> full-window chart profile.  The sign is
// flipped so the maximum-magnitude node is positive and the amplitude scaled
// so the sup is 1 (deterministic output).  The companion z = -L w is the
// chart image of v = -r^alpha Delta u and vanishes at the ends (the natural
// boundary condition of the factored form); derivative columns are centered
// differences, one-sided at the ends.
inline TransformedProfile chart_profile(const ProblemParams& prm, const Grid1D& g,
                                        std::vector<double> x) {
    const std::size_t n = static_cast<std::size_t>(g.n);
    const double h = g.spacing;

    double amp = 0.0;
    for (double xi : x)
        if (std::fabs(xi) > std::fabs(amp)) amp = xi;
    if (amp != 0.0)
        for (double& xi : x) xi /= amp;

    TransformedProfile tp;
    tp.chart = ChartKind::interior;
    tp.params = prm;
    tp.t.resize(n);
    tp.w.assign(n, 0.0);
    tp.dw.resize(n);
    tp.z.assign(n, 0.0);
    tp.dz.resize(n);
    for (std::size_t i = 0; i < n; ++i) tp.t[i] = g.t_min + static_cast<double>(i) * h;
    for (std::size_t i = 0; i + 2 < n; ++i) tp.w[i + 1] = x[i];

    const ChartStencil L = chart_stencil(prm, h);
    for (std::size_t j = 1; j + 1 < n; ++j)
        tp.z[j] = -(L.sub * tp.w[j - 1] + L.diag * tp.w[j] + L.sup * tp.w[j + 1]);

    auto diff = [&](const std::vector<double>& f, std::vector<double>& df) {
        for (std::size_t j = 1; j + 1 < n; ++j) df[j] = (f[j + 1] - f[j - 1]) / (2.0 * h);
        df[0] = (f[1] - f[0]) / h;
        df[n - 1] = (f[n - 1] - f[n - 2]) / h;
    };
    diff(tp.w, tp.dw);
    diff(tp.z, tp.dz);
    return tp;
}

} // namespace detail

// ------------------------------------------------------ quotient minimization

struct RayleighResult {
    double value = 0.0; // quotient scaled to the physical form (omega_N factors included)
    TransformedProfile minimizer;
    int iterations = 0;
    Grid1D grid;
    bool critical_norm = false; // q == p_s + 1: scaling degenerates, a continuum
                                // minimizer need not exist; result is the discrete one
};

// Minimize  (w^T K w) / (sum_i m_i |w_i|^q)^{2/q}  over nonzero interior
// vectors and rescale to the physical quotient
//
//   int_B |x|^alpha (Delta u)^2 dx / (int_B |x|^l |u|^q dx)^{2/q}
//     = omega_N^{1 - 2/q} int (L w)^2 dt / (int e^{-q_* t} |w|^q dt)^{2/q}.
//
// The iteration is K-preconditioned gradient descent: at the current iterate
// (normalized to mass G = 1) the quotient gradient is 2(K w - Q g) with
// g_i = m_i |w_i|^{q-1} sgn w_i and Q = w^T K w, so the step direction
// d = Q K^{-1} g - w equals -K^{-1} grad / 2 and a unit step is the natural
// fixed-point update (for q = 2 it reproduces inverse iteration).  A
// backtracking line search keeps the quotient monotone; convergence is
// declared when the relative decrease stays below 1e-12 for 10 consecutive
// iterations.
inline RayleighResult minimize_rayleigh(const ProblemParams& prm, const Grid1D& grid, double q) {
    validate(prm);
    validate(grid);
    const DerivedExponents d = derive_exponents(prm);
    if (!(q >= 2.0 && q <= d.p_s + 1.0))
        throw validation_error("minimize_rayleigh: q must lie in [2, p_s + 1]");

    // Every admissible q has weight rate q_* >= 0 (zero exactly at the
    // critical q), so the requested window already controls the far field.
    // The widening below can only trigger if the admissible range is ever
    // relaxed to growing weights; the window actually used is reported back.
    Grid1D g = grid;
    if (q_star(prm, q) < 0.0) {
        const int extra = static_cast<int>(std::lround(10.0 / grid.spacing));
        g = make_grid(grid.t_min, grid.t_max + extra * grid.spacing, grid.n + extra);
    }

    const DiscreteOperator op = assemble_forms(prm, g, q);
    const int m = op.stiffness.size();
    const BandedCholesky chol(op.stiffness);

    // mass gradient g_i = m_i |x_i|^{q-1} sgn x_i; returns G = sum m_i |x_i|^q
    auto mass_gradient = [&](const std::vector<double>& x, std::vector<double>& grad) {
        double G = 0.0;
        for (int i = 0; i < m; ++i) {
            const std::size_t k = static_cast<std::size_t>(i);
            const double a = std::fabs(x[k]);
            const double aq1 = std::pow(a, q - 1.0);
            grad[k] = op.mass_q[k] * aq1 * (x[k] < 0.0 ? -1.0 : 1.0);
            G += op.mass_q[k] * aq1 * a;
        }
        return G;
    };

    // single (1 - cos) bump: positive, zero at the eliminated ends
    std::vector<double> x(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
        x[static_cast<std::size_t>(i)] =
            1.0 - std::cos(2.0 * std::numbers::pi * (i + 1) / (g.n - 1));

    std::vector<double> grad(x.size()), y, dvec(x.size()), xt(x.size());
    double G = mass_gradient(x, grad);
    for (double& xi : x) xi /= std::pow(G, 1.0 / q);
    double f = detail::dot(x, op.stiffness.multiply(x)); // quotient at G = 1

    const int cap = 10000;
    int used = 0, streak = 0;
    bool converged = false;
    for (int it = 0; it < cap && !converged; ++it) {
        used = it + 1;
        G = mass_gradient(x, grad); // G == 1 up to rounding; kept for the direction scale
        y = chol.solve(grad);
        for (std::size_t k = 0; k < x.size(); ++k) dvec[k] = (f / G) * y[k] - x[k];

        const std::vector<double> Kd = op.stiffness.multiply(dvec);
        const double dKd = detail::dot(dvec, Kd);
        double rel = 0.0;
        if (dKd > 0.0) {
            const double slope = -2.0 * dKd; // grad . d at the current iterate
            double eta = 1.0, ft = f;
            bool accepted = false;
            for (int ls = 0; ls < 60 && !accepted; ++ls, eta *= 0.5) {
                for (std::size_t k = 0; k < x.size(); ++k) xt[k] = x[k] + eta * dvec[k];
                std::vector<double> gt(x.size());
                const double Gt = mass_gradient(xt, gt);
                if (!(Gt > 0.0)) continue;
                ft = detail::dot(xt, op.stiffness.multiply(xt)) / std::pow(Gt, 2.0 / q);
                if (ft <= f + 1e-4 * eta * slope) {
                    rel = (f - ft) / f;
                    const double scale = std::pow(Gt, 1.0 / q);
                    for (std::size_t k = 0; k < x.size(); ++k) x[k] = xt[k] / scale;
                    f = ft;
                    accepted = true;
                }
            }
            // no acceptable step: the gradient is numerically zero, rel stays 0
        }
        streak = (rel < 1e-12) ? streak + 1 : 0;
        if (streak >= 10) converged = true;
    }

    const double omega = surface_area(prm.N);
    const double value = std::pow(omega, 1.0 - 2.0 / q) * f;
    if (!converged)
        throw solver_error("minimize_rayleigh: no convergence within " + std::to_string(cap) +
                           " iterations; best physical quotient " + std::to_string(value));

    RayleighResult res;
    res.value = value;
    res.minimizer = detail::chart_profile(prm, g, x);
    res.iterations = used;
    res.grid = g;
    res.critical_norm = (q == d.p_s + 1.0);
    return res;
}

// ------------------------------------------------------------ first eigenpair

struct SpectralResult {
    double lambda1 = 0.0;
    TransformedProfile eigenfunction;
    double residual = 0.0; // ||K x - lambda M x|| relative to the operator scale
};

// First eigenpair of K x = lambda M x with M the q = 2 mass (weight
// e^{-(4+tau) t}), by inverse power iteration with the banded Cholesky factor
// of K.  The residual is reported relative to the operator scale,
// ||K x - lambda M x|| / ((||K||_F + lambda ||M||_inf) ||x||): the raw
// residual norm grows like ||K|| ~ 6/h^3, so an absolute threshold would be
// unreachable on fine grids no matter how converged the eigenpair is.
inline SpectralResult first_eigenpair(const ProblemParams& prm, const Grid1D& grid) {
    const DiscreteOperator op = assemble_forms(prm, grid, 2.0);
    const int m = op.stiffness.size();
    const BandedCholesky chol(op.stiffness); // throws if the assembled form is not SPD

    double knorm = op.stiffness.frobenius_norm();
    double mnorm = 0.0;
    for (double w : op.mass_q) mnorm = std::max(mnorm, w);

    std::vector<double> x(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
        x[static_cast<std::size_t>(i)] =
            1.0 - std::cos(2.0 * std::numbers::pi * (i + 1) / (grid.n - 1));

    double lambda = 0.0, lambda_prev = 0.0, resid = std::numeric_limits<double>::infinity();
    int stall = 0;
    const int cap = 400;
    for (int it = 0; it < cap; ++it) {
        std::vector<double> mx(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) mx[k] = op.mass_q[k] * x[k];
        std::vector<double> y = chol.solve(mx);

        std::vector<double> my(y.size());
        for (std::size_t k = 0; k < y.size(); ++k) my[k] = op.mass_q[k] * y[k];
        const double c = detail::dot(y, my);
        if (!(c > 0.0)) throw solver_error("first_eigenpair: iterate lost mass positivity");
        const double scale = 1.0 / std::sqrt(c);
        for (std::size_t k = 0; k < y.size(); ++k) {
            y[k] *= scale;
            my[k] *= scale;
        }

        // lambda from the factored form h ||L y||^2 (with y^T M y = 1):
        // evaluating y^T K y through the assembled bands subtracts terms of
        // size 1/h^2 down to O(1) and caps the eigenvalue accuracy near
        // 1e-10 relative; the stencil sum of squares keeps one second
        // difference per entry and reaches the similarity-law tests' level.
        const detail::ChartStencil st = detail::chart_stencil(prm, grid.spacing);
        double lly = 0.0;
        for (int i = 0; i < m; ++i) {
            const double left = (i > 0) ? y[static_cast<std::size_t>(i - 1)] : 0.0;
            const double right = (i + 1 < m) ? y[static_cast<std::size_t>(i + 1)] : 0.0;
            const double ly =
                st.sub * left + st.diag * y[static_cast<std::size_t>(i)] + st.sup * right;
            lly += ly * ly;
        }
        lambda = grid.spacing * lly;

        const std::vector<double> ky = op.stiffness.multiply(y);
        double rnorm = 0.0, ynorm = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k) {
            const double ri = ky[k] - lambda * my[k];
            rnorm += ri * ri;
            ynorm += y[k] * y[k];
        }
        resid = std::sqrt(rnorm) / ((knorm + lambda * mnorm) * std::sqrt(ynorm));
        x = y;
        // The certificate only needs 1e-10, but at that level the eigenvalue
        // still carries ~1e-10 relative error; a couple of extra contraction
        // steps pin it to machine precision, which the similarity laws use.
        if (resid < 1e-14) break;
        if (resid < 1e-11 && std::fabs(lambda - lambda_prev) <= 4e-16 * std::fabs(lambda)) {
            if (++stall >= 3) break; // residual floor reached, value stationary
        } else {
            stall = 0;
        }
        lambda_prev = lambda;
    }
    if (!(resid < 1e-10))
        throw solver_error("first_eigenpair: inverse iteration stalled at relative residual " +
                           std::to_string(resid));

    SpectralResult res;
    res.lambda1 = lambda;
    res.eigenfunction = detail::chart_profile(prm, grid, x);
    res.residual = resid;
    return res;
}

} // namespace henonlab
