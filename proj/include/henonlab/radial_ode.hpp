#pragma once

// Radial initial-value integration, entire-trajectory classification, and the
// Navier ball problem by shooting.
//
// Physical chart (r > 0), state (u, u', v, v'):
//     u'' = -((N-1)/r) u' - r^{-alpha} v
//     v'' = -((N-1)/r) v' - r^{l} |u|^{p-1} u
// Interior chart (t = -ln r), state (w, w', z, z'), Q = (N-alpha)(N'-4)/4:
//     w'' = Q w - (alpha-2) w' - z
//     z'' = Q z + (alpha-2) z' - e^{-p_* t} |w|^{p-1} w
// Exterior chart (t = ln r, alpha = 2), sigma = (N-2)/2:
//     w'' = sigma^2 w - z,   z'' = sigma^2 z - e^{p^* t} |w|^{p-1} w
//
// For alpha >= 2 a start at r = 0 is ill-posed in the physical chart
// (u' ~ r^{1-alpha} is non-integrable), so trajectories are seeded deep in
// the interior chart on the decaying eigenmodes of the linearization: the
// amplitude pair (a, b) selects the w-mode (eigenvalue -(N'-4)/2) and the
// z-mode (eigenvalue -(N-alpha)/2).  At alpha = 2 the two eigenvalues merge
// and the z-mode is replaced by the Jordan generalized mode, so u grows like
// -ln r while v still tends to b.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dopri5.hpp"
#include "errors.hpp"
#include "exponents.hpp"
#include "transform.hpp"

namespace henonlab {

struct OdeState {
    ChartKind chart = ChartKind::physical;
    double x = 0.0;            // r in the physical chart, t otherwise
    std::array<double, 4> y{}; // (u, u', v, v') or (w, w', z, z')
    bool series_warning = false;
};

enum class TrajectoryKind { positive_on_window, u_crossed_zero, v_crossed_zero, blow_up };

inline const char* to_string(TrajectoryKind k) {
    switch (k) {
        case TrajectoryKind::positive_on_window: return "PositiveOnWindow";
        case TrajectoryKind::u_crossed_zero: return "UCrossedZero";
        case TrajectoryKind::v_crossed_zero: return "VCrossedZero";
        case TrajectoryKind::blow_up: return "BlowUp";
    }
    return "?";
}

struct TrajectoryOutcome {
    TrajectoryKind kind = TrajectoryKind::positive_on_window;
    std::optional<double> location; // radius of the event; empty for PositiveOnWindow
    RadialProfile profile;
};

struct BvpSolution {
    RadialProfile profile;   // on (0, R]
    double center_u = 0.0;   // u(0) limit (mode amplitude for alpha >= 2)
    double center_v = 0.0;   // v(0) limit
    double shooting_parameter = 0.0; // b* = v(0) before rescaling, at u(0) = 1
    double residual_u = 0.0; // |u(R)|
    double residual_v = 0.0; // |v(R)|
};

struct ScanRow {
    double p = 0.0, b = 0.0;
    TrajectoryKind kind = TrajectoryKind::positive_on_window;
    std::optional<double> location;
};

struct ScanReport {
    std::vector<ScanRow> rows;
    std::size_t n_positive = 0;            // PositiveOnWindow count
    std::size_t n_positive_subcritical = 0; // ... of those with p < p_s
    double fraction_positive = 0.0;
};

// ------------------------------------------------------------------- vector field

inline std::array<double, 4> rhs(const ProblemParams& prm, ChartKind chart, double x,
                                 const std::array<double, 4>& y) {
    const DerivedExponents d = derive_exponents(prm);
    const double N1 = prm.N - 1.0;
    auto sgnpow = [&](double u) { return std::copysign(std::pow(std::fabs(u), prm.p), u); };
    switch (chart) {
        case ChartKind::physical: {
            if (!(x > 0.0)) throw validation_error("rhs: physical chart requires r > 0");
            return {y[1], -(N1 / x) * y[1] - std::pow(x, -prm.alpha) * y[2], y[3],
                    -(N1 / x) * y[3] - std::pow(x, prm.l) * sgnpow(y[0])};
        }
        case ChartKind::interior: {
            const double Q = 0.25 * (prm.N - prm.alpha) * (d.Nprime - 4.0);
            const double c = prm.alpha - 2.0;
            return {y[1], Q * y[0] - c * y[1] - y[2], y[3],
                    Q * y[2] + c * y[3] - std::exp(-d.p_star * x) * sgnpow(y[0])};
        }
        case ChartKind::exterior: {
            if (prm.alpha != 2.0) throw validation_error("exterior chart requires alpha == 2");
            const double sg2 = 0.25 * (prm.N - 2.0) * (prm.N - 2.0);
            return {y[1], sg2 * y[0] - y[2], y[3],
                    sg2 * y[2] - std::exp(d.p_upper_star * x) * sgnpow(y[0])};
        }
    }
    throw validation_error("rhs: unknown chart");
}

inline std::array<double, 4> rhs(const ProblemParams& prm, const OdeState& st) {
    return rhs(prm, st.chart, st.x, st.y);
}

// --------------------------------------------------------------------- series start

// Two-term expansion at small r0 (alpha < 2 only):
//     u  = a - b r0^{2-alpha}/((2-alpha)(N-alpha)) + O(r0^{4-alpha+min(0,l)})
//     v  = b - a^p r0^{2+l}/((2+l)(N+l))           + O(r0^{4+2l-...})
// obtained by integrating the flux forms -(r^{N-1}u')' = r^{N-alpha-1}v and
// -(r^{N-1}v')' = r^{N+l-1}u^p once with u ~ a, v ~ b frozen.
inline OdeState series_start(const ProblemParams& prm, double a, double b, double r0) {
    validate(prm);
    if (prm.alpha >= 2.0)
        throw validation_error(
            "series_start: alpha >= 2 has no physical-chart start (use transformed-chart seeding)");
    if (!(a >= 0.0)) throw validation_error("series_start: a must be >= 0");
    if (!(r0 > 0.0)) throw validation_error("series_start: r0 must be > 0");

    const double N = prm.N, alpha = prm.alpha, l = prm.l;
    const double ap = std::pow(a, prm.p);
    OdeState st;
    st.chart = ChartKind::physical;
    st.x = r0;
    st.y[0] = a - b * std::pow(r0, 2.0 - alpha) / ((2.0 - alpha) * (N - alpha));
    st.y[1] = -b * std::pow(r0, 1.0 - alpha) / (N - alpha);
    st.y[2] = b - ap * std::pow(r0, 2.0 + l) / ((2.0 + l) * (N + l));
    st.y[3] = -ap * std::pow(r0, 1.0 + l) / (N + l);
    if (b != 0.0)
        st.series_warning =
            std::pow(r0, 2.0 - alpha) > 0.01 * (2.0 - alpha) * (N - alpha) * a / std::fabs(b);
    return st;
}

// ------------------------------------------------------------------ raw integration

namespace detail {

inline OdeResult<4> run_chart(const ProblemParams& prm, ChartKind chart, double x0,
                              const std::array<double, 4>& y0, double x1, double rtol, double atol,
                              bool with_events, bool store_steps,
                              const std::vector<double>& samples = {}) {
    const DerivedExponents d = derive_exponents(prm);
    const double N1 = prm.N - 1.0;
    const double Q = 0.25 * (prm.N - prm.alpha) * (d.Nprime - 4.0);
    const double c = prm.alpha - 2.0;
    const double sg2 = 0.25 * (prm.N - 2.0) * (prm.N - 2.0);
    const double p = prm.p;
    auto sgnpow = [p](double u) { return std::copysign(std::pow(std::fabs(u), p), u); };

    auto deriv = [&](double x, const std::array<double, 4>& y, std::array<double, 4>& dy) {
        switch (chart) {
            case ChartKind::physical:
                dy[0] = y[1];
                dy[1] = -(N1 / x) * y[1] - std::pow(x, -prm.alpha) * y[2];
                dy[2] = y[3];
                dy[3] = -(N1 / x) * y[3] - std::pow(x, prm.l) * sgnpow(y[0]);
                break;
            case ChartKind::interior:
                dy[0] = y[1];
                dy[1] = Q * y[0] - c * y[1] - y[2];
                dy[2] = y[3];
                dy[3] = Q * y[2] + c * y[3] - std::exp(-d.p_star * x) * sgnpow(y[0]);
                break;
            case ChartKind::exterior:
                dy[0] = y[1];
                dy[1] = sg2 * y[0] - y[2];
                dy[2] = y[3];
                dy[3] = sg2 * y[2] - std::exp(d.p_upper_star * x) * sgnpow(y[0]);
                break;
        }
    };

    OdeOptions<4> opt;
    opt.rtol = rtol;
    opt.atol = atol;
    opt.store_steps = store_steps;

    std::vector<OdeEvent<4>> events;
    if (with_events) {
        events.push_back({[](double, const std::array<double, 4>& y) { return y[0]; }, "u"});
        events.push_back({[](double, const std::array<double, 4>& y) { return y[2]; }, "v"});
    }
    return integrate_dopri5<4>(deriv, x0, y0, x1, opt, events, samples);
}

// Physical-chart profile out of a chart-space run (nodes reordered to increasing r).
inline RadialProfile profile_from_run(const ProblemParams& prm, ChartKind chart,
                                      const std::vector<double>& xs,
                                      const std::vector<std::array<double, 4>>& ys) {
    RadialProfile prof;
    prof.params = prm;
    prof.origin = ProfileOrigin::shot;
    const std::size_t n = xs.size();
    prof.r.reserve(n);
    prof.u.reserve(n);
    prof.du.reserve(n);
    prof.v.reserve(n);
    prof.dv.reserve(n);
    // order nodes by increasing radius: interior-chart t decreases as r grows
    const bool flip = (n >= 2) && (chart == ChartKind::interior ? xs.front() < xs.back()
                                                                : xs.front() > xs.back());
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = flip ? n - 1 - k : k;
        double r, u, du, v, dv;
        if (chart == ChartKind::physical) {
            r = xs[i];
            u = ys[i][0];
            du = ys[i][1];
            v = ys[i][2];
            dv = ys[i][3];
        } else {
            const auto ph =
                chart_point_to_physical(prm, chart, xs[i], ys[i][0], ys[i][1], ys[i][2], ys[i][3]);
            r = ph[0];
            u = ph[1];
            du = ph[2];
            v = ph[3];
            dv = ph[4];
        }
        if (!prof.r.empty() && !(r > prof.r.back() * (1.0 + 1e-15))) continue; // drop duplicates
        prof.r.push_back(r);
        prof.u.push_back(u);
        prof.du.push_back(du);
        prof.v.push_back(v);
        prof.dv.push_back(dv);
    }
    return prof;
}

// Seed state for alpha >= 2: decaying eigenmodes of the interior-chart
// linearization at large t.  For alpha > 2 the z-mode is (1, -m, g, -m g)
// with g = 2m(alpha-2); for alpha = 2 the Jordan pair (e, g) gives
// y(t) = e^{-st}[(a + (b/(N-2)) t) e + (b/(N-2)) g], g = (0, 1, N-2, -(N-2)^2/2).
// Valid only when the nonlinear forcing decays (p_* > 0 <=> p < p_s).
inline OdeState chart_seed(const ProblemParams& prm, double a, double b, double t0) {
    const DerivedExponents d = derive_exponents(prm);
    if (!(d.p_star > 0.0))
        throw validation_error(
            "transformed-chart seeding requires p < p_s (decaying nonlinear forcing)");
    const double s = 0.5 * (d.Nprime - 4.0);
    const double m = 0.5 * (prm.N - prm.alpha);
    OdeState st;
    st.chart = ChartKind::interior;
    st.x = t0;
    if (prm.alpha == 2.0) {
        const double bt = b / (prm.N - 2.0);
        const double es = std::exp(-s * t0);
        st.y[0] = es * (a + bt * t0);
        st.y[1] = es * (-s * (a + bt * t0) + bt);
        st.y[2] = es * bt * (prm.N - 2.0);
        st.y[3] = es * bt * (-0.5 * (prm.N - 2.0) * (prm.N - 2.0));
    } else {
        const double g = 2.0 * m * (prm.alpha - 2.0);
        const double A = a * std::exp(-s * t0);
        const double B = (b / g) * std::exp(-m * t0);
        st.y[0] = A + B;
        st.y[1] = -s * A - m * B;
        st.y[2] = B * g;
        st.y[3] = -m * B * g;
    }
    return st;
}

inline void check_tol(double tol) {
    if (!(tol >= 1e-13 && tol <= 1e-3))
        throw validation_error("tol must lie in [1e-13, 1e-3]");
}

} // namespace detail

// Integrate from `init` to coordinate `x_to` in init's chart.  Events u = 0,
// v = 0 (w/z in transformed charts) and the blow-up guard stop the run early;
// the returned physical profile holds all accepted steps plus the event point.
// If `sample_at` is nonempty the profile holds exactly those locations
// (coordinates of init's chart, ordered along the integration direction).
inline RadialProfile integrate(const ProblemParams& prm, const OdeState& init, double x_to,
                               double tol = 1e-10, const std::vector<double>& sample_at = {}) {
    validate(prm);
    detail::check_tol(tol);
    if (x_to == init.x) throw validation_error("integrate: span must have positive length");
    if (init.chart == ChartKind::physical && !(init.x > 0.0 && x_to > 0.0))
        throw validation_error("integrate: physical chart requires r > 0");
    for (double c : init.y)
        if (!std::isfinite(c)) throw validation_error("integrate: non-finite initial state");

    const bool want_samples = !sample_at.empty();
    auto res = detail::run_chart(prm, init.chart, init.x, init.y, x_to, tol, 0.01 * tol,
                                 /*with_events=*/true, /*store_steps=*/!want_samples, sample_at);
    if (res.status == OdeStatus::stepsize_underflow || res.status == OdeStatus::step_limit) {
        std::ostringstream os;
        os << "integrate: step-size underflow (stiffness) at x = " << res.x_final << ", state = ("
           << res.y_final[0] << ", " << res.y_final[1] << ", " << res.y_final[2] << ", "
           << res.y_final[3] << ")";
        throw solver_error(os.str());
    }
    if (want_samples) return detail::profile_from_run(prm, init.chart, res.x_sampled, res.y_sampled);
    return detail::profile_from_run(prm, init.chart, res.x, res.y);
}

namespace detail {

inline TrajectoryOutcome classify_impl(const ProblemParams& prm, double a, double b, double r_max,
                                       double tol, bool store_profile) {
    validate(prm);
    check_tol(tol);
    if (!(a >= 0.0)) throw validation_error("classify_trajectory: a must be >= 0");
    if (!(r_max > 0.0)) throw validation_error("classify_trajectory: r_max must be > 0");

    const bool physical_start = prm.alpha < 2.0;

    // Sign bookkeeping at the start: v(0) = b < 0 means v has already crossed
    // at the center; with b = 0 and a > 0 the positive forcing pushes v
    // negative immediately (v' < 0 from v(0) = 0); with a = 0, b > 0 and
    // alpha < 2 the same happens to u.  All are events at r = 0.
    auto stub = [&](TrajectoryKind kind) {
        TrajectoryOutcome out;
        out.kind = kind;
        out.location = 0.0;
        const double r0 = std::min(1e-5, 1e-3 * r_max);
        if (physical_start) {
            auto s0 = series_start(prm, a, std::max(b, 0.0), r0);
            auto s1 = series_start(prm, a, std::max(b, 0.0), 2.0 * r0);
            out.profile.params = prm;
            out.profile.origin = ProfileOrigin::shot;
            out.profile.r = {s0.x, s1.x};
            out.profile.u = {s0.y[0], s1.y[0]};
            out.profile.du = {s0.y[1], s1.y[1]};
            out.profile.v = {s0.y[2], s1.y[2]};
            out.profile.dv = {s0.y[3], s1.y[3]};
        } else {
            const double t0 = 12.0 + std::log1p(std::fabs(a) + std::fabs(b));
            auto s0 = chart_seed(prm, a, std::max(b, 0.0), t0);
            auto s1 = chart_seed(prm, a, std::max(b, 0.0), t0 - 0.5);
            out.profile = profile_from_run(prm, ChartKind::interior, {s0.x, s1.x},
                                           {s0.y, s1.y});
        }
        return out;
    };
    if (b < 0.0) return stub(TrajectoryKind::v_crossed_zero);
    if (b == 0.0 && a > 0.0) return stub(TrajectoryKind::v_crossed_zero);
    if (a == 0.0 && b > 0.0 && physical_start) return stub(TrajectoryKind::u_crossed_zero);

    OdeState st;
    double x_to;
    if (physical_start) {
        const double r0 = std::min(1e-5, 1e-3 * r_max);
        st = series_start(prm, a, b, r0);
        x_to = r_max;
    } else {
        // seed deep enough that the nonlinear forcing is negligible and the
        // window endpoint r_max lies strictly outside the seed radius
        const double t0 =
            std::max(12.0 + std::log1p(std::fabs(a) + std::fabs(b)), -std::log(r_max) + 3.0);
        st = chart_seed(prm, a, b, t0);
        x_to = -std::log(r_max);
    }

    auto res = run_chart(prm, st.chart, st.x, st.y, x_to, tol, 0.01 * tol,
                         /*with_events=*/true, store_profile);
    if (res.status == OdeStatus::stepsize_underflow || res.status == OdeStatus::step_limit)
        throw solver_error("classify_trajectory: integrator stalled at x = " +
                           std::to_string(res.x_final));

    TrajectoryOutcome out;
    if (store_profile) {
        out.profile = profile_from_run(prm, st.chart, res.x, res.y);
    } else {
        out.profile.params = prm; // scans discard trajectories; keep only the params
        out.profile.origin = ProfileOrigin::shot;
    }
    const double r_of_x =
        (st.chart == ChartKind::physical) ? res.x_final : std::exp(-res.x_final);
    switch (res.status) {
        case OdeStatus::reached_end:
            out.kind = TrajectoryKind::positive_on_window;
            break;
        case OdeStatus::event_detected:
            out.kind = (res.event_index == 0) ? TrajectoryKind::u_crossed_zero
                                              : TrajectoryKind::v_crossed_zero;
            out.location = r_of_x;
            break;
        case OdeStatus::max_norm_exceeded:
            out.kind = TrajectoryKind::blow_up;
            out.location = r_of_x;
            break;
        default: break;
    }
    return out;
}

} // namespace detail

// Classify the trajectory launched by center data (a, b) = (u(0), v(0)) for
// alpha < 2, or by the decaying-eigenmode amplitudes for alpha >= 2.
inline TrajectoryOutcome classify_trajectory(const ProblemParams& prm, double a, double b,
                                             double r_max, double tol = 1e-10) {
    return detail::classify_impl(prm, a, b, r_max, tol, /*store_profile=*/true);
}

// ------------------------------------------------------------------------ shooting

namespace detail {

struct FirstCrossing {
    int which = -1; // 0: u crossed first, 1: v crossed first, -1: none
    double rho = 0.0;
    std::array<double, 4> y_at{}; // physical state at the crossing
};

inline FirstCrossing first_crossing(const ProblemParams& prm, double b, double r_cap, double tol) {
    FirstCrossing fc;
    OdeState st;
    double x_to;
    if (prm.alpha < 2.0) {
        st = series_start(prm, 1.0, b, 1e-5);
        x_to = r_cap;
    } else {
        st = chart_seed(prm, 1.0, b, 12.0 + std::log1p(1.0 + std::fabs(b)));
        x_to = -std::log(r_cap);
    }
    auto res = run_chart(prm, st.chart, st.x, st.y, x_to, tol, 0.01 * tol,
                         /*with_events=*/true, /*store_steps=*/false);
    if (res.status != OdeStatus::event_detected) return fc;
    fc.which = res.event_index;
    if (st.chart == ChartKind::physical) {
        fc.rho = res.x_final;
        fc.y_at = res.y_final;
    } else {
        const auto ph = chart_point_to_physical(prm, st.chart, res.x_final, res.y_final[0],
                                                res.y_final[1], res.y_final[2], res.y_final[3]);
        fc.rho = ph[0];
        fc.y_at = {ph[1], ph[2], ph[3], ph[4]};
    }
    return fc;
}

} // namespace detail

// Positive solution of the Navier problem on the ball B_R: u(0) is normalized
// to 1, the single shooting parameter b = v(0) is bisected until the first
// zeros of u and v coincide, and the similarity u_l(x) = l^{(4+tau)/(p-1)}
// u(l x) moves the common zero to R.  `nodes` chooses the output radii
// (default: 1201 log-spaced nodes on [R e^{-11}, R]).
inline BvpSolution shoot_navier_ball(const ProblemParams& prm, double R, double tol = 1e-10,
                                     std::vector<double> nodes = {}) {
    validate(prm);
    detail::check_tol(tol);
    if (!(R > 0.0)) throw validation_error("shoot_navier_ball: R must be > 0");
    const DerivedExponents d = derive_exponents(prm);
    if (!(prm.p < d.p_s))
        throw validation_error("shoot_navier_ball: requires p < p_s (radial existence regime)");

    if (nodes.empty()) {
        const int n = 1201;
        nodes.resize(n);
        for (int i = 0; i < n; ++i) nodes[i] = R * std::exp(-11.0 * (1.0 - i / double(n - 1)));
    } else {
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
            if (!(nodes[i] < nodes[i + 1]))
                throw validation_error("shoot_navier_ball: nodes must be strictly increasing");
        if (!(nodes.front() > 0.0) || nodes.back() > R * (1.0 + 1e-12))
            throw validation_error("shoot_navier_ball: nodes must lie in (0, R]");
    }

    const double r_cap = 1e4;
    // sign of rho_u - rho_v known only through which component crosses first:
    // v first => positive, u first => negative
    auto sign_of = [&](const detail::FirstCrossing& fc) {
        return (fc.which == 1) ? +1 : (fc.which == 0 ? -1 : 0);
    };

    // bracket sweep
    std::vector<std::array<double, 2>> sweep; // (b, signed rho)
    double b_lo = 0.0, b_hi = 0.0;
    detail::FirstCrossing fc_lo, fc_hi;
    bool have = false;
    const int nsweep = 33;
    int prev_sign = 0;
    double prev_b = 0.0;
    for (int i = 0; i < nsweep && !have; ++i) {
        const double b = std::pow(10.0, -4.0 + 8.0 * i / double(nsweep - 1));
        const auto fc = detail::first_crossing(prm, b, r_cap, tol);
        const int s = sign_of(fc);
        sweep.push_back({b, (s == 0) ? 0.0 : s * fc.rho});
        if (prev_sign > 0 && s < 0) {
            b_lo = prev_b;
            b_hi = b;
            have = true;
        }
        prev_sign = s;
        prev_b = b;
    }
    if (!have) {
        std::ostringstream os;
        os << "shoot_navier_ball: no sign change of rho_u - rho_v in the sweep; table (b, "
              "signed rho, v-first positive):\n";
        for (const auto& row : sweep) os << "  b = " << row[0] << "  rho = " << row[1] << "\n";
        throw solver_error(os.str());
    }

    for (int it = 0; it < 90 && (b_hi - b_lo) > 1e-15 * b_hi; ++it) {
        const double bm = std::sqrt(b_lo * b_hi); // log midpoint, b > 0 throughout
        const auto fc = detail::first_crossing(prm, bm, r_cap, tol);
        const int s = sign_of(fc);
        if (s >= 0) b_lo = bm; else b_hi = bm;
    }
    const double b_star = std::sqrt(b_lo * b_hi);
    const auto fc = detail::first_crossing(prm, b_star, r_cap, tol);
    if (fc.which < 0) throw solver_error("shoot_navier_ball: lost the crossing at b*");
    const double rho = fc.rho;

    // similarity rescale: common zero rho -> R
    const double lambda = rho / R;
    const double theta = (4.0 + d.tau) / (prm.p - 1.0);
    const double su = std::pow(lambda, theta);
    const double sv = std::pow(lambda, theta + 2.0 - prm.alpha);

    // final sampled run (no events; span ends exactly at the located zero so the
    // last requested node, if it sits at R, is realized)
    std::vector<double> samples;
    samples.reserve(nodes.size());
    OdeState st;
    double x_to;
    if (prm.alpha < 2.0) {
        const double r0 = std::min(1e-5, 0.5 * lambda * nodes.front());
        st = series_start(prm, 1.0, b_star, r0);
        x_to = rho;
        for (double rn : nodes) samples.push_back(std::min(lambda * rn, rho));
    } else {
        const double t0 = std::max(12.0 + std::log1p(1.0 + std::fabs(b_star)),
                                   -std::log(0.5 * lambda * nodes.front()));
        st = detail::chart_seed(prm, 1.0, b_star, t0);
        x_to = -std::log(rho);
        // t decreases as r increases: increasing nodes map onto decreasing t
        for (double rn : nodes) samples.push_back(std::max(-std::log(lambda * rn), x_to));
    }
    auto res = detail::run_chart(prm, st.chart, st.x, st.y, x_to, tol, 0.01 * tol,
                                 /*with_events=*/false, /*store_steps=*/false, samples);
    if (res.status != OdeStatus::reached_end)
        throw solver_error("shoot_navier_ball: final sampled run did not reach the boundary");

    RadialProfile raw = detail::profile_from_run(prm, st.chart, res.x_sampled, res.y_sampled);
    if (raw.size() != nodes.size())
        throw solver_error("shoot_navier_ball: sampling failed to realize all requested nodes");

    BvpSolution sol;
    sol.profile.params = prm;
    sol.profile.origin = ProfileOrigin::bvp;
    const std::size_t n = raw.size();
    sol.profile.r = nodes; // raw.r[i]/lambda equals nodes[i] up to roundoff
    sol.profile.u.resize(n);
    sol.profile.du.resize(n);
    sol.profile.v.resize(n);
    sol.profile.dv.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        sol.profile.u[i] = su * raw.u[i];
        sol.profile.du[i] = su * lambda * raw.du[i];
        sol.profile.v[i] = sv * raw.v[i];
        sol.profile.dv[i] = sv * lambda * raw.dv[i];
    }
    sol.center_u = su;
    sol.center_v = sv * b_star;
    sol.shooting_parameter = b_star;
    sol.residual_u = std::fabs(su * fc.y_at[0]);
    sol.residual_v = std::fabs(sv * fc.y_at[2]);
    validate(sol.profile);
    return sol;
}

// ------------------------------------------------------------------------- scanning

// Classify a = 1 trajectories over a (p, b) grid; rows ordered by grid index.
inline ScanReport liouville_scan(const ProblemParams& params_base,
                                 const std::vector<double>& p_grid,
                                 const std::vector<double>& b_grid, double r_max,
                                 double tol = 1e-10, int jobs = 1) {
    if (jobs < 1) throw validation_error("liouville_scan: jobs must be >= 1");
    ScanReport rep;
    if (p_grid.empty() || b_grid.empty()) return rep;
    for (double p : p_grid) {
        ProblemParams prm = params_base;
        prm.p = p;
        validate(prm); // fail fast before spawning workers
    }

    const std::size_t total = p_grid.size() * b_grid.size();
    rep.rows.resize(total);
    std::atomic<std::size_t> cursor{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::size_t k = cursor.fetch_add(1);
            if (k >= total) return;
            const double p = p_grid[k / b_grid.size()];
            const double b = b_grid[k % b_grid.size()];
            try {
                ProblemParams prm = params_base;
                prm.p = p;
                const auto out = detail::classify_impl(prm, 1.0, b, r_max, tol,
                                                       /*store_profile=*/false);
                rep.rows[k] = {p, b, out.kind, out.location};
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    const DerivedExponents d = derive_exponents(params_base);
    for (const auto& row : rep.rows) {
        if (row.kind == TrajectoryKind::positive_on_window) {
            ++rep.n_positive;
            if (row.p < d.p_s) ++rep.n_positive_subcritical;
        }
    }
    rep.fraction_positive = double(rep.n_positive) / double(total);
    return rep;
}

inline void write_scan_csv(std::ostream& os, const ScanReport& rep) {
    os << "p,b,outcome,event_location\n";
    char buf[32];
    for (const auto& row : rep.rows) {
        std::snprintf(buf, sizeof buf, "%.17g", row.p);
        os << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", row.b);
        os << buf << ',' << to_string(row.kind) << ',';
        if (row.location) {
            std::snprintf(buf, sizeof buf, "%.17g", *row.location);
            os << buf;
        }
        os << '\n';
    }
}

} // namespace henonlab
