#pragma once

// Dormand-Prince 5(4) with FSAL, PI step-size control, 4th-order dense output
// and sign-change event location.  Works in either direction of integration.
// The controller constants follow Hairer-Norsett-Wanner (DOPRI5).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace henonlab {

enum class OdeStatus {
    reached_end,       // integrated to x_end
    event_detected,    // an event function changed sign; stopped there
    max_norm_exceeded, // sup-norm of the state crossed the blow-up threshold
    stepsize_underflow,
    step_limit
};

template <std::size_t D>
struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_max = 0.0; // 0: |x_end - x0|
    double max_norm = 1e12;
    std::size_t max_steps = 2'000'000;
    bool store_steps = true;
};

// Event fires when `value` changes sign between accepted steps (or hits 0).
template <std::size_t D>
struct OdeEvent {
    std::function<double(double, const std::array<double, D>&)> value;
    std::string name;
};

template <std::size_t D>
struct OdeResult {
    OdeStatus status = OdeStatus::reached_end;
    std::vector<double> x;                   // accepted nodes (incl. event point)
    std::vector<std::array<double, D>> y;
    std::vector<double> x_sampled;           // realized entries of sample_at
    std::vector<std::array<double, D>> y_sampled;
    int event_index = -1;                    // which event fired (if any)
    double x_final = 0.0;
    std::array<double, D> y_final{};
    std::size_t n_accepted = 0, n_rejected = 0;
};

namespace dopri5_detail {

// Butcher tableau
inline constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
inline constexpr double a21 = 0.2;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                        a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
// embedded error weights (order 5 minus order 4)
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// dense output
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

} // namespace dopri5_detail

// deriv(x, y, dydx): fills dydx with f(x, y).
template <std::size_t D, typename Deriv>
OdeResult<D> integrate_dopri5(Deriv&& deriv, double x0, const std::array<double, D>& y0,
                              double x_end, const OdeOptions<D>& opt = {},
                              const std::vector<OdeEvent<D>>& events = {},
                              const std::vector<double>& sample_at = {}) {
    namespace bt = dopri5_detail;
    using vec = std::array<double, D>;

    OdeResult<D> res;
    const double dir = (x_end >= x0) ? 1.0 : -1.0;
    const double hmax = (opt.h_max > 0.0) ? opt.h_max : std::fabs(x_end - x0);

    vec y = y0;
    double x = x0;
    vec k1{}, k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, ytmp{}, ynew{};
    deriv(x, y, k1);

    auto sup_norm = [](const vec& a) {
        double m = 0.0;
        for (double c : a) m = std::max(m, std::fabs(c));
        return m;
    };

    // --- initial step size (Hairer's hinit)
    double h;
    {
        double dnf = 0.0, dny = 0.0;
        for (std::size_t i = 0; i < D; ++i) {
            const double sk = opt.atol + opt.rtol * std::fabs(y[i]);
            dnf += (k1[i] / sk) * (k1[i] / sk);
            dny += (y[i] / sk) * (y[i] / sk);
        }
        double h0 = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
        h0 = std::min(h0, hmax);
        vec y1, f1;
        for (std::size_t i = 0; i < D; ++i) y1[i] = y[i] + dir * h0 * k1[i];
        deriv(x + dir * h0, y1, f1);
        double der2 = 0.0;
        for (std::size_t i = 0; i < D; ++i) {
            const double sk = opt.atol + opt.rtol * std::fabs(y[i]);
            der2 += ((f1[i] - k1[i]) / sk) * ((f1[i] - k1[i]) / sk);
        }
        der2 = std::sqrt(der2) / h0;
        const double der12 = std::max(std::sqrt(dnf), der2);
        const double h1 = (der12 <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                           : std::pow(0.01 / der12, 0.2);
        h = dir * std::min({100.0 * h0, h1, hmax});
    }

    // event bookkeeping: values at the last accepted point
    std::vector<double> g_old(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) g_old[e] = events[e].value(x, y);

    std::size_t sample_cursor = 0;

    if (opt.store_steps) {
        res.x.push_back(x);
        res.y.push_back(y);
    }

    constexpr double safe = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;
    constexpr double facc1 = 1.0 / 0.2, facc2 = 1.0 / 10.0; // step-factor clamps
    double facold = 1e-4;
    bool last = false, reject = false;

    auto finish = [&](OdeStatus st, double xf, const vec& yf, int ev = -1) {
        res.status = st;
        res.x_final = xf;
        res.y_final = yf;
        res.event_index = ev;
        return res;
    };

    for (std::size_t step = 0;; ++step) {
        if (step >= opt.max_steps) return finish(OdeStatus::step_limit, x, y);
        if (std::fabs(h) <=
            std::max(std::fabs(x), 1e-3) * std::numeric_limits<double>::epsilon() * 16.0)
            return finish(OdeStatus::stepsize_underflow, x, y);
        if ((x + 1.01 * h - x_end) * dir > 0.0) {
            h = x_end - x;
            last = true;
        }

        // --- the six fresh stages (k1 carried over, FSAL)
        for (std::size_t i = 0; i < D; ++i) ytmp[i] = y[i] + h * bt::a21 * k1[i];
        deriv(x + bt::c2 * h, ytmp, k2);
        for (std::size_t i = 0; i < D; ++i)
            ytmp[i] = y[i] + h * (bt::a31 * k1[i] + bt::a32 * k2[i]);
        deriv(x + bt::c3 * h, ytmp, k3);
        for (std::size_t i = 0; i < D; ++i)
            ytmp[i] = y[i] + h * (bt::a41 * k1[i] + bt::a42 * k2[i] + bt::a43 * k3[i]);
        deriv(x + bt::c4 * h, ytmp, k4);
        for (std::size_t i = 0; i < D; ++i)
            ytmp[i] = y[i] + h * (bt::a51 * k1[i] + bt::a52 * k2[i] + bt::a53 * k3[i] +
                                  bt::a54 * k4[i]);
        deriv(x + bt::c5 * h, ytmp, k5);
        for (std::size_t i = 0; i < D; ++i)
            ytmp[i] = y[i] + h * (bt::a61 * k1[i] + bt::a62 * k2[i] + bt::a63 * k3[i] +
                                  bt::a64 * k4[i] + bt::a65 * k5[i]);
        deriv(x + h, ytmp, k6);
        for (std::size_t i = 0; i < D; ++i)
            ynew[i] = y[i] + h * (bt::a71 * k1[i] + bt::a73 * k3[i] + bt::a74 * k4[i] +
                                  bt::a75 * k5[i] + bt::a76 * k6[i]);
        deriv(x + h, ynew, k7);

        double err = 0.0;
        for (std::size_t i = 0; i < D; ++i) {
            const double sk =
                opt.atol + opt.rtol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
            const double ei = h * (bt::e1 * k1[i] + bt::e3 * k3[i] + bt::e4 * k4[i] +
                                   bt::e5 * k5[i] + bt::e6 * k6[i] + bt::e7 * k7[i]);
            err += (ei / sk) * (ei / sk);
        }
        err = std::sqrt(err / static_cast<double>(D));

        const double fac11 = std::pow(err, expo1);
        if (err > 1.0) { // reject
            h /= std::min(facc1, fac11 / safe);
            reject = true;
            last = false;
            ++res.n_rejected;
            continue;
        }

        // --- accepted
        ++res.n_accepted;
        const double xold = x, hcur = h;
        const vec yold = y;

        // dense-output coefficients for this step
        vec rc1, rc2, rc3, rc4, rc5;
        for (std::size_t i = 0; i < D; ++i) {
            rc1[i] = yold[i];
            const double ydiff = ynew[i] - yold[i];
            rc2[i] = ydiff;
            const double bspl = hcur * k1[i] - ydiff;
            rc3[i] = bspl;
            rc4[i] = ydiff - hcur * k7[i] - bspl;
            rc5[i] = hcur * (bt::d1 * k1[i] + bt::d3 * k3[i] + bt::d4 * k4[i] + bt::d5 * k5[i] +
                             bt::d6 * k6[i] + bt::d7 * k7[i]);
        }
        auto dense = [&](double theta, vec& out) {
            const double th1 = 1.0 - theta;
            for (std::size_t i = 0; i < D; ++i)
                out[i] = rc1[i] +
                         theta * (rc2[i] + th1 * (rc3[i] + theta * (rc4[i] + th1 * rc5[i])));
        };

        x += h;
        y = ynew;
        k1 = k7; // FSAL

        // --- events: sign change over [xold, x], located by dense bisection
        int fired = -1;
        double theta_hit = 1.0;
        for (std::size_t e = 0; e < events.size(); ++e) {
            const double gn = events[e].value(x, y);
            if (g_old[e] == 0.0) { g_old[e] = gn; continue; } // started on the zero set
            if (gn == 0.0 || (g_old[e] > 0.0) != (gn > 0.0)) {
                double lo = 0.0, hi = 1.0, glo = g_old[e];
                vec ymid;
                for (int it = 0; it < 80 && (hi - lo) > 1e-14; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    dense(mid, ymid);
                    const double gm = events[e].value(xold + mid * hcur, ymid);
                    if (gm == 0.0) { lo = hi = mid; break; }
                    if ((gm > 0.0) == (glo > 0.0)) { lo = mid; glo = gm; } else { hi = mid; }
                }
                const double th = 0.5 * (lo + hi);
                if (th < theta_hit) {
                    theta_hit = th;
                    fired = static_cast<int>(e);
                }
            }
            g_old[e] = gn;
        }

        const double x_stop = (fired >= 0) ? xold + theta_hit * hcur : x;

        // --- requested samples inside (xold, x_stop]
        while (sample_cursor < sample_at.size()) {
            const double xs = sample_at[sample_cursor];
            if ((xs - xold) * dir <= 0.0) { // behind us (or exactly at start): clamp
                if (sample_cursor == 0 && (xs - x0) * dir <= 0.0) {
                    res.x_sampled.push_back(xs);
                    res.y_sampled.push_back(yold);
                    ++sample_cursor;
                    continue;
                }
            }
            if ((xs - x_stop) * dir > 1e-300) break;
            vec ys;
            dense(std::clamp((xs - xold) / hcur, 0.0, 1.0), ys);
            res.x_sampled.push_back(xs);
            res.y_sampled.push_back(ys);
            ++sample_cursor;
        }

        if (fired >= 0) {
            vec yhit;
            dense(theta_hit, yhit);
            if (opt.store_steps) {
                res.x.push_back(x_stop);
                res.y.push_back(yhit);
            }
            return finish(OdeStatus::event_detected, x_stop, yhit, fired);
        }

        if (opt.store_steps) {
            res.x.push_back(x);
            res.y.push_back(y);
        }

        if (sup_norm(y) > opt.max_norm) return finish(OdeStatus::max_norm_exceeded, x, y);
        if (last) return finish(OdeStatus::reached_end, x, y);

        // --- PI controller
        double fac = fac11 / std::pow(facold, beta);
        fac = std::max(facc2, std::min(facc1, fac / safe));
        double hnew = h / fac;
        if (std::fabs(hnew) > hmax) hnew = dir * hmax;
        if (reject) hnew = dir * std::min(std::fabs(hnew), std::fabs(h));
        facold = std::max(err, 1e-4);
        reject = false;
        h = hnew;
    }
}

} // namespace henonlab
