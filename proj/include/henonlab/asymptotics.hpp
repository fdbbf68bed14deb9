#pragma once

// Tail behaviour of computed profiles: exponential-rate fits in the
// transformed charts, the a-priori decay bounds in normalized form, and the
// monotonicity quantities r^{(N-2)/2} u, r^{(N-2)/2} v and r u' + (N-2) u.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "exponents.hpp"
#include "transform.hpp"

namespace henonlab {

enum class TailComponent { w, z };

struct AsymptoticsFit {
    double rate = 0.0;              // -slope of the ln(component) vs t line
    double amplitude = 0.0;         // e^{intercept}
    std::array<double, 2> window{}; // t-interval actually used
    double fit_quality = 0.0;       // coefficient of determination
};

struct BoundCheck {
    std::string bound_name;    // one of u_decay, u_slope, v_decay, v_slope
    double sup_constant = 0.0; // sup over nodes of the bound-normalized quantity
    double sup_at = 0.0;       // radius where the supremum is attained
    bool satisfied = false;    // sup finite and attained away from both grid ends
};

struct MonotonicityEntry {
    double min_value = 0.0; // minimum over nodes, reported as a signed margin
    double at_r = 0.0;      // radius of the minimum
    bool strict = false;    // min_value > 0
};

struct MonotonicityReport {
    MonotonicityEntry weighted_u_slope;      // min d/dr [ r^{(N-2)/2} u ]
    MonotonicityEntry weighted_v_slope;      // min d/dr [ r^{(N-2)/2} v ]
    MonotonicityEntry radial_combination_u;  // min of r u' + (N-2) u
    MonotonicityEntry radial_combination_v;  // min of r v' + (N-2) v
};

// Least-squares exponential fit of one transformed component on a t-window.
// The window defaults to the last 40% of the t-range: the decay laws are
// asymptotic and early transients pollute the slope.
inline AsymptoticsFit fit_tail(const TransformedProfile& tprof, TailComponent component,
                               std::optional<std::array<double, 2>> window = std::nullopt) {
    validate(tprof);
    const auto& t = tprof.t;
    const auto& s = (component == TailComponent::w) ? tprof.w : tprof.z;

    const double span = t.back() - t.front();
    std::array<double, 2> win =
        window ? *window : std::array<double, 2>{t.back() - 0.4 * span, t.back()};
    const double slack = 1e-12 * std::max(1.0, span);
    if (!(win[0] < win[1]))
        throw validation_error("fit_tail: window must have positive length");
    if (win[0] < t.front() - slack || win[1] > t.back() + slack)
        throw validation_error("fit_tail: window lies outside the profile's t-range");

    std::vector<double> ts, ys;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < win[0] - slack || t[i] > win[1] + slack) continue;
        if (!(s[i] > 0.0))
            throw validation_error("fit_tail: component must be strictly positive on the window");
        ts.push_back(t[i]);
        ys.push_back(std::log(s[i]));
    }
    if (ts.size() < 2) throw validation_error("fit_tail: window contains fewer than two samples");

    const std::size_t n = ts.size();
    double tbar = 0.0, ybar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        tbar += ts[i];
        ybar += ys[i];
    }
    tbar /= double(n);
    ybar /= double(n);
    double stt = 0.0, sty = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        stt += (ts[i] - tbar) * (ts[i] - tbar);
        sty += (ts[i] - tbar) * (ys[i] - ybar);
        syy += (ys[i] - ybar) * (ys[i] - ybar);
    }
    const double slope = sty / stt;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = ys[i] - ybar - slope * (ts[i] - tbar);
        ss_res += e * e;
    }

    AsymptoticsFit fit;
    fit.rate = -slope;
    fit.amplitude = std::exp(ybar - slope * tbar);
    fit.window = win;
    fit.fit_quality = (syy > 0.0) ? std::max(0.0, 1.0 - ss_res / syy)
                                  : (ss_res == 0.0 ? 1.0 : 0.0);
    return fit;
}

// Decay bounds in normalized form.  Each quantity multiplies a profile column
// by the power of r that makes the a-priori bound read "sup < infinity", so
// the exponents are scaling-invariant by construction:
//   u      r^{(4+tau)/(p-1)}
//   |u'|   r^{(p+tau+3)/(p-1)}
//   v      r^{(2(p+1)+tau)/(p-1) - alpha}
//   |v'|   r^{(2(p+1)+tau)/(p-1) - alpha + 1}
// satisfied = supremum finite and attained at an interior node: a maximum
// pinned to the first or last node signals growth toward that end of the grid.
inline std::vector<BoundCheck> check_bounds(const ProblemParams& prm,
                                            const RadialProfile& prof) {
    validate(prm);
    validate(prof);
    const DerivedExponents d = derive_exponents(prm);
    const double eu = (4.0 + d.tau) / (prm.p - 1.0);
    const double edu = (prm.p + d.tau + 3.0) / (prm.p - 1.0);
    const double ev = (2.0 * (prm.p + 1.0) + d.tau) / (prm.p - 1.0) - prm.alpha;
    const double edv = ev + 1.0;

    const std::size_t n = prof.size();
    std::vector<BoundCheck> out;
    auto add = [&](const char* name, double expo, const std::vector<double>& col, bool absval) {
        BoundCheck bc;
        bc.bound_name = name;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double q = (absval ? std::fabs(col[i]) : col[i]) * std::pow(prof.r[i], expo);
            if (i == 0 || q > bc.sup_constant) {
                bc.sup_constant = q;
                arg = i;
            }
        }
        bc.sup_at = prof.r[arg];
        bc.satisfied = std::isfinite(bc.sup_constant) && arg > 0 && arg + 1 < n;
        out.push_back(bc);
    };
    add("u_decay", eu, prof.u, false);
    add("u_slope", edu, prof.du, true);
    add("v_decay", ev, prof.v, false);
    add("v_slope", edv, prof.dv, true);
    return out;
}

// Minima (signed margins) of the monotonicity quantities.  Slopes of
// r^{(N-2)/2} u and r^{(N-2)/2} v use centered differences with one-sided
// stencils at the ends; the combinations r u' + (N-2) u use the stored
// derivative columns.  Strictness is reported as a flag on the margin rather
// than asserted: discretization degrades the strict inequality to >= 0.
inline MonotonicityReport monotonicity_report(const ProblemParams& prm,
                                              const RadialProfile& prof) {
    validate(prm);
    validate(prof);
    const std::size_t n = prof.size();
    if (n < 3) throw validation_error("monotonicity_report: needs at least 3 nodes");
    const double sg = 0.5 * (prm.N - 2.0);

    auto slope_entry = [&](const std::vector<double>& col) {
        std::vector<double> q(n);
        for (std::size_t i = 0; i < n; ++i) q[i] = std::pow(prof.r[i], sg) * col[i];
        MonotonicityEntry e;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t lo = (i == 0) ? 0 : i - 1;
            const std::size_t hi = (i + 1 == n) ? i : i + 1;
            const double slope = (q[hi] - q[lo]) / (prof.r[hi] - prof.r[lo]);
            if (i == 0 || slope < e.min_value) {
                e.min_value = slope;
                e.at_r = prof.r[i];
            }
        }
        e.strict = e.min_value > 0.0;
        return e;
    };
    auto combo_entry = [&](const std::vector<double>& col, const std::vector<double>& dcol) {
        MonotonicityEntry e;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = prof.r[i] * dcol[i] + (prm.N - 2.0) * col[i];
            if (i == 0 || c < e.min_value) {
                e.min_value = c;
                e.at_r = prof.r[i];
            }
        }
        e.strict = e.min_value > 0.0;
        return e;
    };

    MonotonicityReport rep;
    rep.weighted_u_slope = slope_entry(prof.u);
    rep.weighted_v_slope = slope_entry(prof.v);
    rep.radial_combination_u = combo_entry(prof.u, prof.du);
    rep.radial_combination_v = combo_entry(prof.v, prof.dv);
    return rep;
}

} // namespace henonlab
