// Tail-rate fits, a-priori decay bounds, and monotonicity margins.

#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "henonlab/asymptotics.hpp"
#include "henonlab/errors.hpp"
#include "henonlab/radial_ode.hpp"
#include "henonlab/transform.hpp"
#include "support/critical_solution.hpp"

using namespace henonlab;

namespace {

TransformedProfile synthetic_tails(double aw, double rw, double az, double rz) {
    TransformedProfile tp;
    tp.chart = ChartKind::interior;
    tp.params = ProblemParams{5, 0.0, 0.0, 3.0};
    for (int i = 0; i <= 200; ++i) {
        const double t = 10.0 * i / 200.0;
        tp.t.push_back(t);
        tp.w.push_back(aw * std::exp(-rw * t));
        tp.dw.push_back(-rw * aw * std::exp(-rw * t));
        tp.z.push_back(az * std::exp(-rz * t));
        tp.dz.push_back(-rz * az * std::exp(-rz * t));
    }
    return tp;
}

RadialProfile profile_from(const ProblemParams& prm, const std::vector<double>& r,
                           double (*u)(double), double (*du)(double), double (*v)(double),
                           double (*dv)(double)) {
    RadialProfile p;
    p.params = prm;
    for (double x : r) {
        p.r.push_back(x);
        p.u.push_back(u(x));
        p.du.push_back(du(x));
        p.v.push_back(v(x));
        p.dv.push_back(dv(x));
    }
    return p;
}

const BoundCheck& named(const std::vector<BoundCheck>& checks, const char* name) {
    for (const auto& bc : checks)
        if (bc.bound_name == name) return bc;
    throw std::logic_error("missing bound");
}

} // namespace

TEST_CASE("exact exponentials are recovered to machine precision") {
    const TransformedProfile tp = synthetic_tails(3.0, 0.5, 7.0, 2.5);

    const AsymptoticsFit fw = fit_tail(tp, TailComponent::w, {{2.0, 8.0}});
    CHECK(fw.rate == Catch::Approx(0.5).margin(1e-12));
    CHECK(fw.amplitude == Catch::Approx(3.0).epsilon(1e-12));
    CHECK(fw.fit_quality > 1.0 - 1e-12);
    CHECK(fw.window[0] == 2.0);
    CHECK(fw.window[1] == 8.0);

    const AsymptoticsFit fz = fit_tail(tp, TailComponent::z, {{2.0, 8.0}});
    CHECK(fz.rate == Catch::Approx(2.5).margin(1e-12));
    CHECK(fz.amplitude == Catch::Approx(7.0).epsilon(1e-12));

    SECTION("the default window is the last 40% of the range") {
        const AsymptoticsFit fd = fit_tail(tp, TailComponent::w);
        CHECK(fd.window[0] == Catch::Approx(6.0));
        CHECK(fd.window[1] == Catch::Approx(10.0));
        CHECK(fd.rate == Catch::Approx(0.5).margin(1e-12));
    }
}

TEST_CASE("tail fits validate window and positivity") {
    TransformedProfile tp = synthetic_tails(3.0, 0.5, 7.0, 2.5);
    CHECK_THROWS_AS(fit_tail(tp, TailComponent::w, {{8.0, 2.0}}), validation_error);
    CHECK_THROWS_AS(fit_tail(tp, TailComponent::w, {{-3.0, 2.0}}), validation_error);
    CHECK_THROWS_AS(fit_tail(tp, TailComponent::w, {{8.0, 12.0}}), validation_error);
    CHECK_THROWS_AS(fit_tail(tp, TailComponent::w, {{4.001, 4.002}}), validation_error);
    tp.w[100] = 0.0; // t = 5
    CHECK_THROWS_AS(fit_tail(tp, TailComponent::w, {{2.0, 8.0}}), validation_error);
}

TEST_CASE("shot solution decays at the linearized rates") {
    const ProblemParams prm{5, 0.0, 0.0, 3.0};
    const BvpSolution sol = shoot_navier_ball(prm, 1.0, 1e-11);
    const TransformedProfile tp = to_transformed(sol.profile, ChartKind::interior);

    // near the center u -> u(0) and v -> v(0), so w ~ u(0) e^{-t (N'-4)/2}
    // and z ~ v(0) e^{-t (N-alpha)/2}
    const AsymptoticsFit fw = fit_tail(tp, TailComponent::w, {{6.0, 10.0}});
    CHECK(fw.rate == Catch::Approx(0.5).epsilon(0.02));
    CHECK(fw.fit_quality > 0.999);
    CHECK(fw.amplitude == Catch::Approx(sol.center_u).epsilon(0.02));

    const AsymptoticsFit fz = fit_tail(tp, TailComponent::z, {{6.0, 10.0}});
    CHECK(fz.rate == Catch::Approx(2.5).epsilon(0.02));
    CHECK(fz.fit_quality > 0.999);
    CHECK(fz.amplitude == Catch::Approx(sol.center_v).epsilon(0.02));
}

TEST_CASE("bounds hold on the entire critical solution") {
    const ProblemParams prm = oracle::critical_params();
    const RadialProfile prof = oracle::critical_profile(oracle::geometric_nodes(0.01, 100.0, 1500));
    const auto checks = check_bounds(prm, prof);
    REQUIRE(checks.size() == 4);
    for (const auto& bc : checks) {
        CHECK(std::isfinite(bc.sup_constant));
        CHECK(bc.sup_constant > 0.0);
        CHECK(bc.satisfied);
    }
    // u r^{1/2} peaks at r = 1 for this solution
    CHECK(named(checks, "u_decay").sup_at == Catch::Approx(1.0).epsilon(0.05));

    SECTION("suprema are stable when the window doubles") {
        const RadialProfile wide =
            oracle::critical_profile(oracle::geometric_nodes(0.01, 200.0, 1650));
        const auto wider = check_bounds(prm, wide);
        for (const auto& bc : checks) {
            const auto& other = named(wider, bc.bound_name.c_str());
            CHECK(other.sup_constant == Catch::Approx(bc.sup_constant).epsilon(0.01));
        }
    }
}

TEST_CASE("bound checks flag growth pinned to a grid end") {
    const ProblemParams prm{5, 0.0, 0.0, 3.0};
    const auto r = oracle::geometric_nodes(0.1, 10.0, 200);
    const RadialProfile prof = profile_from(
        prm, r, [](double x) { return std::pow(x, -10.0); },
        [](double x) { return -10.0 * std::pow(x, -11.0); },
        [](double x) { return std::pow(x, -10.0); },
        [](double x) { return -10.0 * std::pow(x, -11.0); });
    const auto checks = check_bounds(prm, prof);
    const auto& ub = named(checks, "u_decay");
    CHECK_FALSE(ub.satisfied);                      // supremum pinned to r -> 0
    CHECK(ub.sup_at == Catch::Approx(0.1));         // first node
    CHECK(ub.sup_constant == Catch::Approx(1e8));   // (0.1)^{-10+2}
}

TEST_CASE("constant profile on a compact window has finite suprema") {
    const ProblemParams prm{5, 0.0, 0.0, 3.0};
    std::vector<double> r;
    for (int i = 1; i <= 50; ++i) r.push_back(i / 50.0);
    const RadialProfile prof =
        profile_from(prm, r, [](double) { return 1.0; }, [](double) { return 0.0; },
                     [](double) { return 1.0; }, [](double) { return 0.0; });
    for (const auto& bc : check_bounds(prm, prof)) CHECK(std::isfinite(bc.sup_constant));
    CHECK(named(check_bounds(prm, prof), "u_decay").sup_constant == Catch::Approx(1.0));
}

TEST_CASE("bound suprema are similarity invariant") {
    const ProblemParams prm{5, 0.7, 0.3, 2.5};
    const DerivedExponents d = derive_exponents(prm);
    const double theta = (4.0 + d.tau) / (prm.p - 1.0);
    const double lam = 3.0;

    const auto r = oracle::geometric_nodes(0.5, 5.0, 300);
    const RadialProfile base = profile_from(
        prm, r, [](double x) { return std::exp(-x) * (1.0 + x); },
        [](double x) { return -x * std::exp(-x); },
        [](double x) { return (2.0 + std::cos(x)) * std::exp(-x); },
        [](double x) { return -(2.0 + std::cos(x) + std::sin(x)) * std::exp(-x); });

    RadialProfile scaled = base;
    for (std::size_t i = 0; i < base.size(); ++i) {
        scaled.r[i] = base.r[i] / lam;
        scaled.u[i] = std::pow(lam, theta) * base.u[i];
        scaled.du[i] = std::pow(lam, theta + 1.0) * base.du[i];
        scaled.v[i] = std::pow(lam, theta + 2.0 - prm.alpha) * base.v[i];
        scaled.dv[i] = std::pow(lam, theta + 3.0 - prm.alpha) * base.dv[i];
    }

    const auto cb = check_bounds(prm, base);
    const auto cs = check_bounds(prm, scaled);
    for (std::size_t k = 0; k < cb.size(); ++k)
        CHECK(cs[k].sup_constant == Catch::Approx(cb[k].sup_constant).epsilon(1e-10));
}

TEST_CASE("monotonicity margins on the critical solution") {
    const ProblemParams prm = oracle::critical_params();
    const RadialProfile prof = oracle::critical_profile(oracle::geometric_nodes(0.01, 50.0, 1200));
    const MonotonicityReport rep = monotonicity_report(prm, prof);

    // r^{3/2} u is strictly increasing everywhere for this solution
    CHECK(rep.weighted_u_slope.min_value > 0.0);
    CHECK(rep.weighted_u_slope.strict);
    // r u' + 3u = c (3 + 2 r^2)(1+r^2)^{-3/2} > 0, approaching 0 from above at
    // large r: the minimum sits at the outer end of the grid
    CHECK(rep.radial_combination_u.min_value > 0.0);
    CHECK(rep.radial_combination_u.at_r > 40.0);
    // r v' + 3v = 15 c (1+r^2)^{-7/2} > 0
    CHECK(rep.radial_combination_v.min_value > 0.0);
    // r^{3/2} v peaks near r = 0.78 and then decreases: the entire critical
    // solution leaves the monotone class at large radius
    CHECK(rep.weighted_v_slope.min_value < 0.0);
    CHECK_FALSE(rep.weighted_v_slope.strict);
}

TEST_CASE("the borderline power is flagged non-strict") {
    const ProblemParams prm{5, 0.0, 0.0, 3.0};
    const auto r = oracle::geometric_nodes(0.5, 2.0, 101);
    const RadialProfile prof = profile_from(
        prm, r, [](double x) { return std::pow(x, -1.5); },
        [](double x) { return -1.5 * std::pow(x, -2.5); },
        [](double x) { return std::pow(x, -1.5); },
        [](double x) { return -1.5 * std::pow(x, -2.5); });
    const MonotonicityReport rep = monotonicity_report(prm, prof);
    CHECK(std::fabs(rep.weighted_u_slope.min_value) < 1e-10);
    CHECK_FALSE(rep.weighted_u_slope.strict);
    // r u' + 3u = 1.5 r^{-3/2} stays strictly positive
    CHECK(rep.radial_combination_u.strict);
}

TEST_CASE("shot solution is monotone on an inner region") {
    // r^{3/2} u increases while u stays near its positive center value; for
    // this solution the measured monotone region is (0, 0.476), falling just
    // short of the half ball: 1.5 u + r u' = -3.7 already at r = 0.5
    const ProblemParams prm{5, 0.0, 0.0, 3.0};
    const BvpSolution sol = shoot_navier_ball(prm, 1.0, 1e-11);

    RadialProfile inner;
    inner.params = prm;
    for (std::size_t i = 0; i < sol.profile.size() && sol.profile.r[i] <= 0.45; ++i) {
        inner.r.push_back(sol.profile.r[i]);
        inner.u.push_back(sol.profile.u[i]);
        inner.du.push_back(sol.profile.du[i]);
        inner.v.push_back(sol.profile.v[i]);
        inner.dv.push_back(sol.profile.dv[i]);
    }
    REQUIRE(inner.size() > 100);
    const MonotonicityReport rep = monotonicity_report(prm, inner);
    CHECK(rep.weighted_u_slope.min_value > 0.0);
    CHECK(rep.radial_combination_u.min_value > 0.0);

    // past the half ball the weighted quantity is already decreasing
    std::size_t j = 0;
    while (j + 1 < sol.profile.size() && sol.profile.r[j] < 0.5) ++j;
    CHECK(1.5 * sol.profile.u[j] + sol.profile.r[j] * sol.profile.du[j] < 0.0);
}
