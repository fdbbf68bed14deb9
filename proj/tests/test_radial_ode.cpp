// Radial integration, trajectory classification, shooting, and scans.

#include <cmath>
#include <sstream>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "henonlab/errors.hpp"
#include "henonlab/radial_ode.hpp"
#include "henonlab/transform.hpp"
#include "support/collocation.hpp"
#include "support/critical_solution.hpp"

using namespace henonlab;

namespace {

OdeState exact_state(double r) {
    const auto p = oracle::critical_point(r);
    OdeState st;
    st.chart = ChartKind::physical;
    st.x = r;
    st.y = {p.u, p.du, p.v, p.dv};
    return st;
}

// int_0^{r[upto]} s^{N-alpha-1} v ds on a stored profile (trapezoid plus the
// analytic first cell, where v is frozen at v[0])
double flux_integral(const RadialProfile& p, std::size_t upto) {
    const double k = p.params.N - p.params.alpha;
    auto f = [&](std::size_t j) { return std::pow(p.r[j], k - 1.0) * p.v[j]; };
    double acc = std::pow(p.r[0], k) / k * p.v[0];
    for (std::size_t i = 0; i < upto; ++i)
        acc += 0.5 * (p.r[i + 1] - p.r[i]) * (f(i) + f(i + 1));
    return acc;
}

} // namespace

TEST_CASE("vector field by direct substitution") {
    const ProblemParams prm{5, 0.0, 0.0, 3.0};
    const auto d = rhs(prm, ChartKind::physical, 1.0, {1.0, 0.0, 1.0, 0.0});
    CHECK(d[0] == 0.0);
    CHECK(d[1] == -1.0);
    CHECK(d[2] == 0.0);
    CHECK(d[3] == -1.0);

    const auto z = rhs(prm, ChartKind::physical, 2.0, {0.0, 0.0, 0.0, 0.0});
    for (double c : z) CHECK(c == 0.0);

    CHECK_THROWS_AS(rhs(prm, ChartKind::physical, 0.0, {1.0, 0.0, 1.0, 0.0}), validation_error);
    CHECK_THROWS_AS(rhs(ProblemParams{5, 1.0, 0.0, 3.0}, ChartKind::exterior, 1.0,
                        {1.0, 0.0, 1.0, 0.0}),
                    validation_error);
}

TEST_CASE("vector field annihilates the explicit critical solution") {
    // c^{p-1} = N(N-4)(N^2-4): 105 = 5 * 1 * 21
    CHECK(5.0 * 1.0 * 21.0 == 105.0);

    const ProblemParams prm = oracle::critical_params();
    for (int i = 0; i < 200; ++i) {
        const double r = 0.01 * std::pow(10.0, 4.0 * i / 199.0); // 0.01 .. 100
        const auto pt = oracle::critical_point(r);
        const auto d = rhs(prm, ChartKind::physical, r, {pt.u, pt.du, pt.v, pt.dv});

        // analytic second derivatives of the closed form
        const double s = 1.0 + r * r;
        const double c = oracle::critical_c();
        const double upp = -c * std::pow(s, -1.5) + 3.0 * c * r * r * std::pow(s, -2.5);
        const double vpp = -3.0 * c * ((6.0 * r * r + 7.0) * std::pow(s, -3.5) -
                                       7.0 * r * r * (2.0 * r * r + 7.0) * std::pow(s, -4.5));

        const double scale_u = std::fabs(upp) + std::fabs(pt.du) + 1.0;
        const double scale_v = std::fabs(vpp) + std::fabs(pt.dv) + 1.0;
        CHECK(std::fabs(d[1] - upp) / scale_u < 1e-10);
        CHECK(std::fabs(d[3] - vpp) / scale_v < 1e-10);
    }
}

TEST_CASE("series start balances the flux expansion") {
    const ProblemParams prm{5, 0.0, 0.0, 3.0};

    SECTION("frozen two-term values") {
        const OdeState st = series_start(prm, 1.0, 1.0, 0.01);
        CHECK(st.y[0] == Catch::Approx(1.0 - 1e-5).epsilon(1e-12));
        CHECK(st.y[2] == Catch::Approx(1.0 - 1e-5).epsilon(1e-12));
        CHECK(st.y[1] == Catch::Approx(-0.002).epsilon(1e-12));
        CHECK(st.y[3] == Catch::Approx(-0.002).epsilon(1e-12));
        CHECK_FALSE(st.series_warning);
    }
    SECTION("zero data gives the zero state") {
        const OdeState st = series_start(prm, 0.0, 0.0, 0.01);
        for (double c : st.y) CHECK(c == 0.0);
    }
    SECTION("alpha >= 2 is refused, negative a is refused") {
        CHECK_THROWS_AS(series_start(ProblemParams{5, 2.0, 0.0, 2.0}, 1.0, 1.0, 0.01),
                        validation_error);
        CHECK_THROWS_AS(series_start(prm, -1.0, 1.0, 0.01), validation_error);
    }
    SECTION("warning heuristic for an out-of-range start") {
        CHECK(series_start(prm, 1.0, 1000.0, 0.02).series_warning);
        CHECK_FALSE(series_start(prm, 1.0, 1000.0, 0.005).series_warning);
    }
    SECTION("self-consistency under r0 refinement") {
        // integrating from r0 and r0/2 to the same radius agrees to O(r0^4)
        auto u_at = [&](double r0) {
            const auto prof =
                integrate(prm, series_start(prm, 1.0, 1.0, r0), 0.1, 1e-12, {0.1});
            REQUIRE(prof.size() == 1);
            return prof.u[0];
        };
        const double d1 = std::fabs(u_at(0.05) - u_at(0.025));
        const double d2 = std::fabs(u_at(0.025) - u_at(0.0125));
        CHECK(d1 < 1e-4);
        CHECK(d2 < d1);
        CHECK(d2 / d1 < 0.25); // fourth-order truncation shrinks by ~16
    }
}

TEST_CASE("decoupled branch follows the linear closed form") {
    // a = 0: v stays b and u = -b r^2 / (2N) until the u^p feedback kicks in;
    // on r <= 0.1 the feedback is below 1e-12
    const ProblemParams prm{5, 0.0, 0.0, 3.0};
    const OdeState st = series_start(prm, 0.0, 1.0, 1e-3);
    const std::vector<double> probe{0.02, 0.05, 0.1};
    const RadialProfile prof = integrate(prm, st, 0.1, 1e-12, probe);
    REQUIRE(prof.size() == probe.size());
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double r = probe[i];
        CHECK(std::fabs(prof.v[i] - 1.0) < 1e-10);
        CHECK(std::fabs(prof.u[i] + r * r / 10.0) < 1e-10);
        CHECK(std::fabs(prof.du[i] + r / 5.0) < 1e-10);
    }
}

TEST_CASE("critical solution re-integrates to the closed form") {
    const ProblemParams prm = oracle::critical_params();
    const std::vector<double> probe{0.1, 1.0, 10.0};

    auto max_rel_err = [&](double tol) {
        const RadialProfile prof = integrate(prm, exact_state(0.01), 10.0, tol, probe);
        REQUIRE(prof.size() == probe.size());
        double worst = 0.0;
        for (std::size_t i = 0; i < probe.size(); ++i) {
            const auto ref = oracle::critical_point(probe[i]);
            worst = std::max(worst, std::fabs(prof.u[i] - ref.u) / ref.u);
            worst = std::max(worst, std::fabs(prof.v[i] - ref.v) / ref.v);
        }
        return worst;
    };

    const double e6 = max_rel_err(1e-6), e8 = max_rel_err(1e-8), e10 = max_rel_err(1e-10);
    CHECK(e10 < 1e-6); // acceptance-level bound with two orders of headroom
    CHECK(e8 < e6);
    CHECK(e10 < e8);
}

TEST_CASE("integrate validates its arguments") {
    const ProblemParams prm{5, 0.0, 0.0, 3.0};
    const OdeState st = series_start(prm, 1.0, 1.0, 0.01);
    CHECK_THROWS_AS(integrate(prm, st, 0.01, 1e-10), validation_error); // empty span
    CHECK_THROWS_AS(integrate(prm, st, 1.0, 1e-2), validation_error);   // tol out of range
    CHECK_THROWS_AS(integrate(prm, st, -1.0, 1e-10), validation_error); // r <= 0
}

TEST_CASE("classification alternatives at the center") {
    const ProblemParams prm{5, 0.0, 0.0, 3.0};

    const auto neg_b = classify_trajectory(prm, 1.0, -0.5, 100.0);
    CHECK(neg_b.kind == TrajectoryKind::v_crossed_zero);
    REQUIRE(neg_b.location.has_value());
    CHECK(*neg_b.location == 0.0);

    const auto zero_b = classify_trajectory(prm, 1.0, 0.0, 100.0);
    CHECK(zero_b.kind == TrajectoryKind::v_crossed_zero);

    const auto zero_a = classify_trajectory(prm, 0.0, 1.0, 100.0);
    CHECK(zero_a.kind == TrajectoryKind::u_crossed_zero);

    const auto trivial = classify_trajectory(prm, 0.0, 0.0, 100.0);
    CHECK(trivial.kind == TrajectoryKind::positive_on_window);
    CHECK_FALSE(trivial.location.has_value());
}

TEST_CASE("critical data stays positive on a long window") {
    const ProblemParams prm = oracle::critical_params();
    const double c = oracle::critical_c();
    const auto out = classify_trajectory(prm, c, 5.0 * c, 1e3, 1e-12);
    CHECK(out.kind == TrajectoryKind::positive_on_window);

    const RadialProfile& p = out.profile;
    REQUIRE(p.size() > 100);

    SECTION("monotone fluxes r^{N-1} u' and r^{N-1} v'") {
        double prev_u = 0.0, prev_v = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double fu = std::pow(p.r[i], 4.0) * p.du[i];
            const double fv = std::pow(p.r[i], 4.0) * p.dv[i];
            if (i > 0) {
                CHECK(fu <= prev_u + 1e-9 * (1.0 + std::fabs(prev_u)));
                CHECK(fv <= prev_v + 1e-9 * (1.0 + std::fabs(prev_v)));
            }
            prev_u = fu;
            prev_v = fv;
        }
    }
    SECTION("center monotonicity quantities stay nonnegative") {
        for (std::size_t i = 0; i < p.size(); i += 7) {
            CHECK(p.r[i] * p.du[i] + 3.0 * p.u[i] > -1e-10);
            CHECK(p.r[i] * p.dv[i] + 3.0 * p.v[i] > -1e-10);
        }
    }
    SECTION("flux equals the weighted volume integral of v") {
        // -r^{N-1} u'(r) = int_0^r s^{N-alpha-1} v ds; trapezoid on the
        // accepted-step nodes is second order, hence the loose tolerance
        std::size_t mid = 0;
        while (mid + 1 < p.size() && p.r[mid] < 1.0) ++mid;
        const double lhs = -std::pow(p.r[mid], 4.0) * p.du[mid];
        CHECK(lhs == Catch::Approx(flux_integral(p, mid)).epsilon(2e-3));
    }
}

TEST_CASE("subcritical trajectories always cross before r = 1e4") {
    const ProblemParams prm{5, 0.0, 0.0, 3.0};
    for (double b : {1e-3, 0.1, 1.0, 10.0, 1e3}) {
        const auto out = classify_trajectory(prm, 1.0, b, 1e4, 1e-10);
        CHECK((out.kind == TrajectoryKind::u_crossed_zero ||
               out.kind == TrajectoryKind::v_crossed_zero));
        REQUIRE(out.location.has_value());
        CHECK(*out.location < 1e4);
        CHECK(*out.location > 0.0);
    }
}

TEST_CASE("classification is similarity invariant") {
    const ProblemParams prm{5, 0.0, 0.0, 3.0};
    // u_lam(r) = lam^2 u(lam r), v_lam(r) = lam^4 v(lam r) maps trajectories to
    // trajectories; with lam = 2, center data (1, b) -> (4, 16 b) and the event
    // radius halves.  b = 10 crosses in u, b = 0.01 crosses in v.
    for (double b : {10.0, 0.01}) {
        const auto base = classify_trajectory(prm, 1.0, b, 50.0, 1e-11);
        const auto scaled = classify_trajectory(prm, 4.0, 16.0 * b, 25.0, 1e-11);
        CHECK(base.kind == scaled.kind);
        REQUIRE(base.location.has_value());
        REQUIRE(scaled.location.has_value());
        CHECK(*scaled.location == Catch::Approx(*base.location / 2.0).epsilon(1e-6));
    }
}

TEST_CASE("transformed and physical charts integrate to the same trajectory") {
    const ProblemParams prm{5, 0.5, 0.5, 3.0};
    const OdeState phys = series_start(prm, 1.0, 1.0, 1e-4);

    // the chart run carries a larger error constant (z spans nine decades, so
    // the absolute-error floor dominates its weight early on): integrate both
    // at 1e-12 to land the agreement safely inside 1e-8
    const RadialProfile from_phys = integrate(prm, phys, 1.0, 1e-12, {0.5, 1.0});

    const auto ch = physical_point_to_chart(prm, ChartKind::interior, phys.x, phys.y[0],
                                            phys.y[1], phys.y[2], phys.y[3]);
    OdeState chart;
    chart.chart = ChartKind::interior;
    chart.x = ch[0];
    chart.y = {ch[1], ch[2], ch[3], ch[4]};
    const RadialProfile from_chart =
        integrate(prm, chart, 0.0, 1e-12, {-std::log(0.5), 0.0});

    REQUIRE(from_phys.size() == 2);
    REQUIRE(from_chart.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(from_chart.r[i] == Catch::Approx(from_phys.r[i]).epsilon(1e-12));
        CHECK(from_chart.u[i] == Catch::Approx(from_phys.u[i]).epsilon(1e-8));
        CHECK(from_chart.v[i] == Catch::Approx(from_phys.v[i]).epsilon(1e-8));
    }
}

TEST_CASE("navier shooting solves the unit-ball problem") {
    const ProblemParams prm{5, 0.0, 0.0, 3.0};
    const BvpSolution sol = shoot_navier_ball(prm, 1.0, 1e-11);

    CHECK(sol.profile.r.back() == 1.0);
    CHECK(sol.residual_u < 1e-8 * sol.center_u);
    CHECK(sol.residual_v < 1e-8 * sol.center_v);
    CHECK(sol.center_u > 0.0);
    CHECK(sol.center_v > 0.0);

    SECTION("positivity of both components inside the ball") {
        for (std::size_t i = 0; i + 1 < sol.profile.size(); ++i) {
            CHECK(sol.profile.u[i] > 0.0);
            CHECK(sol.profile.v[i] > 0.0);
        }
    }
    SECTION("matches the finite-volume collocation oracle") {
        const int n = 2048;
        const auto ref = oracle::collocate_navier_ball(prm, 1.0, n);
        std::vector<double> nodes(ref.r.begin() + 1, ref.r.end()); // skip r = 0
        const BvpSolution on_grid = shoot_navier_ball(prm, 1.0, 1e-11, nodes);
        double worst_u = 0.0, worst_v = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            worst_u = std::max(worst_u, std::fabs(on_grid.profile.u[i] - ref.u[i + 1]));
            worst_v = std::max(worst_v, std::fabs(on_grid.profile.v[i] - ref.v[i + 1]));
        }
        CHECK(worst_u / on_grid.center_u < 1e-4);
        CHECK(worst_v / on_grid.center_v < 1e-4);
    }
    SECTION("similarity rescaling to the double ball") {
        const BvpSolution big = shoot_navier_ball(prm, 2.0, 1e-11);
        // u_2(r) = 2^{-theta} u_1(r/2) with theta = 2
        CHECK(big.center_u == Catch::Approx(sol.center_u / 4.0).epsilon(1e-7));
        CHECK(big.center_v == Catch::Approx(sol.center_v / 16.0).epsilon(1e-7));
        const std::vector<double> nodes{0.5, 1.0, 1.5, 2.0};
        const BvpSolution big2 = shoot_navier_ball(prm, 2.0, 1e-11, nodes);
        const BvpSolution small2 = shoot_navier_ball(prm, 1.0, 1e-11, {0.25, 0.5, 0.75, 1.0});
        for (std::size_t i = 0; i < nodes.size(); ++i)
            CHECK(big2.profile.u[i] == Catch::Approx(small2.profile.u[i] / 4.0).epsilon(1e-7));
    }
    SECTION("supercritical exponents are refused") {
        CHECK_THROWS_AS(shoot_navier_ball(ProblemParams{5, 0.0, 0.0, 10.0}, 1.0),
                        validation_error);
    }
}

TEST_CASE("chart-seeded classification handles alpha >= 2") {
    // alpha = 2: p_s = 7/3; both p below it
    for (double p : {1.5, 2.0}) {
        const ProblemParams prm{5, 2.0, 0.0, p};
        for (double b : {1e-2, 1.0, 1e2}) {
            const auto out = classify_trajectory(prm, 1.0, b, 1e4, 1e-10);
            CHECK((out.kind == TrajectoryKind::u_crossed_zero ||
                   out.kind == TrajectoryKind::v_crossed_zero));
        }
    }
    // seeding requires the forcing to decay: p >= p_s is refused
    CHECK_THROWS_AS(classify_trajectory(ProblemParams{5, 2.0, 0.0, 3.0}, 1.0, 1.0, 10.0),
                    validation_error);
}

TEST_CASE("scan reports are deterministic and aggregate correctly") {
    const ProblemParams base{5, 0.0, 0.0, 3.0};
    std::vector<double> b_grid;
    for (int i = 0; i < 6; ++i) b_grid.push_back(std::pow(10.0, -2.0 + 4.0 * i / 5.0));

    const auto seq = liouville_scan(base, {2.0, 3.0}, b_grid, 1e3, 1e-9, 1);
    const auto par = liouville_scan(base, {2.0, 3.0}, b_grid, 1e3, 1e-9, 4);
    REQUIRE(seq.rows.size() == 12);
    REQUIRE(par.rows.size() == 12);
    for (std::size_t i = 0; i < seq.rows.size(); ++i) {
        CHECK(seq.rows[i].p == par.rows[i].p);
        CHECK(seq.rows[i].b == par.rows[i].b);
        CHECK(seq.rows[i].kind == par.rows[i].kind);
        REQUIRE(seq.rows[i].location.has_value());
        REQUIRE(par.rows[i].location.has_value());
        CHECK(*seq.rows[i].location == *par.rows[i].location);
    }
    CHECK(seq.n_positive == 0);
    CHECK(seq.n_positive_subcritical == 0);
    CHECK(seq.fraction_positive == 0.0);

    SECTION("empty grids produce an empty report") {
        const auto empty = liouville_scan(base, {2.0}, {}, 1e3);
        CHECK(empty.rows.empty());
    }
    SECTION("csv serialization carries the four columns") {
        std::ostringstream os;
        write_scan_csv(os, seq);
        const std::string text = os.str();
        CHECK(text.find("p,b,outcome,event_location") == 0);
        CHECK(text.find("UCrossedZero") != std::string::npos);
    }
}
