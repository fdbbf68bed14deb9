#pragma once

// Radial profiles and the Emden-Fowler change of variables.
//
// Physical variables on r > 0:  u, u', v, v' with v = -r^alpha * Delta u, so
// the fourth-order equation splits into
//     -(r^{N-1} u')' = r^{N-alpha-1} v,
//     -(r^{N-1} v')' = r^{N+l-1} |u|^{p-1} u.
//
// Interior chart (t = -ln r):   w = r^{(N'-4)/2} u,  z = r^{(N-alpha)/2} v.
// Exterior chart (t = +ln r, alpha = 2 only):  w = z-weight = r^{(N-2)/2}.
//
// In the interior chart Delta u factorizes through
//     L w = w'' + (alpha - 2) w' - Q w,          Q = (N-alpha)(N'-4)/4,
// and the weighted Hessian energy becomes a constant-coefficient form:
//     int_B |x|^alpha (Delta u)^2 dx = omega_N * int (L w)^2 dt
//                                    = omega_N * int (w''^2 + 2 delta~ w'^2 + delta w^2) dt
// (the second equality for compactly supported w).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "exponents.hpp"

namespace henonlab {

// |S^{N-1}| = 2 pi^{N/2} / Gamma(N/2)
inline double surface_area(int N) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
}

// Weight exponent of the interior-chart L^q integrand:
//   int_0^R r^{N+l-1} |u|^q dr = int_{-ln R}^inf e^{-q_* t} |w|^q dt,
//   q_* = (N' + tau) - q (N' - 4)/2;  q_* = 0 exactly at q = p_s + 1.
inline double q_star(const ProblemParams& prm, double q) {
    const DerivedExponents d = derive_exponents(prm);
    return (d.Nprime + d.tau) - q * (d.Nprime - 4.0) / 2.0;
}

enum class ChartKind { physical, interior, exterior };
enum class ProfileOrigin { shot, bvp, synthetic, transformed };

// ------------------------------------------------------------------ profiles

struct RadialProfile {
    std::vector<double> r, u, du, v, dv;
    ProblemParams params;
    ProfileOrigin origin = ProfileOrigin::synthetic;

    std::size_t size() const { return r.size(); }
};

struct TransformedProfile {
    ChartKind chart = ChartKind::interior;
    std::vector<double> t, w, dw, z, dz;
    ProblemParams params;

    std::size_t size() const { return t.size(); }
};

inline void validate(const RadialProfile& p) {
    validate(p.params);
    const std::size_t n = p.r.size();
    if (n < 2) throw validation_error("profile: needs at least 2 nodes");
    if (p.u.size() != n || p.du.size() != n || p.v.size() != n || p.dv.size() != n)
        throw validation_error("profile: sample arrays must all have the node count");
    if (!(p.r.front() > 0.0)) throw validation_error("profile: nodes must be positive");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(p.r[i] < p.r[i + 1])) throw validation_error("profile: nodes must be strictly increasing");
}

inline void validate(const TransformedProfile& p) {
    validate(p.params);
    if (p.chart == ChartKind::physical)
        throw validation_error("transformed profile: chart must be interior or exterior");
    if (p.chart == ChartKind::exterior && p.params.alpha != 2.0)
        throw validation_error("exterior chart requires alpha == 2");
    const std::size_t n = p.t.size();
    if (n < 2) throw validation_error("profile: needs at least 2 nodes");
    if (p.w.size() != n || p.dw.size() != n || p.z.size() != n || p.dz.size() != n)
        throw validation_error("profile: sample arrays must all have the node count");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(p.t[i] < p.t[i + 1])) throw validation_error("profile: nodes must be strictly increasing");
}

// ------------------------------------------------------------ chart mappings

// Pointwise maps between (r, u, u', v, v') and (t, w, w', z, z').  The array
// layout is {location, first component, its derivative, second component, its
// derivative} in both directions.
inline std::array<double, 5> physical_point_to_chart(const ProblemParams& prm, ChartKind chart,
                                                     double r, double u, double du, double v,
                                                     double dv) {
    if (!(r > 0.0)) throw validation_error("chart map: r must be > 0");
    const int N = prm.N;
    const double alpha = prm.alpha;
    if (chart == ChartKind::interior) {
        const double s = 0.5 * (N + alpha - 4.0);
        const double m = 0.5 * (N - alpha);
        const double rs = std::pow(r, s), rm = std::pow(r, m);
        return {-std::log(r), rs * u, -(s * rs * u + rs * r * du), rm * v,
                -(m * rm * v + rm * r * dv)};
    }
    if (chart == ChartKind::exterior) {
        if (alpha != 2.0) throw validation_error("exterior chart requires alpha == 2");
        const double s = 0.5 * (N - 2.0);
        const double rs = std::pow(r, s);
        return {std::log(r), rs * u, s * rs * u + rs * r * du, rs * v, s * rs * v + rs * r * dv};
    }
    throw validation_error("chart map: chart must be interior or exterior");
}

inline std::array<double, 5> chart_point_to_physical(const ProblemParams& prm, ChartKind chart,
                                                     double t, double w, double dw, double z,
                                                     double dz) {
    const int N = prm.N;
    const double alpha = prm.alpha;
    if (chart == ChartKind::interior) {
        const double s = 0.5 * (N + alpha - 4.0);
        const double m = 0.5 * (N - alpha);
        const double es = std::exp(s * t);  // r^{-s}
        const double em = std::exp(m * t);  // r^{-m}
        const double e1 = std::exp(t);      // 1/r
        return {std::exp(-t), es * w, -es * e1 * (s * w + dw), em * z, -em * e1 * (m * z + dz)};
    }
    if (chart == ChartKind::exterior) {
        if (alpha != 2.0) throw validation_error("exterior chart requires alpha == 2");
        const double s = 0.5 * (N - 2.0);
        const double es = std::exp(-s * t); // r^{-s}
        const double e1 = std::exp(-t);     // 1/r
        return {std::exp(t), es * w, es * e1 * (dw - s * w), es * z, es * e1 * (dz - s * z)};
    }
    throw validation_error("chart map: chart must be interior or exterior");
}

inline TransformedProfile to_transformed(const RadialProfile& prof, ChartKind chart) {
    validate(prof);
    if (chart == ChartKind::physical)
        throw validation_error("to_transformed: chart must be interior or exterior");
    if (chart == ChartKind::exterior && prof.params.alpha != 2.0)
        throw validation_error("exterior chart requires alpha == 2");

    const int N = prof.params.N;
    const double alpha = prof.params.alpha;
    const std::size_t n = prof.size();
    TransformedProfile out;
    out.chart = chart;
    out.params = prof.params;
    out.t.resize(n);
    out.w.resize(n);
    out.dw.resize(n);
    out.z.resize(n);
    out.dz.resize(n);

    if (chart == ChartKind::interior) {
        const double s = 0.5 * (N + alpha - 4.0); // u weight
        const double m = 0.5 * (N - alpha);       // v weight
        // t = -ln r decreases with r: reverse so t_nodes increase.
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = n - 1 - i;
            const double r = prof.r[j];
            const double rs = std::pow(r, s);
            const double rm = std::pow(r, m);
            out.t[i] = -std::log(r);
            out.w[i] = rs * prof.u[j];
            out.dw[i] = -(s * rs * prof.u[j] + rs * r * prof.du[j]);
            out.z[i] = rm * prof.v[j];
            out.dz[i] = -(m * rm * prof.v[j] + rm * r * prof.dv[j]);
        }
    } else {
        const double s = 0.5 * (N - 2.0); // both components share the weight
        for (std::size_t i = 0; i < n; ++i) {
            const double r = prof.r[i];
            const double rs = std::pow(r, s);
            out.t[i] = std::log(r);
            out.w[i] = rs * prof.u[i];
            out.dw[i] = s * rs * prof.u[i] + rs * r * prof.du[i];
            out.z[i] = rs * prof.v[i];
            out.dz[i] = s * rs * prof.v[i] + rs * r * prof.dv[i];
        }
    }
    return out;
}

inline RadialProfile from_transformed(const TransformedProfile& tprof) {
    validate(tprof);
    const int N = tprof.params.N;
    const double alpha = tprof.params.alpha;
    const std::size_t n = tprof.size();
    RadialProfile out;
    out.params = tprof.params;
    out.origin = ProfileOrigin::transformed;
    out.r.resize(n);
    out.u.resize(n);
    out.du.resize(n);
    out.v.resize(n);
    out.dv.resize(n);

    if (tprof.chart == ChartKind::interior) {
        const double s = 0.5 * (N + alpha - 4.0);
        const double m = 0.5 * (N - alpha);
        // r = e^{-t} decreases with t: reverse back to increasing r.
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = n - 1 - i;
            const double t = tprof.t[j];
            out.r[i] = std::exp(-t);
            const double es = std::exp(s * t);     // r^{-s}
            const double em = std::exp(m * t);     // r^{-m}
            const double e1 = std::exp(t);         // 1/r
            out.u[i] = es * tprof.w[j];
            out.du[i] = -es * e1 * (s * tprof.w[j] + tprof.dw[j]);
            out.v[i] = em * tprof.z[j];
            out.dv[i] = -em * e1 * (m * tprof.z[j] + tprof.dz[j]);
        }
    } else {
        const double s = 0.5 * (N - 2.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = tprof.t[i];
            out.r[i] = std::exp(t);
            const double es = std::exp(-s * t); // r^{-s}
            const double e1 = std::exp(-t);     // 1/r
            out.u[i] = es * tprof.w[i];
            out.du[i] = es * e1 * (tprof.dw[i] - s * tprof.w[i]);
            out.v[i] = es * tprof.z[i];
            out.dv[i] = es * e1 * (tprof.dz[i] - s * tprof.z[i]);
        }
    }
    return out;
}

// --------------------------------------------------------------- quadratures

// Composite trapezoid on the stored (possibly non-uniform) nodes.
inline double trapezoid(const std::vector<double>& x, const std::vector<double>& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
        acc += 0.5 * (x[i + 1] - x[i]) * (f[i] + f[i + 1]);
    return acc;
}

// omega_N * int (w''^2 + 2 delta~ w'^2 + delta w^2) dt, with w'' reconstructed
// by centered second differences (copied one node inward at the ends).
inline double quadratic_form(const ProblemParams& prm, const TransformedProfile& tprof) {
    validate(tprof);
    if (tprof.chart != ChartKind::interior)
        throw validation_error("quadratic_form: interior chart required");
    const std::size_t n = tprof.size();
    if (n < 5) throw validation_error("quadratic_form: needs at least 5 nodes");
    const DerivedExponents d = derive_exponents(prm);

    std::vector<double> wpp(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = tprof.t[i] - tprof.t[i - 1];
        const double hr = tprof.t[i + 1] - tprof.t[i];
        wpp[i] = 2.0 * ((tprof.w[i + 1] - tprof.w[i]) / hr - (tprof.w[i] - tprof.w[i - 1]) / hl) /
                 (hl + hr);
    }
    wpp[0] = wpp[1];
    wpp[n - 1] = wpp[n - 2];

    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i)
        f[i] = wpp[i] * wpp[i] + 2.0 * d.delta_tilde * tprof.dw[i] * tprof.dw[i] +
               d.delta * tprof.w[i] * tprof.w[i];
    return surface_area(prm.N) * trapezoid(tprof.t, f);
}

// (omega_N int_0^R r^{N+l-1} |u|^q dr)^{1/q}.  The first cell [0, r_0] is
// integrated analytically with u frozen at its removable-singularity limit
// u(0) ~ u(r_0); the weight integrates to r_0^{N+l}/(N+l) with N + l > 0.
inline double weighted_norm(const ProblemParams& prm, const RadialProfile& prof, double q,
                            double R) {
    validate(prof);
    validate(prm);
    if (!(q >= 1.0)) throw validation_error("weighted_norm: q must be >= 1");
    if (!(R > 0.0)) throw validation_error("weighted_norm: R must be > 0");
    if (prof.r.back() < R * (1.0 - 1e-12))
        throw validation_error("weighted_norm: profile does not cover (0, R]");

    const double wexp = prm.N + prm.l - 1.0; // > -1 by admissibility
    auto integrand = [&](double r, double u) {
        return std::pow(r, wexp) * std::pow(std::fabs(u), q);
    };

    const double r0 = std::min(prof.r.front(), R);
    double acc = std::pow(r0, wexp + 1.0) / (wexp + 1.0) * std::pow(std::fabs(prof.u[0]), q);
    for (std::size_t i = 0; i + 1 < prof.size() && prof.r[i] < R; ++i) {
        const double ra = prof.r[i];
        double rb = prof.r[i + 1];
        double ub = prof.u[i + 1];
        if (rb > R) { // partial last cell: linear interpolation of u at R
            const double th = (R - ra) / (rb - ra);
            ub = prof.u[i] + th * (prof.u[i + 1] - prof.u[i]);
            rb = R;
        }
        acc += 0.5 * (rb - ra) * (integrand(ra, prof.u[i]) + integrand(rb, ub));
    }
    return std::pow(surface_area(prm.N) * acc, 1.0 / q);
}

// ----------------------------------------------------------------- CSV forms

namespace detail {

inline void write_csv_row(std::ostream& os, const double* vals, int count) {
    char buf[32];
    for (int i = 0; i < count; ++i) {
        const int len = std::snprintf(buf, sizeof buf, "%.17g", vals[i]);
        os.write(buf, len);
        os.put(i + 1 < count ? ',' : '\n');
    }
}

inline std::vector<std::array<double, 5>> read_csv_rows(std::istream& is, const char* header) {
    std::string line;
    if (!std::getline(is, line)) throw io_error("profile csv: empty stream");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header)
        throw validation_error(std::string("profile csv: expected header '") + header + "', got '" +
                               line + "'");
    std::vector<std::array<double, 5>> rows;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::array<double, 5> row{};
        std::size_t pos = 0;
        for (int col = 0; col < 5; ++col) {
            const std::size_t next = (col < 4) ? line.find(',', pos) : line.size();
            if (next == std::string::npos)
                throw validation_error("profile csv: malformed row at line " + std::to_string(lineno));
            try {
                row[col] = std::stod(line.substr(pos, next - pos));
            } catch (const std::exception&) {
                throw validation_error("profile csv: bad number at line " + std::to_string(lineno));
            }
            pos = next + 1;
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace detail

inline void write_profile_csv(std::ostream& os, const RadialProfile& p) {
    os << "r,u,du,v,dv\n";
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double row[5] = {p.r[i], p.u[i], p.du[i], p.v[i], p.dv[i]};
        detail::write_csv_row(os, row, 5);
    }
}

inline void write_profile_csv(std::ostream& os, const TransformedProfile& p) {
    os << "t,w,dw,z,dz\n";
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double row[5] = {p.t[i], p.w[i], p.dw[i], p.z[i], p.dz[i]};
        detail::write_csv_row(os, row, 5);
    }
}

inline RadialProfile read_profile_csv(std::istream& is, const ProblemParams& prm,
                                      ProfileOrigin origin = ProfileOrigin::synthetic) {
    RadialProfile p;
    p.params = prm;
    p.origin = origin;
    for (const auto& row : detail::read_csv_rows(is, "r,u,du,v,dv")) {
        p.r.push_back(row[0]);
        p.u.push_back(row[1]);
        p.du.push_back(row[2]);
        p.v.push_back(row[3]);
        p.dv.push_back(row[4]);
    }
    validate(p);
    return p;
}

inline TransformedProfile read_transformed_csv(std::istream& is, const ProblemParams& prm,
                                               ChartKind chart = ChartKind::interior) {
    TransformedProfile p;
    p.params = prm;
    p.chart = chart;
    for (const auto& row : detail::read_csv_rows(is, "t,w,dw,z,dz")) {
        p.t.push_back(row[0]);
        p.w.push_back(row[1]);
        p.dw.push_back(row[2]);
        p.z.push_back(row[3]);
        p.dz.push_back(row[4]);
    }
    validate(p);
    return p;
}

} // namespace henonlab
