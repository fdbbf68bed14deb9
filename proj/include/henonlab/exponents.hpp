#pragma once

// Parameter algebra for the weighted fourth-order problem
//
//     Delta(|x|^alpha Delta u) = |x|^l u^p   in R^N (or a ball),  N >= 5,
//
// written throughout in terms of N' = N + alpha and tau = l - alpha.
// Everything in this header is closed-form arithmetic on the parameter tuple
// (N, alpha, l, p): admissibility checks, derived exponents, the embedding
// regime split, the spectrum of the linearized Emden-Fowler system, the
// Rellich-Pohozaev coefficient, and the regularity-bootstrap sequences.

#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "errors.hpp"

namespace henonlab {

// Exact rational type used for the bootstrap-sequence identities.  Conversion
// from double is exact (every finite double is a dyadic rational).
using rational = boost::multiprecision::cpp_rational;

// ---------------------------------------------------------------- parameters

// The problem tuple.  Admissible iff
//   N >= 5,   4 < N + alpha < 2N,   l - alpha > -4,   p > 1.
struct ProblemParams {
    int N = 5;          // space dimension
    double alpha = 0.0; // weight exponent inside the operator, |x|^alpha
    double l = 0.0;     // weight exponent of the nonlinearity, |x|^l
    double p = 3.0;     // nonlinearity exponent
};

// Throws validation_error naming the first violated admissibility inequality.
inline void validate(const ProblemParams& q) {
    std::ostringstream os;
    if (q.N < 5) {
        os << "invalid params: N = " << q.N << " violates N >= 5";
        throw validation_error(os.str());
    }
    const double Nprime = q.N + q.alpha;
    if (!(Nprime > 4.0)) {
        os << "invalid params: N' = N + alpha = " << Nprime << " violates N + alpha > 4";
        throw validation_error(os.str());
    }
    if (!(Nprime < 2.0 * q.N)) {
        os << "invalid params: N' = N + alpha = " << Nprime << " violates N + alpha < 2N (alpha < N)";
        throw validation_error(os.str());
    }
    if (!(q.l - q.alpha > -4.0)) {
        os << "invalid params: tau = l - alpha = " << (q.l - q.alpha) << " violates l - alpha > -4";
        throw validation_error(os.str());
    }
    if (!(q.p > 1.0)) {
        os << "invalid params: p = " << q.p << " violates p > 1";
        throw validation_error(os.str());
    }
}

// --------------------------------------------------------- derived exponents

// Every closed-form exponent and constant derived from (N, alpha, l, p).
struct DerivedExponents {
    double Nprime;       // N' = N + alpha
    double tau;          // tau = l - alpha
    double p_s;          // critical exponent (N' + 4 + 2 tau)/(N' - 4)
    double p_star;       // interior-chart forcing rate ([N'+4+2 tau] - [N'-4] p)/2
    double p_upper_star; // exterior-chart forcing rate ((N+2+2l) - (N-2) p)/2
    double delta;        // [((N-2)/2)^2 - ((alpha-2)/2)^2]^2
    double delta_tilde;  // ((N-2)/2)^2 + ((alpha-2)/2)^2
    double gamma_alpha;  // ((N-2)/2)^2 - ((alpha-2)/2)^2   (Hardy-Rellich constant)
    double beta;         // (2 + l)/(p - 1)
    double gamma;        // 4/(p - 1)
    double sobolev_exp;  // (N + 4)/(N - 4), the unweighted critical exponent
};

inline DerivedExponents derive_exponents(const ProblemParams& q) {
    validate(q);
    DerivedExponents d{};
    d.Nprime = q.N + q.alpha;
    d.tau = q.l - q.alpha;
    d.p_s = (d.Nprime + 4.0 + 2.0 * d.tau) / (d.Nprime - 4.0);
    d.p_star = ((d.Nprime + 4.0 + 2.0 * d.tau) - (d.Nprime - 4.0) * q.p) / 2.0;
    d.p_upper_star = ((q.N + 2.0 + 2.0 * q.l) - (q.N - 2.0) * q.p) / 2.0;
    const double a = 0.5 * (q.N - 2.0);
    const double b = 0.5 * (q.alpha - 2.0);
    d.gamma_alpha = a * a - b * b;
    d.delta = d.gamma_alpha * d.gamma_alpha;
    d.delta_tilde = a * a + b * b;
    d.beta = (2.0 + q.l) / (q.p - 1.0);
    d.gamma = 4.0 / (q.p - 1.0);
    d.sobolev_exp = (q.N + 4.0) / (q.N - 4.0);
    return d;
}

// ------------------------------------------------------------- regime report

// Position of p relative to a threshold exponent.
enum class Criticality { subcritical, critical, supercritical };

// Embedding regime of the weighted norms:
//   full_critical_range : alpha >= (N-4) tau / 4; the embedding reaches the
//                         critical q = p_s + 1 and is compact below it.
//   sobolev_capped      : alpha <  (N-4) tau / 4; p_s exceeds (N+4)/(N-4) but
//                         the general embedding only reaches q = 2N/(N-4).
enum class EmbeddingRegime { full_critical_range, sobolev_capped };

struct RegimeReport {
    EmbeddingRegime regime;
    double alpha_threshold; // (N - 4) tau / 4
    double q_max;           // top of the admissible q-range [1, q_max]
    double p_s;
    double sobolev_exp;
    Criticality p_vs_ps;
    Criticality p_vs_sobolev;
};

inline Criticality classify_against(double p, double threshold) {
    const double tol = 1e-12 * std::max(1.0, std::fabs(threshold));
    if (std::fabs(p - threshold) <= tol) return Criticality::critical;
    return p < threshold ? Criticality::subcritical : Criticality::supercritical;
}

inline RegimeReport classify_regime(const ProblemParams& q) {
    const DerivedExponents d = derive_exponents(q);
    RegimeReport r{};
    r.alpha_threshold = (q.N - 4.0) * d.tau / 4.0;
    // The boundary alpha == (N-4) tau / 4 belongs to the ">=" regime.
    r.regime = (q.alpha >= r.alpha_threshold) ? EmbeddingRegime::full_critical_range
                                              : EmbeddingRegime::sobolev_capped;
    r.p_s = d.p_s;
    r.sobolev_exp = d.sobolev_exp;
    r.q_max = (r.regime == EmbeddingRegime::full_critical_range)
                  ? d.p_s + 1.0
                  : 2.0 * q.N / (q.N - 4.0);
    r.p_vs_ps = classify_against(q.p, d.p_s);
    r.p_vs_sobolev = classify_against(q.p, d.sobolev_exp);
    return r;
}

// ----------------------------------------------------- linearization spectrum

// The first-order Emden-Fowler system (w, dw, z, dz) linearized at the origin
// has constant matrix
//
//         [ 0      1      0     0   ]
//     A = [ Q    2-alpha  -1    0   ],   Q = (N - alpha)(N' - 4)/4,
//         [ 0      0      0     1   ]
//         [ 0      0      Q  alpha-2]
//
// with eigenvalues -(N'-4)/2, +(N'-4)/2, -(N-alpha)/2, +(N-alpha)/2 (in the
// order stored below).  For alpha == 2 the two magnitudes coincide and A is
// defective: each double eigenvalue keeps a single (w-type) eigenvector.
struct LinearizationSpectrum {
    std::array<std::array<double, 4>, 4> matrix;
    std::array<double, 4> eigenvalues;
    std::array<std::array<double, 4>, 4> eigenvectors; // eigenvectors[k] pairs with eigenvalues[k]
};

inline LinearizationSpectrum linearization_spectrum(const ProblemParams& q) {
    validate(q);
    const double s = 0.5 * (q.N + q.alpha - 4.0); // (N' - 4)/2
    const double m = 0.5 * (q.N - q.alpha);       // (N - alpha)/2
    const double Q = s * m;                       // (N - alpha)(N' - 4)/4
    const double c = q.alpha - 2.0;

    LinearizationSpectrum out{};
    out.matrix = {{{0.0, 1.0, 0.0, 0.0},
                   {Q, -c, -1.0, 0.0},
                   {0.0, 0.0, 0.0, 1.0},
                   {0.0, 0.0, Q, c}}};
    out.eigenvalues = {-s, s, -m, m};

    // lambda in {-s, +m} solves lambda^2 + c*lambda - Q = 0: pure (w, dw)
    // directions.  lambda in {+s, -m} solves lambda^2 - c*lambda - Q = 0 and
    // carries a z-component g = Q - c*lambda - lambda^2 (nonzero iff alpha != 2).
    auto w_mode = [](double lam) { return std::array<double, 4>{1.0, lam, 0.0, 0.0}; };
    auto z_mode = [&](double lam) {
        const double g = Q - c * lam - lam * lam;
        if (g == 0.0) return w_mode(lam); // alpha == 2: defective pair, eigenvector repeats
        return std::array<double, 4>{1.0, lam, g, lam * g};
    };
    out.eigenvectors = {w_mode(-s), z_mode(s), z_mode(-m), w_mode(m)};
    return out;
}

// ------------------------------------------------------ Pohozaev coefficient

// Coefficient of the volume integral in the Rellich-Pohozaev identity:
//   (N' + tau)/(p + 1) - (N' - 4)/2.
// Strictly positive iff p < p_s, zero iff p = p_s.  The representable critical
// exponent is snapped to the algebraic value: rounding in the two-term form
// would otherwise leave a stray ulp exactly where downstream identity checks
// rely on the coefficient vanishing.
inline double pohozaev_coefficient(const ProblemParams& q) {
    const DerivedExponents d = derive_exponents(q);
    if (q.p == d.p_s) return 0.0;
    return (d.Nprime + d.tau) / (q.p + 1.0) - (d.Nprime - 4.0) / 2.0;
}

// --------------------------------------------------------- bootstrap sequences

// Regularity-bootstrap exponent sequences, kept in exact rational arithmetic:
//   sigma_0 = 0,  sigma_{k+1} = 2 + l + p sigma_k
//   b_0     = 0,  b_{k+1}     = p b_k + (2 + l)(k + 1)
// with closed forms
//   sigma_k = (2+l)(p^k - 1)/(p - 1),
//   b_k     = (2+l)[p^{k+1} - (k+1) p + k]/(p - 1)^2.
// degenerate_index is the first k with l + p sigma_k = -1 (the logarithmic
// case of the bootstrap), if any occurs for k <= k_max.
struct BootstrapSequence {
    std::vector<rational> sigma; // sigma_0 .. sigma_{k_max}
    std::vector<rational> b;     // b_0 .. b_{k_max}
    std::optional<int> degenerate_index;

    std::vector<double> sigma_as_double() const {
        std::vector<double> v;
        v.reserve(sigma.size());
        for (const auto& x : sigma) v.push_back(static_cast<double>(x));
        return v;
    }
    std::vector<double> b_as_double() const {
        std::vector<double> v;
        v.reserve(b.size());
        for (const auto& x : b) v.push_back(static_cast<double>(x));
        return v;
    }
};

inline rational rational_pow(const rational& x, int k) {
    rational r = 1;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

// Recursion-built sequences for exact rational (l, p), p > 1.
inline BootstrapSequence bootstrap_sequences(const rational& l, const rational& p, int k_max) {
    if (k_max < 1) throw validation_error("bootstrap_sequences: k_max must be >= 1");
    if (!(p > 1)) throw validation_error("bootstrap_sequences: p must be > 1");
    BootstrapSequence seq;
    seq.sigma.reserve(static_cast<std::size_t>(k_max) + 1);
    seq.b.reserve(static_cast<std::size_t>(k_max) + 1);
    seq.sigma.push_back(0);
    seq.b.push_back(0);
    for (int k = 0; k < k_max; ++k) {
        seq.sigma.push_back(2 + l + p * seq.sigma.back());
        seq.b.push_back(p * seq.b.back() + (2 + l) * (k + 1));
    }
    for (int k = 0; k <= k_max; ++k) {
        if (l + p * seq.sigma[static_cast<std::size_t>(k)] == -1) {
            seq.degenerate_index = k;
            break;
        }
    }
    return seq;
}

// Closed forms, for cross-checking the recursion exactly.
inline rational bootstrap_sigma_closed(const rational& l, const rational& p, int k) {
    return (2 + l) * (rational_pow(p, k) - 1) / (p - 1);
}
inline rational bootstrap_b_closed(const rational& l, const rational& p, int k) {
    const rational pm1 = p - 1;
    return (2 + l) * (rational_pow(p, k + 1) - (k + 1) * p + k) / (pm1 * pm1);
}

// Convenience overload: lifts the double fields of the params tuple to exact
// rationals (exact dyadic conversion) and runs the rational recursion.
inline BootstrapSequence bootstrap_sequences(const ProblemParams& q, int k_max) {
    validate(q);
    return bootstrap_sequences(rational(q.l), rational(q.p), k_max);
}

} // namespace henonlab
