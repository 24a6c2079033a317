#pragma once

// Closed-form stationary state and circulating current for a three-level
// ladder driven by a single reservoir with a frequency-dependent inverse
// temperature. All quantities are rational functions of the six channel
// rates, so they double as an independent oracle for the generic solver.

#include <cmath>

#include <Eigen/Dense>

#include "neqsteady/errors.hpp"
#include "neqsteady/rates.hpp"
#include "neqsteady/reservoir.hpp"
#include "neqsteady/system.hpp"

namespace neqsteady {

// Decay (minus) and excitation (plus) rates on the three gaps:
// a = e2 - e1, b = e3 - e2, c = e3 - e1.
struct SixRates {
    double gm_a = 0.0;
    double gp_a = 0.0;
    double gm_b = 0.0;
    double gp_b = 0.0;
    double gm_c = 0.0;
    double gp_c = 0.0;
};

inline SixRates six_rates(const RateSet& rs) {
    if (rs.n_levels != 3)
        fail_validation("InconsistentDimensions",
                        "six_rates requires a three-level system");
    SixRates sr;
    const int ca = rs.channel_of_pair(1, 0);
    const int cb = rs.channel_of_pair(2, 1);
    const int cc = rs.channel_of_pair(2, 0);
    sr.gm_a = rs.Gamma_minus[ca];
    sr.gp_a = rs.Gamma_plus[ca];
    sr.gm_b = rs.Gamma_minus[cb];
    sr.gp_b = rs.Gamma_plus[cb];
    sr.gm_c = rs.Gamma_minus[cc];
    sr.gp_c = rs.Gamma_plus[cc];
    return sr;
}

// Coefficients of the nonzero population eigenvalues: lambda^2 - b lambda + c,
// so lambda = (b +- sqrt(b^2 - 4c)) / 2 alongside the stationary zero.
struct EigenCoeffs {
    double b = 0.0;
    double c = 0.0;
};

inline EigenCoeffs population_eigen_coeffs(const SixRates& r) {
    EigenCoeffs ec;
    ec.b = r.gp_a + r.gp_c + r.gp_b + r.gm_a + r.gm_c + r.gm_b;
    ec.c = r.gp_a * r.gp_b + r.gp_a * r.gm_c + r.gp_a * r.gm_b +
           r.gp_c * r.gm_a + r.gp_c * r.gp_b + r.gp_c * r.gm_b +
           r.gm_a * r.gm_c + r.gm_a * r.gm_b + r.gp_b * r.gm_c;
    return ec;
}

// Shared denominator of the stationary ratios and of the closed current.
inline double ratio_denominator(const SixRates& r) {
    return r.gm_c * r.gm_a + r.gm_c * r.gp_b + r.gm_b * r.gm_a;
}

struct StationaryRatios {
    double X = 0.0;  // rho22 / rho11
    double Y = 0.0;  // rho33 / rho11
    double Z = 0.0;  // rho33 / rho22
};

inline StationaryRatios stationary_ratios(const SixRates& r) {
    const double den = ratio_denominator(r);
    if (den == 0.0)
        fail_numerical("DegenerateDenominator",
                       "stationary ratio denominator vanishes; the kernel is "
                       "not one-dimensional");
    StationaryRatios sr;
    sr.X = (r.gm_c * r.gp_a + r.gm_b * r.gp_a + r.gp_c * r.gm_b) / den;
    sr.Y = (r.gp_c * r.gm_a + r.gp_b * r.gp_a + r.gp_c * r.gp_b) / den;
    if (sr.X == 0.0)
        fail_numerical("DegenerateDenominator",
                       "middle level unpopulated; Z = rho33/rho22 undefined");
    sr.Z = sr.Y / sr.X;
    return sr;
}

inline Eigen::Vector3d closed_form_stationary(const SixRates& r) {
    const StationaryRatios sr = stationary_ratios(r);
    Eigen::Vector3d p(1.0, sr.X, sr.Y);
    return p / p.sum();
}

// delta = beta(a) a - beta(c) c + beta(b) b with c = a + b. Its sign fixes
// the circulation direction; it vanishes identically for constant beta.
inline double delta_invariant(const BetaProfile& beta_fn, double gap_a,
                              double gap_b) {
    if (gap_a <= 0.0 || gap_b <= 0.0)
        fail_validation("NonPositiveArgument", "gaps must be positive");
    const double gap_c = gap_a + gap_b;
    return beta_fn(gap_a) * gap_a - beta_fn(gap_c) * gap_c +
           beta_fn(gap_b) * gap_b;
}

struct ClosedCurrents {
    double J21 = 0.0;
    double J32 = 0.0;
    double J31 = 0.0;
    double JE21 = 0.0;
    double JE32 = 0.0;
    double JE31 = 0.0;
};

// Quanta flow uphill through 1->3 and return through the two-step cascade
// when delta > 0; all three number currents share one magnitude.
inline ClosedCurrents closed_form_currents(const SixRates& r, double gap_a,
                                           double gap_b) {
    const double den = ratio_denominator(r);
    if (den == 0.0)
        fail_numerical("DegenerateDenominator",
                       "closed current denominator vanishes");
    const Eigen::Vector3d pop = closed_form_stationary(r);
    const double jstar = (r.gm_a * r.gm_b * r.gp_c - r.gp_a * r.gp_b * r.gm_c) *
                         pop(0) / den;
    ClosedCurrents cc;
    cc.J21 = jstar;
    cc.J32 = jstar;
    cc.J31 = -jstar;
    cc.JE21 = gap_a * cc.J21;
    cc.JE32 = gap_b * cc.J32;
    cc.JE31 = (gap_a + gap_b) * cc.J31;
    return cc;
}

// Equivalent Bose-factor expression of the closed current. x_g = beta(g) g
// for each gap; I is the product of the three bare channel strengths
// pi w_g J(g). Exposes the sign law sign(J) = sign(delta) explicitly.
inline double bose_form_current(double I, double x_a, double x_b, double x_c,
                                double rho11, double S) {
    if (S == 0.0)
        fail_numerical("DegenerateDenominator", "Bose form denominator zero");
    const double delta = x_a - x_c + x_b;
    const double den = std::expm1(x_a) * std::expm1(x_b) * -std::expm1(-x_c);
    return 8.0 * I * rho11 / S * std::expm1(delta) / den;
}

struct ThreeLevelClosedForm {
    double gap_a = 0.0;
    double gap_b = 0.0;
    double gap_c = 0.0;
    SixRates rates;
    double X = 0.0;
    double Y = 0.0;
    double Z = 0.0;
    double b = 0.0;
    double c = 0.0;
    double delta = 0.0;
    double I = 0.0;
    Eigen::Vector3d populations = Eigen::Vector3d::Zero();
    ClosedCurrents currents;
};

// Full closed-form solution for a three-level system driven by a single
// reservoir. Works for both reservoir kinds; an equilibrium bath must be
// gauge-free (mu = 0) so that the exponent beta omega applies verbatim.
inline ThreeLevelClosedForm three_level_closed_form(const SystemSpec& spec,
                                                    const ReservoirSpec& res,
                                                    LambShift shift = LambShift::pv) {
    if (spec.n_levels() != 3)
        fail_validation("InconsistentDimensions",
                        "closed form requires exactly three levels");
    if (spec.n_reservoirs() != 1)
        fail_validation("InconsistentDimensions",
                        "closed form requires a single reservoir");
    if (res.kind == ReservoirKind::Equilibrium && res.mu != 0.0)
        fail_validation("ConfigError",
                        "closed form needs a gauge-free equilibrium bath");

    ThreeLevelClosedForm out;
    out.gap_a = spec.levels(1) - spec.levels(0);
    out.gap_b = spec.levels(2) - spec.levels(1);
    out.gap_c = spec.levels(2) - spec.levels(0);

    const RateSet rs = rate_set(spec, {res}, shift);
    out.rates = six_rates(rs);

    const double wa = spec.weight(0, 1, 0);
    const double wb = spec.weight(0, 2, 1);
    const double wc = spec.weight(0, 2, 0);
    const double pi = 3.14159265358979323846;
    out.I = (pi * wa * res.spectral_density(out.gap_a)) *
            (pi * wb * res.spectral_density(out.gap_b)) *
            (pi * wc * res.spectral_density(out.gap_c));
    if (out.I == 0.0)
        fail_numerical("ZeroCoupling",
                       "a transition is uncoupled; no closed circulation");

    const EigenCoeffs ec = population_eigen_coeffs(out.rates);
    out.b = ec.b;
    out.c = ec.c;

    const StationaryRatios sr = stationary_ratios(out.rates);
    out.X = sr.X;
    out.Y = sr.Y;
    out.Z = sr.Z;
    out.populations = closed_form_stationary(out.rates);

    if (res.kind == ReservoirKind::Equilibrium) {
        out.delta = 0.0;
    } else {
        out.delta = delta_invariant(res.beta_fn, out.gap_a, out.gap_b);
    }
    out.currents = closed_form_currents(out.rates, out.gap_a, out.gap_b);
    return out;
}

// True iff the stationary population of the middle level exceeds the ground
// level. Equivalent to beta(b) b > beta(c) c for a single-bath ladder.
inline bool population_inverted(const ThreeLevelClosedForm& cf) {
    return cf.X > 1.0;
}

}  // namespace neqsteady
