#pragma once

// Level-resolved temperature profile of a diagonal state, the local KMS
// residual it must annihilate, and the backward generator corrected by
// per-channel gauge terms. The profile exponent is B_l = -log rho_ll,
// normalized pointwise (Z = 1), so beta_S(e_l) = B_l / e_l.

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "neqsteady/errors.hpp"
#include "neqsteady/generator.hpp"
#include "neqsteady/rates.hpp"

namespace neqsteady {

struct TemperatureProfile {
    Eigen::VectorXd levels;
    Eigen::VectorXd B;       // -log rho_ll
    Eigen::VectorXd beta_S;  // B_l / e_l, NaN where e_l is numerically zero
    // Constancy certificate over the normalization-free pairwise slopes
    // (B_m - B_l) / (e_m - e_l); the pointwise beta_S absorbs log Z and is
    // not constant for a Gibbs state unless Z = 1.
    double spread = 0.0;
    bool equilibrium = false;
};

// pre: rho is diagonal-dominant in the level basis with strictly positive
// populations. strict_levels rejects levels at zero energy instead of
// emitting NaN for them.
inline TemperatureProfile beta_profile(const DensityMatrix& rho,
                                       const Eigen::VectorXd& levels,
                                       bool strict_levels = true,
                                       double level_tol = 1e-12) {
    const int n = static_cast<int>(levels.size());
    if (rho.rows() != n || rho.cols() != n)
        fail_validation("InconsistentDimensions",
                        "state dimension does not match the level count");
    TemperatureProfile tp;
    tp.levels = levels;
    tp.B.resize(n);
    tp.beta_S.resize(n);
    for (int l = 0; l < n; ++l) {
        const double p = rho(l, l).real();
        if (!(p > 0.0))
            fail_validation("ZeroPopulation",
                            "temperature profile needs strictly positive "
                            "populations");
        tp.B(l) = -std::log(p);
        if (std::abs(levels(l)) < level_tol) {
            if (strict_levels)
                fail_validation("ZeroEnergyLevel",
                                "beta_S is undefined at zero energy; shift "
                                "the spectrum");
            tp.beta_S(l) = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        tp.beta_S(l) = tp.B(l) / levels(l);
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int m = 1; m < n; ++m)
        for (int l = 0; l < m; ++l) {
            const double slope = (tp.B(m) - tp.B(l)) / (levels(m) - levels(l));
            lo = std::min(lo, slope);
            hi = std::max(hi, slope);
        }
    tp.spread = hi - lo;
    tp.equilibrium = tp.spread < 1e-10;
    return tp;
}

// Diagonal state encoded by the profile. Round-trips beta_profile exactly
// because the exponent absorbs the normalization.
inline DensityMatrix reconstruct_state(const TemperatureProfile& tp) {
    const int n = static_cast<int>(tp.B.size());
    DensityMatrix rho = DensityMatrix::Zero(n, n);
    for (int l = 0; l < n; ++l) rho(l, l) = std::exp(-tp.B(l));
    return rho;
}

// tr(rho x e^{-B} y(t) e^{B}) - tr(rho y(t) x) with y(t) the free
// Heisenberg evolution under H = diag(levels). Vanishes for every x, y, t
// exactly when rho is diagonal with populations e^{-B}.
inline Cplx local_kms_residual(const DensityMatrix& rho,
                               const TemperatureProfile& tp, const Mat& x,
                               const Mat& y, double t) {
    const int n = static_cast<int>(tp.levels.size());
    Eigen::VectorXcd phase(n), wm(n), wp(n);
    for (int l = 0; l < n; ++l) {
        phase(l) = std::exp(Cplx(0.0, t * tp.levels(l)));
        wm(l) = std::exp(-tp.B(l));
        wp(l) = std::exp(+tp.B(l));
    }
    const Mat yt = phase.asDiagonal() * y * phase.conjugate().asDiagonal();
    const Cplx lhs =
        (rho * x * wm.asDiagonal() * yt * wp.asDiagonal()).trace();
    const Cplx rhs = (rho * yt * x).trace();
    return lhs - rhs;
}

inline Mat lowering_operator(int n, int upper, int lower) {
    Mat e = Mat::Zero(n, n);
    e(lower, upper) = 1.0;
    return e;
}

struct DdbSymmetry {
    Cplx path_generator;  // tr(rho X L(Y)) - tr(rho L_B(X) Y)
    Cplx path_current;    // channel currents against the diagonal of X, Y
    double defect = 0.0;
};

// Two independent evaluations of the forward/backward asymmetry at a
// stationary state. The generator path uses the full Heisenberg maps; the
// current path reduces it to the per-channel stationary number currents.
inline DdbSymmetry ddb_symmetry_defect(const GeneratorOps& ops,
                                       const RateSet& rs,
                                       const DensityMatrix& rho, const Mat& X,
                                       const Mat& Y) {
    const Mat drift = ops.apply_lstar(rho);
    if (drift.norm() > 1e-8 * std::max(1.0, rho.norm()))
        fail_validation("NotStationary",
                        "asymmetry paths are only comparable at a stationary "
                        "state");
    DdbSymmetry out;
    out.path_generator =
        (rho * X * ops.apply_heis(Y)).trace() -
        (rho * ops.apply_heis_b(X) * Y).trace();
    out.path_current = Cplx(0.0, 0.0);
    for (int c = 0; c < rs.channel_count(); ++c) {
        const int u = rs.table.entries[c].upper;
        const int l = rs.table.entries[c].lower;
        const double j_ul = rs.Gamma_minus[c] * rho(u, u).real() -
                            rs.Gamma_plus[c] * rho(l, l).real();
        out.path_current += (X(u, u) * Y(l, l) - X(l, l) * Y(u, u)) * j_ul;
    }
    out.defect = std::abs(out.path_generator - out.path_current);
    return out;
}

// Gauge correction of channel omega = (u, l). Annihilates every X exactly
// when the channel current vanishes against the profile state.
inline Mat pi_channel_apply(const RateSet& rs, const TemperatureProfile& tp,
                            int channel, const Mat& X) {
    const int n = rs.n_levels;
    const int u = rs.table.entries[channel].upper;
    const int l = rs.table.entries[channel].lower;
    const Mat e = lowering_operator(n, u, l);
    const Mat ed = e.adjoint();
    const double c_up =
        rs.Gamma_plus[channel] * std::exp(tp.B(u) - tp.B(l)) -
        rs.Gamma_minus[channel];
    const double c_dn =
        rs.Gamma_minus[channel] * std::exp(tp.B(l) - tp.B(u)) -
        rs.Gamma_plus[channel];
    return c_up * (ed * X * e) + c_dn * (e * X * ed);
}

inline Mat lg_plus_apply(const GeneratorOps& ops, const RateSet& rs,
                         const TemperatureProfile& tp, const Mat& X) {
    Mat out = ops.apply_heis_b(X);
    for (int c = 0; c < rs.channel_count(); ++c)
        out += pi_channel_apply(rs, tp, c, X);
    return out;
}

// Frobenius norm of the corrected backward generator on the identity.
inline double lg_plus_defect(const GeneratorOps& ops, const RateSet& rs,
                             const TemperatureProfile& tp) {
    const Mat one = Mat::Identity(rs.n_levels, rs.n_levels);
    return lg_plus_apply(ops, rs, tp, one).norm();
}

// Per-channel norms of the gauge correction on the identity. Nonzero
// entries witness circulating channel currents even when the channel sums
// telescope to zero in lg_plus_defect.
inline std::vector<double> pi_channel_defects(const RateSet& rs,
                                              const TemperatureProfile& tp) {
    const Mat one = Mat::Identity(rs.n_levels, rs.n_levels);
    std::vector<double> out(static_cast<std::size_t>(rs.channel_count()));
    for (int c = 0; c < rs.channel_count(); ++c)
        out[static_cast<std::size_t>(c)] =
            pi_channel_apply(rs, tp, c, one).norm();
    return out;
}

}  // namespace neqsteady
