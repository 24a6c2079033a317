#pragma once

// Mode-local KMS relation for a Gaussian field with an arbitrary positive
// occupation per mode. Each mode k carries its own inverse temperature
// beta_loc(k) = log((n_k + 1) / n_k) / omega_k, and correlation functions
// satisfy the KMS exchange rule with the imaginary shift taken mode-wise.

#include <array>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "neqsteady/errors.hpp"

namespace neqsteady {

struct FieldOp {
    int mode = 0;
    bool dagger = false;
};

struct FieldTwoPoint {
    Eigen::VectorXd omega;
    Eigen::VectorXd n;
    Eigen::VectorXd m;  // n + 1
    Eigen::VectorXd beta_loc;

    static FieldTwoPoint from_occupations(const Eigen::VectorXd& omega,
                                          const Eigen::VectorXd& n) {
        if (omega.size() != n.size())
            fail_validation("InconsistentDimensions",
                            "one occupation per mode frequency");
        FieldTwoPoint f;
        f.omega = omega;
        f.n = n;
        f.m = n.array() + 1.0;
        f.beta_loc.resize(n.size());
        for (Eigen::Index k = 0; k < n.size(); ++k) {
            if (!(omega(k) > 0.0) || !(n(k) > 0.0))
                fail_validation("NonPositiveArgument",
                                "mode frequencies and occupations must be "
                                "positive");
            f.beta_loc(k) = std::log(f.m(k) / f.n(k)) / omega(k);
        }
        return f;
    }

    int mode_count() const { return static_cast<int>(omega.size()); }

    // Pairing of two operators at complex times. Free evolution gives the
    // annihilator e^{-i tau omega} and the creator e^{+i tau omega}.
    std::complex<double> contraction(const FieldOp& a,
                                     const std::complex<double>& ta,
                                     const FieldOp& b,
                                     const std::complex<double>& tb) const {
        if (a.mode == b.mode && a.dagger != b.dagger) {
            const std::complex<double> i(0.0, 1.0);
            const double w = omega(a.mode);
            const std::complex<double> pa =
                std::exp((a.dagger ? i : -i) * ta * w);
            const std::complex<double> pb =
                std::exp((b.dagger ? i : -i) * tb * w);
            return pa * pb * (a.dagger ? n(a.mode) : m(a.mode));
        }
        return {0.0, 0.0};
    }
};

namespace detail {

struct TimedOp {
    FieldOp op;
    std::complex<double> time;
};

// Quasi-free four-point function: sum over the three order-preserving pair
// partitions (01)(23), (02)(13), (03)(12).
inline std::complex<double> wick4(const FieldTwoPoint& f,
                                  const std::array<TimedOp, 4>& ops) {
    static constexpr int kParts[3][4] = {
        {0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}};
    std::complex<double> total(0.0, 0.0);
    for (const auto& p : kParts) {
        total += f.contraction(ops[p[0]].op, ops[p[0]].time, ops[p[1]].op,
                               ops[p[1]].time) *
                 f.contraction(ops[p[2]].op, ops[p[2]].time, ops[p[3]].op,
                               ops[p[3]].time);
    }
    return total;
}

}  // namespace detail

struct FieldKmsResult {
    std::complex<double> lhs;
    std::complex<double> rhs;
    double residual = 0.0;
};

// Two-point exchange rule: <A(0) B(t + i beta_loc)> = <B(t) A(0)> for every
// pairing of one operator on mode k with one on mode h. Cross-mode pairings
// vanish on both sides; the returned residual is the worst of the four.
inline double field_local_kms_check(const FieldTwoPoint& f, int k, int h,
                                    double t) {
    if (k < 0 || h < 0 || k >= f.mode_count() || h >= f.mode_count())
        fail_validation("InconsistentDimensions", "mode index out of range");
    double worst = 0.0;
    const std::complex<double> t0(0.0, 0.0);
    for (bool dk : {false, true}) {
        for (bool dh : {false, true}) {
            const FieldOp a{k, dk};
            const FieldOp b{h, dh};
            const std::complex<double> shifted(t, f.beta_loc(h));
            const std::complex<double> lhs = f.contraction(a, t0, b, shifted);
            const std::complex<double> rhs =
                f.contraction(b, std::complex<double>(t, 0.0), a, t0);
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
    return worst;
}

// Four-point exchange rule for a pair of operators against a pair of
// operators. The h block keeps its internal order on both sides; each of
// its operators is shifted by the local imaginary period of its own mode.
// pre: every mode occurs as often daggered as undaggered, otherwise both
// sides vanish identically and the comparison is vacuous.
inline FieldKmsResult gaussian_wick_check(const FieldTwoPoint& f,
                                          const std::array<FieldOp, 2>& k_ops,
                                          const std::array<FieldOp, 2>& h_ops,
                                          double t) {
    Eigen::VectorXi balance = Eigen::VectorXi::Zero(f.mode_count());
    for (const FieldOp& op : {k_ops[0], k_ops[1], h_ops[0], h_ops[1]}) {
        if (op.mode < 0 || op.mode >= f.mode_count())
            fail_validation("InconsistentDimensions",
                            "mode index out of range");
        balance(op.mode) += op.dagger ? 1 : -1;
    }
    if (balance.cwiseAbs().sum() != 0)
        fail_validation("UnbalancedGaugePattern",
                        "pattern annihilates both sides; balance creators "
                        "against annihilators per mode");

    const std::complex<double> t0(0.0, 0.0);
    const std::complex<double> tr(t, 0.0);
    FieldKmsResult out;
    out.lhs = detail::wick4(
        f, {detail::TimedOp{k_ops[0], t0}, detail::TimedOp{k_ops[1], t0},
            detail::TimedOp{h_ops[0],
                            std::complex<double>(t, f.beta_loc(h_ops[0].mode))},
            detail::TimedOp{
                h_ops[1], std::complex<double>(t, f.beta_loc(h_ops[1].mode))}});
    out.rhs = detail::wick4(
        f, {detail::TimedOp{h_ops[0], tr}, detail::TimedOp{h_ops[1], tr},
            detail::TimedOp{k_ops[0], t0}, detail::TimedOp{k_ops[1], t0}});
    out.residual = std::abs(out.lhs - out.rhs);
    return out;
}

}  // namespace neqsteady
