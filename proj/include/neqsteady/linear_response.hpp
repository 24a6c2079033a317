#pragma once

// Linear transport between two equilibrium reservoirs with a small
// temperature and chemical-potential bias. The baths are split
// symmetrically about a common midpoint so that the affinity of each
// channel is exactly x1 - x2 = beta0 dmu + (omega - mu0) dbeta.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "neqsteady/currents.hpp"
#include "neqsteady/errors.hpp"
#include "neqsteady/generator.hpp"
#include "neqsteady/rates.hpp"
#include "neqsteady/reservoir.hpp"
#include "neqsteady/system.hpp"

namespace neqsteady {

struct SymmetricSplit {
    double beta0 = 0.0;
    double mu0 = 0.0;
    double dbeta = 0.0;  // beta1 - beta2
    double dmu = 0.0;    // mu2 - mu1
};

inline SymmetricSplit symmetric_split(double beta1, double beta2, double mu1,
                                      double mu2) {
    if (beta1 <= 0.0 || beta2 <= 0.0)
        fail_validation("NonPositiveArgument",
                        "inverse temperatures must be positive");
    SymmetricSplit s;
    s.beta0 = 0.5 * (beta1 + beta2);
    s.mu0 = 0.5 * (mu1 + mu2);
    s.dbeta = beta1 - beta2;
    s.dmu = mu2 - mu1;
    return s;
}

inline void require_symmetric_couplings(const SystemSpec& spec) {
    if (spec.n_reservoirs() != 2)
        fail_validation("InconsistentDimensions",
                        "linear transport requires exactly two reservoirs");
    for (int u = 1; u < spec.n_levels(); ++u) {
        for (int l = 0; l < u; ++l) {
            const double w0 = spec.weight(0, u, l);
            const double w1 = spec.weight(1, u, l);
            if (std::abs(w0 - w1) > 1e-12 * std::max(1.0, std::abs(w0)))
                fail_validation("AsymmetricCouplings",
                                "the two reservoirs must couple through "
                                "identical transition weights");
        }
    }
}

inline ReservoirSpec shifted_bath(const ReservoirSpec& base, double dbeta_half,
                                  double dmu_half) {
    if (base.kind != ReservoirKind::Equilibrium)
        fail_validation("ConfigError",
                        "linear transport needs equilibrium reservoirs");
    ReservoirSpec r = base;
    r.beta = base.beta + dbeta_half;
    r.mu = base.mu + dmu_half;
    if (r.beta <= 0.0)
        fail_validation("NonPositiveArgument",
                        "bias drives an inverse temperature non-positive");
    return r;
}

struct PairLinearResponse {
    int m = 0;  // upper level
    int n = 0;  // lower level
    double omega = 0.0;
    double J_2to1 = 0.0;   // linearized number current, reservoir 2 -> 1
    double JE_2to1 = 0.0;  // linearized energy current
    double JQ_2to1 = 0.0;  // linearized heat current, referenced to mu0
    double sigma = 0.0;    // bilinear entropy production of this channel
};

struct LinearCurrentReport {
    SymmetricSplit split;
    std::vector<PairLinearResponse> pairs;
    double sigma_total = 0.0;
};

inline double entropy_production(double J_2to1, double JQ_2to1, double beta0,
                                 double dbeta, double dmu) {
    return beta0 * dmu * J_2to1 + dbeta * JQ_2to1;
}

// Linearized currents: the stationary state of the unbiased midpoint
// problem is frozen, the bias enters only through the bath occupations.
// The antisymmetric half-difference of the two per-reservoir currents is
// the channel flow from reservoir 2 towards reservoir 1.
inline LinearCurrentReport linear_currents(const SystemSpec& spec,
                                           const ReservoirSpec& res1,
                                           const ReservoirSpec& res2,
                                           LambShift shift = LambShift::pv) {
    require_symmetric_couplings(spec);
    if (res1.kind != ReservoirKind::Equilibrium ||
        res2.kind != ReservoirKind::Equilibrium)
        fail_validation("ConfigError",
                        "linear transport needs equilibrium reservoirs");

    LinearCurrentReport rep;
    rep.split = symmetric_split(res1.beta, res2.beta, res1.mu, res2.mu);

    ReservoirSpec mid = res1;
    mid.beta = rep.split.beta0;
    mid.mu = rep.split.mu0;

    const RateSet rs_mid = rate_set(spec, {mid, mid}, shift);
    const GeneratorOps ops = build_generators(spec, rs_mid);
    const DensityMatrix rho = stationary_state(ops);

    const RateSet rs_true = rate_set(spec, {res1, res2}, shift);
    const CurrentReport cur = micro_currents(rs_true, rho);

    rep.pairs.reserve(cur.entries.size() / 2);
    for (std::size_t i = 0; i + 1 < cur.entries.size(); i += 2) {
        const PairCurrent& a = cur.entries[i];      // reservoir 0
        const PairCurrent& b = cur.entries[i + 1];  // reservoir 1
        PairLinearResponse lr;
        lr.m = a.m;
        lr.n = a.n;
        lr.omega = a.omega;
        lr.J_2to1 = 0.5 * (a.J - b.J);
        lr.JE_2to1 = 0.5 * (a.JE - b.JE);
        // Heat measured against the common midpoint potential. Using each
        // reservoir's own mu would leak the standing mu0-circulation of the
        // midpoint problem into the cross-coefficients.
        lr.JQ_2to1 = lr.JE_2to1 - rep.split.mu0 * lr.J_2to1;
        lr.sigma = entropy_production(lr.J_2to1, lr.JQ_2to1, rep.split.beta0,
                                      rep.split.dbeta, rep.split.dmu);
        rep.sigma_total += lr.sigma;
        rep.pairs.push_back(lr);
    }
    return rep;
}

struct OnsagerPair {
    int m = 0;
    int n = 0;
    double omega = 0.0;
    double Gamma_on = 0.0;  // dJ_1to2 / d(dmu)
    double L_fd_12 = 0.0;   // dJ_1to2 / d(dbeta/beta0)
    double L_fd_21 = 0.0;   // dJQ_1to2 / d(dmu)
    double M_on = 0.0;      // dJQ_1to2 / d(dbeta/beta0)
    double L_ref = 0.0;     // model form -(omega - mu0) Gamma_on
    double M_ref = 0.0;     // model form -(omega - mu0)^2 Gamma_on
    double reciprocity_defect = 0.0;
};

struct OnsagerReport {
    double beta0 = 0.0;
    double mu0 = 0.0;
    double step = 0.0;
    std::vector<OnsagerPair> pairs;
};

namespace detail {

// Per-pair currents oriented from reservoir 1 into reservoir 2, taken at
// the true stationary state of the biased problem. Heat is referenced to
// the midpoint chemical potential of the unbiased problem.
inline void biased_pair_currents(const SystemSpec& spec,
                                 const ReservoirSpec& base, double dbeta,
                                 double dmu, LambShift shift,
                                 std::vector<double>& J_1to2,
                                 std::vector<double>& JQ_1to2) {
    const ReservoirSpec r1 = shifted_bath(base, +0.5 * dbeta, -0.5 * dmu);
    const ReservoirSpec r2 = shifted_bath(base, -0.5 * dbeta, +0.5 * dmu);
    const RateSet rs = rate_set(spec, {r1, r2}, shift);
    const GeneratorOps ops = build_generators(spec, rs);
    const DensityMatrix rho = stationary_state(ops);
    const CurrentReport cur = micro_currents(rs, rho);
    J_1to2.clear();
    JQ_1to2.clear();
    for (std::size_t i = 0; i + 1 < cur.entries.size(); i += 2) {
        const double j = 0.5 * (cur.entries[i + 1].J - cur.entries[i].J);
        const double je = 0.5 * (cur.entries[i + 1].JE - cur.entries[i].JE);
        J_1to2.push_back(j);
        JQ_1to2.push_back(je - base.mu * j);
    }
}

// Central difference with one Richardson extrapolation step.
template <typename F>
std::vector<double> richardson_derivative(F&& eval, double h) {
    const std::vector<double> fp = eval(+h);
    const std::vector<double> fm = eval(-h);
    const std::vector<double> fp2 = eval(+0.5 * h);
    const std::vector<double> fm2 = eval(-0.5 * h);
    std::vector<double> d(fp.size());
    for (std::size_t i = 0; i < fp.size(); ++i) {
        const double d1 = (fp[i] - fm[i]) / (2.0 * h);
        const double d2 = (fp2[i] - fm2[i]) / h;
        d[i] = (4.0 * d2 - d1) / 3.0;
    }
    return d;
}

}  // namespace detail

// Transport coefficients of the biased two-bath problem, by numerical
// differentiation of the true stationary currents at zero bias. The
// thermal force is dbeta/beta0, so mixed coefficients obey L12 = L21.
inline OnsagerReport onsager_matrix(const SystemSpec& spec,
                                    const ReservoirSpec& base, double h = 1e-4,
                                    LambShift shift = LambShift::pv) {
    require_symmetric_couplings(spec);
    if (base.kind != ReservoirKind::Equilibrium)
        fail_validation("ConfigError",
                        "transport coefficients need an equilibrium midpoint");
    if (!(h > 0.0) || h < 1e-10)
        fail_numerical("StepTooSmall",
                       "finite-difference step must be at least 1e-10");

    OnsagerReport rep;
    rep.beta0 = base.beta;
    rep.mu0 = base.mu;
    rep.step = h;

    std::vector<double> J, JQ;

    auto eval_mu_J = [&](double dmu) {
        detail::biased_pair_currents(spec, base, 0.0, dmu, shift, J, JQ);
        return J;
    };
    auto eval_mu_JQ = [&](double dmu) {
        detail::biased_pair_currents(spec, base, 0.0, dmu, shift, J, JQ);
        return JQ;
    };
    auto eval_th_J = [&](double th) {
        detail::biased_pair_currents(spec, base, th * base.beta, 0.0, shift, J,
                                     JQ);
        return J;
    };
    auto eval_th_JQ = [&](double th) {
        detail::biased_pair_currents(spec, base, th * base.beta, 0.0, shift, J,
                                     JQ);
        return JQ;
    };

    const std::vector<double> dJ_dmu = detail::richardson_derivative(eval_mu_J, h);
    const std::vector<double> dJQ_dmu =
        detail::richardson_derivative(eval_mu_JQ, h);
    const std::vector<double> dJ_dth = detail::richardson_derivative(eval_th_J, h);
    const std::vector<double> dJQ_dth =
        detail::richardson_derivative(eval_th_JQ, h);

    const RateSet rs = rate_set(spec, {base, base}, shift);
    rep.pairs.resize(dJ_dmu.size());
    for (std::size_t c = 0; c < dJ_dmu.size(); ++c) {
        OnsagerPair& p = rep.pairs[c];
        p.m = rs.table.entries[c].upper;
        p.n = rs.table.entries[c].lower;
        p.omega = rs.table.entries[c].omega;
        p.Gamma_on = dJ_dmu[c];
        p.L_fd_12 = dJ_dth[c];
        p.L_fd_21 = dJQ_dmu[c];
        p.M_on = dJQ_dth[c];
        p.L_ref = -(p.omega - rep.mu0) * p.Gamma_on;
        p.M_ref = -(p.omega - rep.mu0) * (p.omega - rep.mu0) * p.Gamma_on;
        const double scale =
            std::max({std::abs(p.L_fd_12), std::abs(p.L_fd_21), 1e-300});
        p.reciprocity_defect = std::abs(p.L_fd_12 - p.L_fd_21) / scale;
    }
    return rep;
}

}  // namespace neqsteady
