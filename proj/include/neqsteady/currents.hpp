#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "neqsteady/generator.hpp"
#include "neqsteady/rates.hpp"

namespace neqsteady {

// One (reservoir, channel) row. Positive J means quanta absorbed by the
// reservoir: J is the growth rate of the reservoir's resonant mode count.
struct PairCurrent {
  int reservoir;
  int m;  // upper level
  int n;  // lower level
  double omega;
  double J;
  double JE;
  double JQ;
  bool inactive;
};

struct GibbsVerdict {
  int m, n;
  double omega;
  bool qualifying;  // opposite-sign per-reservoir currents on this pair
  bool within;      // ratio inside the two Gibbs factors (valid when qualifying)
  double ratio, lo, hi;
};

struct CurrentReport {
  std::vector<PairCurrent> entries;
  Eigen::VectorXd level_balance;  // J_m: net quanta emitted by level m into all reservoirs
  double total_energy_flow = 0.0;
  Eigen::MatrixXd ddb_defect;  // (upper, lower): sum_j J_{j,mn}
  bool db_satisfied = false;
  std::vector<GibbsVerdict> gibbs_bound;  // filled by gibbs_domination

  double pair_total(int m, int n) const {
    double s = 0.0;
    for (const auto& e : entries)
      if (e.m == m && e.n == n) s += e.J;
    return s;
  }
};

inline CurrentReport micro_currents(const RateSet& rs, const Mat& rho) {
  const int n = rs.n_levels;
  if (rho.rows() != n)
    fail_validation("InconsistentDimensions", "state size does not match rate set");

  CurrentReport rep;
  rep.level_balance = Eigen::VectorXd::Zero(n);
  rep.ddb_defect = Eigen::MatrixXd::Zero(n, n);

  for (int c = 0; c < rs.channel_count(); ++c) {
    const auto& ch = rs.channel(c);
    const double pu = rho(ch.upper, ch.upper).real();
    const double pl = rho(ch.lower, ch.lower).real();
    double total = 0.0;
    for (int j = 0; j < rs.n_reservoirs; ++j) {
      PairCurrent pc;
      pc.reservoir = j;
      pc.m = ch.upper;
      pc.n = ch.lower;
      pc.omega = ch.omega;
      pc.J = 2.0 * (rs.re_gamma_minus(c, j) * pu - rs.re_gamma_plus(c, j) * pl);
      pc.JE = ch.omega * pc.J;
      pc.JQ = pc.JE - rs.reservoir_mu[j] * pc.J;
      pc.inactive = rs.re_gamma_minus(c, j) == 0.0 && rs.re_gamma_plus(c, j) == 0.0;
      total += pc.J;
      rep.entries.push_back(pc);
    }
    rep.ddb_defect(ch.upper, ch.lower) = total;
    rep.level_balance[ch.upper] += total;
    rep.level_balance[ch.lower] -= total;
    rep.total_energy_flow += ch.omega * total;
  }

  double max_defect = 0.0;
  for (int c = 0; c < rs.channel_count(); ++c) {
    const auto& ch = rs.channel(c);
    max_defect = std::max(max_defect, std::abs(rep.ddb_defect(ch.upper, ch.lower)));
  }
  rep.db_satisfied = max_defect < 1e-9;
  return rep;
}

struct BalanceResiduals {
  Eigen::VectorXd level;  // J_m + d/dt rho_mm
  double energy;          // sum_m eps_m J_m + d/dt tr(H rho)
};

inline BalanceResiduals level_balance(const CurrentReport& rep, const GeneratorOps& ops,
                                      const Mat& rho) {
  const Mat drho = ops.apply_lstar(rho);
  BalanceResiduals out;
  out.level = Eigen::VectorXd::Zero(ops.n);
  double denergy = 0.0;
  for (int m = 0; m < ops.n; ++m) {
    out.level[m] = rep.level_balance[m] + drho(m, m).real();
    denergy += ops.levels[m] * drho(m, m).real();
  }
  double je_total = 0.0;
  for (int m = 0; m < ops.n; ++m) je_total += ops.levels[m] * rep.level_balance[m];
  out.energy = je_total + denergy;
  return out;
}

struct DetailedBalanceResult {
  bool satisfied;
  Eigen::MatrixXd defect;  // (m, l): rho_mm Gamma_ml - rho_ll Gamma_lm
};

inline DetailedBalanceResult detailed_balance_test(const RateSet& rs, const Mat& rho) {
  const int n = rs.n_levels;
  DetailedBalanceResult res;
  res.defect = Eigen::MatrixXd::Zero(n, n);
  double worst = 0.0;
  for (int m = 0; m < n; ++m)
    for (int l = 0; l < n; ++l) {
      if (m == l) continue;
      res.defect(m, l) = rho(m, m).real() * rs.Gamma(m, l) - rho(l, l).real() * rs.Gamma(l, m);
      worst = std::max(worst, std::abs(res.defect(m, l)));
    }
  res.satisfied = worst < 1e-9;
  return res;
}

// Two-reservoir population-ratio bound: on pairs where the two reservoirs
// drive opposite-sign currents, the stationary ratio rho_mm/rho_nn must lie
// between the reservoirs' Gibbs factors.
inline std::vector<GibbsVerdict> gibbs_domination(const RateSet& rs, const Mat& rho,
                                                  const std::vector<ReservoirSpec>& reservoirs,
                                                  double slack = 1e-12) {
  if (reservoirs.size() != 2)
    fail_validation("InconsistentDimensions", "gibbs_domination needs exactly two reservoirs");
  for (const auto& r : reservoirs)
    if (r.kind != ReservoirKind::Equilibrium)
      fail_validation("NonPositiveArgument", "gibbs_domination needs equilibrium reservoirs");

  std::vector<GibbsVerdict> verdicts;
  for (int c = 0; c < rs.channel_count(); ++c) {
    const auto& ch = rs.channel(c);
    const double pu = rho(ch.upper, ch.upper).real();
    const double pl = rho(ch.lower, ch.lower).real();
    const double j1 = 2.0 * (rs.re_gamma_minus(c, 0) * pu - rs.re_gamma_plus(c, 0) * pl);
    const double j2 = 2.0 * (rs.re_gamma_minus(c, 1) * pu - rs.re_gamma_plus(c, 1) * pl);
    GibbsVerdict v;
    v.m = ch.upper;
    v.n = ch.lower;
    v.omega = ch.omega;
    const double f1 = std::exp(-(ch.omega - reservoirs[0].mu) * reservoirs[0].beta);
    const double f2 = std::exp(-(ch.omega - reservoirs[1].mu) * reservoirs[1].beta);
    v.lo = std::min(f1, f2);
    v.hi = std::max(f1, f2);
    v.ratio = pl > 0 ? pu / pl : std::numeric_limits<double>::infinity();
    v.qualifying = j1 * j2 < 0;
    v.within = v.qualifying && v.ratio >= v.lo - slack && v.ratio <= v.hi + slack;
    verdicts.push_back(v);
  }
  return verdicts;
}

// Rebuilds every micro-current from the ground population and the currents
// into the ground level: populations first, then the linear current formula.
inline CurrentReport current_recursion(const RateSet& rs, double rho00,
                                       const Eigen::MatrixXd& j_ground) {
  const int n = rs.n_levels;
  if (j_ground.rows() != n || j_ground.cols() != rs.n_reservoirs)
    fail_validation("InconsistentDimensions",
                    "ground-current table must be n_levels x n_reservoirs");

  Eigen::VectorXd pops = Eigen::VectorXd::Zero(n);
  pops[0] = rho00;
  for (int m = 1; m < n; ++m) {
    const int c = rs.channel_of_pair(m, 0);
    double total = 0.0;
    for (int j = 0; j < rs.n_reservoirs; ++j) total += j_ground(m, j);
    const double gm = rs.Gamma_minus[c];
    if (gm == 0.0)
      fail_numerical("ZeroDenominator", "emission rate of a ground-coupled gap vanishes");
    pops[m] = (total + rs.Gamma_plus[c] * rho00) / gm;
  }

  Mat rho = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) rho(i, i) = pops[i];
  return micro_currents(rs, rho);
}

}  // namespace neqsteady
