#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "neqsteady/quadrature.hpp"
#include "neqsteady/reservoir.hpp"
#include "neqsteady/system.hpp"

namespace neqsteady {

// Complex transport coefficient pair of one (reservoir, channel):
// Re gamma is the golden-rule damping rate, Im gamma the Lamb-type shift.
struct Susceptivity {
  std::complex<double> gamma_minus{0.0, 0.0};
  std::complex<double> gamma_plus{0.0, 0.0};
};

enum class LambShift { pv, none };

inline Susceptivity susceptivity(const ReservoirSpec& res, double dipole_weight, double omega,
                                 LambShift mode = LambShift::pv) {
  if (omega <= 0) fail_validation("NonPositiveArgument", "susceptivity needs omega > 0");
  if (dipole_weight < 0) fail_validation("NonPositiveArgument", "dipole weight must be >= 0");
  Susceptivity s;
  if (dipole_weight == 0.0) return s;

  const double n_occ = occupation(res, omega);
  const double base = std::numbers::pi * dipole_weight * res.spectral_density(omega);
  double re_minus = base * (n_occ + 1.0);
  double re_plus = base * n_occ;

  double im_minus = 0.0, im_plus = 0.0;
  if (mode == LambShift::pv) {
    // Integration support: reservoir modes with positive Bose argument.
    const double lo = res.kind == ReservoirKind::Equilibrium ? std::max(0.0, res.mu) : 0.0;
    const double hi = res.pv_cutoff;
    const auto weighted = [&res](bool plus) {
      return quad::Fn([&res, plus](double v) {
        const double occ = occupation(res, v);
        return res.spectral_density(v) * (plus ? occ : occ + 1.0);
      });
    };
    im_minus = -dipole_weight * quad::principal_value(weighted(false), lo, hi, omega, 1e-8);
    im_plus = -dipole_weight * quad::principal_value(weighted(true), lo, hi, omega, 1e-8);
  }

  s.gamma_minus = {re_minus, im_minus};
  s.gamma_plus = {re_plus, im_plus};
  return s;
}

// Per-channel and per-level rate data for one system + reservoir collection.
struct RateSet {
  int n_levels = 0;
  int n_reservoirs = 0;
  BohrTable table;
  std::vector<std::vector<Susceptivity>> sus;  // [channel][reservoir]
  std::vector<double> reservoir_mu;            // 0 for local-equilibrium reservoirs

  Eigen::VectorXd Gamma_minus;  // per channel: 2 Re sum_j gamma_-
  Eigen::VectorXd Gamma_plus;   // per channel: 2 Re sum_j gamma_+
  Eigen::MatrixXd Gamma;        // Gamma(m, l): m -> l transition rate
  Eigen::MatrixXd G;            // off-diagonal decay rates
  Eigen::VectorXd Delta_diag;   // diagonal shift operator
  Eigen::MatrixXd Delta_shift;  // Delta(m, n) = Delta_diag(n) - Delta_diag(m)

  int channel_count() const { return static_cast<int>(table.entries.size()); }
  const BohrEntry& channel(int c) const { return table.entries[c]; }
  int channel_of_pair(int m, int n) const { return table.index_of_pair(m, n); }

  double re_gamma_minus(int c, int j) const { return sus[c][j].gamma_minus.real(); }
  double re_gamma_plus(int c, int j) const { return sus[c][j].gamma_plus.real(); }

  // True when neither emission nor absorption couples this channel.
  bool channel_inactive(int c) const {
    return Gamma_minus[c] == 0.0 && Gamma_plus[c] == 0.0;
  }
};

inline RateSet rate_set(const SystemSpec& spec, const std::vector<ReservoirSpec>& reservoirs,
                        LambShift mode = LambShift::pv) {
  if (reservoirs.empty()) fail_validation("EmptyCoupling", "need at least one reservoir");
  const int n = spec.n_levels();
  if (spec.n_reservoirs() != static_cast<int>(reservoirs.size()))
    fail_validation("InconsistentDimensions", "dipole count does not match reservoir count");

  RateSet rs;
  rs.n_levels = n;
  rs.n_reservoirs = static_cast<int>(reservoirs.size());
  for (const auto& r : reservoirs)
    rs.reservoir_mu.push_back(r.kind == ReservoirKind::Equilibrium ? r.mu : 0.0);
  rs.table = bohr_frequencies(spec);
  const int nc = rs.channel_count();

  rs.sus.resize(nc);
  rs.Gamma_minus = Eigen::VectorXd::Zero(nc);
  rs.Gamma_plus = Eigen::VectorXd::Zero(nc);
  Eigen::VectorXd theta_minus = Eigen::VectorXd::Zero(nc);
  Eigen::VectorXd theta_plus = Eigen::VectorXd::Zero(nc);

  for (int c = 0; c < nc; ++c) {
    const auto& ch = rs.table.entries[c];
    rs.sus[c].resize(reservoirs.size());
    for (std::size_t j = 0; j < reservoirs.size(); ++j) {
      const double w = spec.weight(static_cast<int>(j), ch.upper, ch.lower);
      rs.sus[c][j] = susceptivity(reservoirs[j], w, ch.omega, mode);
      rs.Gamma_minus[c] += 2.0 * rs.sus[c][j].gamma_minus.real();
      rs.Gamma_plus[c] += 2.0 * rs.sus[c][j].gamma_plus.real();
      theta_minus[c] += rs.sus[c][j].gamma_minus.imag();
      theta_plus[c] += rs.sus[c][j].gamma_plus.imag();
    }
  }

  // Transition matrix: Gamma(m, l) is the m -> l rate, so the downhill
  // direction carries the emission rate Gamma_- of the gap.
  rs.Gamma = Eigen::MatrixXd::Zero(n, n);
  for (int c = 0; c < nc; ++c) {
    const auto& ch = rs.table.entries[c];
    rs.Gamma(ch.upper, ch.lower) = rs.Gamma_minus[c];
    rs.Gamma(ch.lower, ch.upper) = rs.Gamma_plus[c];
  }

  // Off-diagonal decay: half the total escape rate of the two levels.
  rs.G = Eigen::MatrixXd::Zero(n, n);
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k) {
      if (m == k) continue;
      double s = 0.0;
      for (int l = 0; l < n; ++l) s += rs.Gamma(m, l) + rs.Gamma(k, l);
      rs.G(m, k) = 0.5 * s;
    }

  // Diagonal shift operator: Im gamma_- loads the upper level of each
  // channel, Im gamma_+ the lower one.
  rs.Delta_diag = Eigen::VectorXd::Zero(n);
  for (int c = 0; c < nc; ++c) {
    const auto& ch = rs.table.entries[c];
    rs.Delta_diag[ch.upper] += theta_minus[c];
    rs.Delta_diag[ch.lower] -= theta_plus[c];
  }
  rs.Delta_shift = Eigen::MatrixXd::Zero(n, n);
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k) rs.Delta_shift(m, k) = rs.Delta_diag(k) - rs.Delta_diag(m);

  return rs;
}

inline double rate_quotient(const RateSet& rs, int m, int l) {
  if (m == l || m < 0 || l < 0 || m >= rs.n_levels || l >= rs.n_levels)
    fail_validation("InconsistentDimensions", "rate_quotient needs two distinct level indices");
  const double denom = rs.Gamma(l, m);
  if (denom == 0.0) fail_numerical("ZeroDenominator", "Gamma_lm vanishes");
  return rs.Gamma(m, l) / denom;
}

}  // namespace neqsteady
