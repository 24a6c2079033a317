#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "neqsteady/errors.hpp"

namespace neqsteady {

namespace detail {

// Piecewise-linear table on strictly increasing abscissae.
struct LinearTable {
  std::vector<double> x;
  std::vector<double> y;

  void validate(const std::string& what) const {
    if (x.size() < 2 || x.size() != y.size())
      fail_validation("ConfigError", what + ": tabulated form needs >= 2 (x, y) pairs");
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
      if (x[i + 1] <= x[i])
        fail_validation("ConfigError", what + ": tabulated abscissae must be increasing");
  }

  // Clamped evaluation: constant extension outside the table.
  double operator()(double v) const {
    if (v <= x.front()) return y.front();
    if (v >= x.back()) return y.back();
    std::size_t hi = 1;
    while (x[hi] < v) ++hi;
    const double t = (v - x[hi - 1]) / (x[hi] - x[hi - 1]);
    return y[hi - 1] + t * (y[hi] - y[hi - 1]);
  }
};

}  // namespace detail

// Reduced coupling weight J(omega) = integral dk |g_omega(k)|^2 delta(omega(k)-omega),
// pi-free. Built-in forms: flat, ohmic with exponential cutoff, tabulated.
class SpectralDensity {
public:
  static SpectralDensity flat(double eta) {
    require_nonneg(eta);
    SpectralDensity j;
    j.fn_ = [eta](double) { return eta; };
    j.label_ = "flat";
    return j;
  }

  static SpectralDensity ohmic(double eta, double omega_c) {
    require_nonneg(eta);
    if (omega_c <= 0) fail_validation("ConfigError", "ohmic cutoff must be positive");
    SpectralDensity j;
    j.fn_ = [eta, omega_c](double w) { return w <= 0 ? 0.0 : eta * w * std::exp(-w / omega_c); };
    j.label_ = "ohmic";
    return j;
  }

  static SpectralDensity tabulated(std::vector<double> omegas, std::vector<double> values) {
    detail::LinearTable t{std::move(omegas), std::move(values)};
    t.validate("spectral_density");
    for (double v : t.y) require_nonneg(v);
    SpectralDensity j;
    // Zero outside the tabulated support.
    j.fn_ = [t](double w) {
      if (w < t.x.front() || w > t.x.back()) return 0.0;
      return t(w);
    };
    j.label_ = "tabulated";
    return j;
  }

  double operator()(double omega) const { return fn_(omega); }
  const std::string& label() const { return label_; }

private:
  static void require_nonneg(double v) {
    if (v < 0) fail_validation("ConfigError", "spectral density must be nonnegative");
  }
  std::function<double(double)> fn_;
  std::string label_;
};

// Inverse-temperature profile beta(omega) for local-equilibrium reservoirs.
class BetaProfile {
public:
  static BetaProfile constant(double beta) {
    if (beta <= 0) fail_validation("NonPositiveArgument", "constant beta must be positive");
    BetaProfile b;
    b.fn_ = [beta](double) { return beta; };
    b.label_ = "constant";
    return b;
  }

  // beta(omega) = scale / omega; beta(omega) * omega is then constant.
  static BetaProfile inverse(double scale = 1.0) {
    if (scale <= 0) fail_validation("NonPositiveArgument", "inverse-profile scale must be positive");
    BetaProfile b;
    b.fn_ = [scale](double w) { return scale / w; };
    b.label_ = "inverse";
    return b;
  }

  static BetaProfile affine(double beta0, double slope) {
    BetaProfile b;
    b.fn_ = [beta0, slope](double w) { return beta0 + slope * w; };
    b.label_ = "affine";
    return b;
  }

  static BetaProfile tabulated(std::vector<double> omegas, std::vector<double> betas) {
    detail::LinearTable t{std::move(omegas), std::move(betas)};
    t.validate("beta_fn");
    for (double v : t.y)
      if (v <= 0) fail_validation("NonPositiveArgument", "tabulated beta must be positive");
    BetaProfile b;
    b.fn_ = [t](double w) { return t(w); };
    b.label_ = "tabulated";
    return b;
  }

  double operator()(double omega) const { return fn_(omega); }
  const std::string& label() const { return label_; }

private:
  std::function<double(double)> fn_;
  std::string label_;
};

enum class ReservoirKind { Equilibrium, LocalEquilibrium };

// A bosonic reservoir: either a (beta, mu) equilibrium state or a
// frequency-dependent-temperature state, plus its reduced coupling J(omega).
struct ReservoirSpec {
  ReservoirKind kind;
  double beta = 0.0;      // Equilibrium only
  double mu = 0.0;        // Equilibrium only
  BetaProfile beta_fn = BetaProfile::constant(1.0);  // LocalEquilibrium only
  SpectralDensity spectral_density = SpectralDensity::flat(0.0);
  double pv_cutoff = 0.0;

  static ReservoirSpec equilibrium(double beta, double mu, SpectralDensity j, double pv_cutoff) {
    if (beta <= 0) fail_validation("NonPositiveArgument", "beta must be positive");
    if (pv_cutoff <= 0) fail_validation("ConfigError", "pv_cutoff must be positive");
    ReservoirSpec r;
    r.kind = ReservoirKind::Equilibrium;
    r.beta = beta;
    r.mu = mu;
    r.spectral_density = std::move(j);
    r.pv_cutoff = pv_cutoff;
    return r;
  }

  static ReservoirSpec local_equilibrium(BetaProfile beta_fn, SpectralDensity j,
                                         double pv_cutoff) {
    if (pv_cutoff <= 0) fail_validation("ConfigError", "pv_cutoff must be positive");
    ReservoirSpec r;
    r.kind = ReservoirKind::LocalEquilibrium;
    r.beta_fn = std::move(beta_fn);
    r.spectral_density = std::move(j);
    r.pv_cutoff = pv_cutoff;
    return r;
  }
};

// Bose occupation of the reservoir mode shell resonant with omega.
inline double occupation(const ReservoirSpec& r, double omega) {
  if (omega <= 0) fail_validation("NonPositiveArgument", "occupation needs omega > 0");
  double x;
  if (r.kind == ReservoirKind::Equilibrium) {
    if (omega <= r.mu)
      fail_validation("NonPositiveArgument", "Bose factor diverges: omega <= mu");
    x = r.beta * (omega - r.mu);
  } else {
    const double b = r.beta_fn(omega);
    if (b <= 0) fail_validation("NonPositiveArgument", "beta(omega) must be positive");
    x = b * omega;
  }
  return 1.0 / std::expm1(x);
}

}  // namespace neqsteady
