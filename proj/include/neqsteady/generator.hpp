#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "neqsteady/rates.hpp"

namespace neqsteady {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

namespace linops {

// Column-major vectorization; vec(A X B) = (B^T kron A) vec(X).
inline Vec vectorize(const Mat& x) { return Eigen::Map<const Vec>(x.data(), x.size()); }

inline Mat unvectorize(const Vec& v, int n) {
  return Eigen::Map<const Mat>(v.data(), n, n);
}

inline Mat sandwich(const Mat& a, const Mat& b) {
  return Eigen::kroneckerProduct(b.transpose(), a);
}

inline Mat left_mul(const Mat& m) {
  const Mat id = Mat::Identity(m.rows(), m.cols());
  return Eigen::kroneckerProduct(id, m);
}

inline Mat right_mul(const Mat& m) {
  const Mat id = Mat::Identity(m.rows(), m.cols());
  return Eigen::kroneckerProduct(m.transpose(), id);
}

}  // namespace linops

using DensityMatrix = Mat;

inline void validate_density(const Mat& rho, double trace_tol = 1e-12,
                             double eig_floor = -1e-10) {
  if (rho.rows() != rho.cols())
    fail_validation("InconsistentDimensions", "density matrix must be square");
  if ((rho - rho.adjoint()).norm() > 1e-10)
    fail_validation("InconsistentDimensions", "density matrix must be Hermitian");
  if (std::abs(rho.trace().real() - 1.0) > trace_tol || std::abs(rho.trace().imag()) > trace_tol)
    fail_validation("InconsistentDimensions", "density matrix must have unit trace");
  Eigen::SelfAdjointEigenSolver<Mat> es(rho);
  if (es.eigenvalues().minCoeff() < eig_floor)
    fail_validation("InconsistentDimensions", "density matrix must be positive semidefinite");
}

// Classical rate matrix of the population sector: d/dt rho_diag = -A rho_diag.
struct BirthDeathMatrix {
  Eigen::MatrixXd A;
};

// The three superoperators plus the data shared by every downstream analysis.
// lstar acts on vec(rho); heis / heis_b are the forward and backward
// Heisenberg generators acting on vec(X).
struct GeneratorOps {
  int n = 0;
  Eigen::VectorXd levels;
  Mat lstar;
  Mat heis;
  Mat heis_b;
  BirthDeathMatrix bd;
  Eigen::MatrixXd G;
  Eigen::VectorXd Delta_diag;
  Eigen::MatrixXd Delta_shift;

  Mat apply_lstar(const Mat& rho) const {
    return linops::unvectorize(lstar * linops::vectorize(rho), n);
  }
  Mat apply_heis(const Mat& x) const {
    return linops::unvectorize(heis * linops::vectorize(x), n);
  }
  Mat apply_heis_b(const Mat& x) const {
    return linops::unvectorize(heis_b * linops::vectorize(x), n);
  }
};

inline GeneratorOps build_generators(const SystemSpec& spec, const RateSet& rs) {
  const int n = spec.n_levels();
  if (rs.n_levels != n)
    fail_validation("InconsistentDimensions", "rate set does not match system size");

  GeneratorOps ops;
  ops.n = n;
  ops.levels = spec.levels;
  ops.G = rs.G;
  ops.Delta_diag = rs.Delta_diag;
  ops.Delta_shift = rs.Delta_shift;

  const int n2 = n * n;
  Mat lstar = Mat::Zero(n2, n2);
  Mat diss_heis = Mat::Zero(n2, n2);  // dissipator shared by both Heisenberg generators

  Mat delta = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k) delta(k, k) = rs.Delta_diag[k];
  const Mat comm = linops::left_mul(delta) - linops::right_mul(delta);
  const Cplx i1(0.0, 1.0);
  lstar -= i1 * comm;

  for (int c = 0; c < rs.channel_count(); ++c) {
    const auto& ch = rs.channel(c);
    Mat e = Mat::Zero(n, n);
    e(ch.lower, ch.upper) = 1.0;  // lowering operator of this channel
    const Mat ed = e.adjoint();
    const Mat pu = ed * e;  // upper-level projector
    const Mat pl = e * ed;  // lower-level projector
    const double gm = rs.Gamma_minus[c];
    const double gp = rs.Gamma_plus[c];

    lstar += gm * (linops::sandwich(e, ed) -
                   0.5 * (linops::left_mul(pu) + linops::right_mul(pu)));
    lstar += gp * (linops::sandwich(ed, e) -
                   0.5 * (linops::left_mul(pl) + linops::right_mul(pl)));

    diss_heis += gm * (linops::sandwich(ed, e) -
                       0.5 * (linops::left_mul(pu) + linops::right_mul(pu)));
    diss_heis += gp * (linops::sandwich(e, ed) -
                       0.5 * (linops::left_mul(pl) + linops::right_mul(pl)));
  }

  ops.lstar = lstar;
  ops.heis = i1 * comm + diss_heis;
  ops.heis_b = -i1 * comm + diss_heis;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int m = 0; m < n; ++m) {
    for (int l = 0; l < n; ++l) {
      if (l == m) continue;
      a(m, m) += rs.Gamma(m, l);
      a(m, l) = -rs.Gamma(l, m);
    }
  }
  ops.bd.A = a;
  return ops;
}

enum class EvolveMethod { automatic, exponential, adaptive };

namespace detail {

// Dormand-Prince 5(4) on the vectorized state; used above the exact-exponential
// size threshold and available for cross-checks at any size.
inline Vec rk45(const Mat& gen, Vec y, double t, double rel_tol) {
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                      a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                      a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                      b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  if (t == 0.0) return y;
  double s = 0.0;
  double h = t / 64.0;
  const double min_step = t * 1e-13;
  int guard = 0;
  while (s < t) {
    if (++guard > 2000000) fail_numerical("StepFailure", "adaptive integrator stalled");
    if (s + h > t) h = t - s;
    const Vec k1 = gen * y;
    const Vec k2 = gen * (y + h * a21 * k1);
    const Vec k3 = gen * (y + h * (a31 * k1 + a32 * k2));
    const Vec k4 = gen * (y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec k5 = gen * (y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vec k6 = gen * (y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vec y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vec k7 = gen * y5;
    const double err =
        (h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7)).norm();
    const double scale = rel_tol * std::max(1.0, y.norm());
    if (err <= scale) {
      s += h;
      y = y5;
    }
    const double grow = err > 0 ? 0.9 * std::pow(scale / err, 0.2) : 4.0;
    h *= std::min(4.0, std::max(0.2, grow));
    if (h < min_step) fail_numerical("StepFailure", "adaptive integrator step underflow");
  }
  return y;
}

}  // namespace detail

inline Mat evolve(const GeneratorOps& ops, const Mat& rho0, double t,
                  EvolveMethod method = EvolveMethod::automatic) {
  validate_density(rho0);
  if (t < 0) fail_validation("NonPositiveArgument", "evolution time must be >= 0");
  if (rho0.rows() != ops.n)
    fail_validation("InconsistentDimensions", "state size does not match generator");
  if (t == 0.0) return rho0;

  const bool use_exp = method == EvolveMethod::exponential ||
                       (method == EvolveMethod::automatic && ops.n <= 12);
  Vec v = linops::vectorize(rho0);
  if (use_exp) {
    const Mat propagator = (t * ops.lstar).exp();
    v = propagator * v;
  } else {
    v = detail::rk45(ops.lstar, v, t, 1e-11);
  }
  Mat rho = linops::unvectorize(v, ops.n);

  // Positivity and trace are invariants of the exact flow; violations beyond
  // tolerance indicate an integrator failure and are reported, not repaired.
  if (std::abs(rho.trace().real() - 1.0) > 1e-9 || (rho - rho.adjoint()).norm() > 1e-9)
    fail_numerical("NoConvergence", "evolution drifted off the density-matrix manifold");
  Eigen::SelfAdjointEigenSolver<Mat> es((rho + rho.adjoint()) / 2.0);
  if (es.eigenvalues().minCoeff() < -1e-8)
    fail_numerical("NoConvergence", "evolution produced a negative population");
  return rho;
}

// Population evolution through the birth-death sector alone.
inline Eigen::VectorXd evolve_populations(const GeneratorOps& ops, const Eigen::VectorXd& p0,
                                          double t) {
  const Eigen::MatrixXd prop = (-t * ops.bd.A).exp();
  return prop * p0;
}

inline Mat stationary_state(const GeneratorOps& ops) {
  const int n = ops.n;
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k)
      if (m != k && ops.G(m, k) <= 0.0)
        fail_numerical("ReducibleDynamics",
                       "an off-diagonal decay rate vanishes; coherences do not relax");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(ops.bd.A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double thresh = 1e-10 * sv(0);
  int kernel_dim = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) <= thresh) ++kernel_dim;
  if (kernel_dim > 1)
    fail_numerical("ReducibleDynamics", "population kernel is degenerate (disconnected levels)");
  if (kernel_dim == 0)
    fail_numerical("NoConvergence", "no stationary population vector found");

  Eigen::VectorXd v = svd.matrixV().col(n - 1);
  if (v.sum() < 0) v = -v;
  const double floor = -1e-12 * v.cwiseAbs().maxCoeff();
  for (int i = 0; i < n; ++i) {
    if (v[i] < floor)
      fail_numerical("NoConvergence", "stationary kernel vector is not sign-definite");
    v[i] = std::max(v[i], 0.0);
  }
  v /= v.sum();

  Mat rho = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) rho(i, i) = v[i];

  const double resid = ops.apply_lstar(rho).norm();
  if (resid > 1e-11 * std::max(1.0, ops.bd.A.cwiseAbs().maxCoeff()))
    fail_numerical("NoConvergence", "stationary residual above tolerance");
  return rho;
}

// Gibbs reference state on the given spectrum.
inline Mat gibbs_state(const Eigen::VectorXd& levels, double beta) {
  const int n = static_cast<int>(levels.size());
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w[i] = std::exp(-beta * levels[i]);
  w /= w.sum();
  Mat rho = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) rho(i, i) = w[i];
  return rho;
}

}  // namespace neqsteady
