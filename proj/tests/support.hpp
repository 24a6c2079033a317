#pragma once

// Shared test fixtures: seeded random instances with generic spectra.

#include <random>
#include <vector>

#include "neqsteady/neqsteady.hpp"

namespace testsup {

using namespace neqsteady;

// Strictly increasing levels whose pairwise gaps are themselves pairwise
// separated, so every Bohr channel is resolvable. Ground level at base.
inline Eigen::VectorXd random_spectrum(std::mt19937& rng, int n,
                                       double base = 0.0, double sep = 1e-3) {
    std::uniform_real_distribution<double> gap(0.5, 1.5);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        Eigen::VectorXd lv(n);
        lv(0) = base;
        for (int i = 1; i < n; ++i) lv(i) = lv(i - 1) + gap(rng);
        std::vector<double> gaps;
        for (int m = 1; m < n; ++m)
            for (int l = 0; l < m; ++l) gaps.push_back(lv(m) - lv(l));
        std::sort(gaps.begin(), gaps.end());
        bool ok = true;
        for (std::size_t i = 0; i + 1 < gaps.size(); ++i)
            if (gaps[i + 1] - gaps[i] < sep) ok = false;
        if (ok) return lv;
    }
    throw std::runtime_error("spectrum sampling did not converge");
}

// Full coupling: every pair gets a dipole amplitude with magnitude in
// [0.3, 1.2] and a random phase.
inline Eigen::MatrixXcd random_dipole(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> mag(0.3, 1.2);
    std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n, n);
    for (int u = 1; u < n; ++u)
        for (int l = 0; l < u; ++l) {
            const double p = phase(rng);
            d(l, u) = mag(rng) * Cplx(std::cos(p), std::sin(p));
        }
    return d;
}

inline SystemSpec random_system(std::mt19937& rng, int n, int n_res,
                                double base = 0.0) {
    const Eigen::VectorXd lv = random_spectrum(rng, n, base);
    std::vector<Eigen::MatrixXcd> dips;
    for (int j = 0; j < n_res; ++j) dips.push_back(random_dipole(rng, n));
    return validate_system(lv, dips);
}

inline ReservoirSpec thermal_bath(double beta, double mu = 0.0,
                                  double eta = 0.7) {
    return ReservoirSpec::equilibrium(
        beta, mu, SpectralDensity::ohmic(eta, 5.0), 60.0);
}

// Single-reservoir instance of the canonical frequency-local bath:
// beta(omega) = 1/omega, flat J = 1/pi, unit weights on a three-level
// ladder. Every channel then has Re gamma_- = e/(e-1), Re gamma_+ =
// 1/(e-1).
inline ReservoirSpec unit_local_bath() {
    return ReservoirSpec::local_equilibrium(
        BetaProfile::inverse(1.0),
        SpectralDensity::flat(1.0 / 3.14159265358979323846), 60.0);
}

inline SystemSpec ladder_spec(const Eigen::VectorXd& levels, int n_res = 1,
                              double amp = 1.0) {
    const int n = static_cast<int>(levels.size());
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n, n);
    for (int u = 1; u < n; ++u)
        for (int l = 0; l < u; ++l) d(l, u) = amp;
    std::vector<Eigen::MatrixXcd> dips(static_cast<std::size_t>(n_res), d);
    return validate_system(levels, dips);
}

inline Eigen::VectorXd canonical_three_levels() {
    Eigen::VectorXd lv(3);
    lv << 0.0, 1.0, 2.5;
    return lv;
}

// Random unit-trace density matrix with strictly positive spectrum.
inline DensityMatrix random_state(std::mt19937& rng, int n) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat a(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) a(r, c) = Cplx(g(rng), g(rng));
    Mat rho = a * a.adjoint();
    rho += 1e-3 * Mat::Identity(n, n);
    return rho / rho.trace().real();
}

}  // namespace testsup
