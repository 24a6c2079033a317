#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "neqsteady/generator.hpp"
#include "support.hpp"

using namespace neqsteady;

namespace {

GeneratorOps thermal_ops(std::mt19937& rng, int n, double beta, double mu,
                         LambShift mode = LambShift::none) {
    const auto spec = testsup::random_system(rng, n, 1);
    return build_generators(spec,
                            rate_set(spec, {testsup::thermal_bath(beta, mu)}, mode));
}

}  // namespace

TEST_CASE("single thermal bath relaxes onto the Gibbs state") {
    std::mt19937 rng(11);
    const double beta = 1.1;
    const auto spec = testsup::random_system(rng, 4, 1);
    const auto ops =
        build_generators(spec, rate_set(spec, {testsup::thermal_bath(beta)}));
    const Mat gibbs = gibbs_state(spec.levels, beta);
    CHECK(ops.apply_lstar(gibbs).norm() < 1e-12);
    const Mat rho = stationary_state(ops);
    CHECK((rho - gibbs).norm() < 1e-10);
}

TEST_CASE("chemical potential tilts the two-level fixed point") {
    Eigen::VectorXd lv(2);
    lv << 0.0, 1.0;
    const auto spec = testsup::ladder_spec(lv);
    const double beta = 0.8, mu = -0.6;
    const auto ops = build_generators(
        spec, rate_set(spec, {testsup::thermal_bath(beta, mu)}, LambShift::none));
    const Mat rho = stationary_state(ops);
    const double ratio = rho(1, 1).real() / rho(0, 0).real();
    CHECK(ratio == Catch::Approx(std::exp(-beta * (1.0 - mu))).epsilon(1e-12));
}

TEST_CASE("off-diagonal entries decay with the computed shift and damping") {
    std::mt19937 rng(23);
    const auto spec = testsup::ladder_spec(testsup::canonical_three_levels());
    const auto ops =
        build_generators(spec, rate_set(spec, {testsup::unit_local_bath()}));
    const Mat rho0 = testsup::random_state(rng, 3);
    const double t = 0.8;
    const Mat rho_exp = evolve(ops, rho0, t, EvolveMethod::exponential);
    const Mat rho_rk = evolve(ops, rho0, t, EvolveMethod::adaptive);
    CHECK((rho_exp - rho_rk).norm() < 1e-9);
    for (int m = 0; m < 3; ++m)
        for (int k = 0; k < 3; ++k) {
            if (m == k) continue;
            const Cplx rate(-ops.G(m, k), ops.Delta_shift(m, k));
            const Cplx expect = std::exp(rate * t) * rho0(m, k);
            CHECK(std::abs(rho_exp(m, k) - expect) < 1e-12);
        }
}

TEST_CASE("evolution preserves the density-matrix manifold") {
    std::mt19937 rng(31);
    const auto ops = thermal_ops(rng, 4, 1.4, -0.2);
    for (int trial = 0; trial < 5; ++trial) {
        const Mat rho0 = testsup::random_state(rng, 4);
        const Mat rho = evolve(ops, rho0, 0.5 + 0.3 * trial);
        CHECK(std::abs(rho.trace().real() - 1.0) < 1e-12);
        CHECK((rho - rho.adjoint()).norm() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Mat> es(rho);
        CHECK(es.eigenvalues().minCoeff() > -1e-12);
        CHECK_NOTHROW(validate_density(rho));
    }
}

TEST_CASE("population sector matrix has zero column sums") {
    std::mt19937 rng(41);
    const auto ops = thermal_ops(rng, 5, 0.9, -0.5);
    const Eigen::VectorXd colsum = ops.bd.A.colwise().sum();
    CHECK(colsum.cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("population evolution agrees with the diagonal of the full flow") {
    std::mt19937 rng(43);
    const auto ops = thermal_ops(rng, 4, 1.2, 0.0);
    const Mat rho0 = testsup::random_state(rng, 4);
    const double t = 1.7;
    const Mat rho = evolve(ops, rho0, t);
    const Eigen::VectorXd p =
        evolve_populations(ops, rho0.diagonal().real(), t);
    for (int i = 0; i < 4; ++i)
        CHECK(rho(i, i).real() == Catch::Approx(p[i]).margin(1e-10));
    CHECK(p.sum() == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Heisenberg generator is the trace dual of the state generator") {
    std::mt19937 rng(47);
    const auto ops = thermal_ops(rng, 3, 1.0, 0.0, LambShift::pv);
    const Mat rho = testsup::random_state(rng, 3);
    Mat x(3, 3);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            x(r, c) = Cplx(std::cos(1.0 + r + 2 * c), std::sin(0.5 * r - c));
    x = (x + Mat(x.adjoint())).eval();
    const Cplx lhs = (ops.apply_lstar(rho) * x).trace();
    const Cplx rhs = (rho * ops.apply_heis(x)).trace();
    CHECK(std::abs(lhs - rhs) < 1e-12);
    // The dual generator is unital; this is trace preservation of the flow.
    CHECK(ops.apply_heis(Mat::Identity(3, 3)).norm() < 1e-13);
    CHECK(ops.apply_heis_b(Mat::Identity(3, 3)).norm() < 1e-13);
    // The two Heisenberg generators differ only in the sign of the commutator.
    Mat delta = Mat::Zero(3, 3);
    for (int k = 0; k < 3; ++k) delta(k, k) = ops.Delta_diag[k];
    const Mat diff = ops.apply_heis(x) - ops.apply_heis_b(x);
    const Mat comm = Cplx(0.0, 2.0) * (delta * x - x * delta);
    CHECK((diff - comm).norm() < 1e-13);
}

TEST_CASE("evolution rejects invalid inputs") {
    std::mt19937 rng(53);
    const auto ops = thermal_ops(rng, 3, 1.0, 0.0);
    const Mat rho0 = testsup::random_state(rng, 3);
    CHECK_THROWS_AS(evolve(ops, rho0, -0.1), ValidationError);
    CHECK((evolve(ops, rho0, 0.0) - rho0).norm() == 0.0);
    const Mat wrong = testsup::random_state(rng, 2);
    CHECK_THROWS_AS(evolve(ops, wrong, 1.0), ValidationError);
}

TEST_CASE("density validation rejects malformed matrices") {
    Mat good = Mat::Zero(2, 2);
    good(0, 0) = 0.25;
    good(1, 1) = 0.75;
    CHECK_NOTHROW(validate_density(good));

    Mat bad = good;
    bad(0, 1) = Cplx(0.1, 0.0);  // not Hermitian
    CHECK_THROWS_AS(validate_density(bad), ValidationError);

    bad = good;
    bad(0, 0) = 0.5;  // trace 1.25
    CHECK_THROWS_AS(validate_density(bad), ValidationError);

    bad = Mat::Zero(2, 2);
    bad(0, 0) = 1.5;
    bad(1, 1) = -0.5;  // negative eigenvalue
    CHECK_THROWS_AS(validate_density(bad), ValidationError);

    CHECK_THROWS_AS(validate_density(Mat::Zero(2, 3)), ValidationError);
}

TEST_CASE("disconnected level pairs are reported, not averaged over") {
    Eigen::VectorXd lv(4);
    lv << 0.0, 1.0, 2.3, 3.9;
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(4, 4);
    d(0, 1) = 1.0;  // only the lowest pair is coupled
    const auto spec = validate_system(lv, {d});
    const auto ops = build_generators(
        spec, rate_set(spec, {testsup::thermal_bath(1.0)}, LambShift::none));
    CHECK_THROWS_AS(stationary_state(ops), NumericalError);
}

TEST_CASE("Gibbs reference state") {
    Eigen::VectorXd lv(2);
    lv << 0.0, 2.0;
    const Mat g = gibbs_state(lv, 0.5);
    const double z = 1.0 + std::exp(-1.0);
    CHECK(g(0, 0).real() == Catch::Approx(1.0 / z));
    CHECK(g(1, 1).real() == Catch::Approx(std::exp(-1.0) / z));
    CHECK(std::abs(g(0, 1)) == 0.0);
}
