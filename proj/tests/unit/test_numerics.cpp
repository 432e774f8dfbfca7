// test_numerics.cpp — Quadrature, propagation and linear-algebra helpers against closed forms

#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "strongdecoh/errors.hpp"
#include "strongdecoh/numerics.hpp"

using namespace strongdecoh;
using namespace strongdecoh::numerics;
using strongdecoh::testing::cplx;
using Eigen::MatrixXcd;

TEST_SUITE("numerics") {

TEST_CASE("interval quadrature on smooth and kinked integrands") {
    QuadratureSpec q;
    auto r = integrate_interval([](double x) { return cplx(std::sin(x), std::cos(3 * x)); }, 0.0, M_PI, q);
    CHECK(r.converged);
    CHECK(std::abs(r.value - cplx(2.0, std::sin(3 * M_PI) / 3.0)) < 1e-12);
    const double bp[] = {0.3};
    auto k = integrate_interval([](double x) { return cplx(std::abs(x - 0.3)); }, 0.0, 1.0, q, bp);
    CHECK(std::abs(k.value.real() - (0.045 + 0.245)) < 1e-13);
    // reversed limits flip the sign
    auto rev = integrate_interval([](double x) { return cplx(x * x); }, 1.0, 0.0, q);
    CHECK(std::abs(rev.value.real() + 1.0 / 3.0) < 1e-14);
}

TEST_CASE("frequency half-line quadrature") {
    QuadratureSpec q;
    CHECK(std::abs(integrate_frequency([](double w) { return cplx(std::exp(-w)); }, q).value - 1.0) < 1e-10);
    // int_0^inf w/(1+w^2)^2 = 1/2, algebraic tail
    auto r = integrate_frequency([](double w) { return cplx(w / ((1 + w * w) * (1 + w * w))); }, q);
    CHECK(std::abs(r.value.real() - 0.5) < 1e-9);
}

TEST_CASE("oscillatory kernel transforms") {
    QuadratureSpec q;
    q.time_scale = 1.0;
    for (double w : {0.0, 0.7, -2.5, 10.0}) {
        auto r = integrate_kernel_halfline([](double t) { return cplx(std::exp(-t)); }, w, q);
        CHECK(std::abs(r.value - 1.0 / cplx(1.0, -w)) < 1e-10);
    }
    // finite upper limit
    const double T = 2.0, w = 1.3;
    auto f = integrate_kernel([](double t) { return cplx(std::exp(-t)); }, w, T, q);
    const cplx z(-1.0, w);
    CHECK(std::abs(f.value - (std::exp(z * T) - 1.0) / z) < 1e-12);
    // non-decaying kernel is reported
    QuadratureSpec tight = q;
    tight.max_horizon = 50.0;
    CHECK_THROWS_AS(integrate_kernel_halfline([](double) { return cplx(1.0); }, 0.0, tight), NonDecayingKernelError);
}

TEST_CASE("cumulative kernel integrals agree with independent integrals") {
    QuadratureSpec q;
    q.time_scale = 0.5;
    auto zeta = [](double t) { return std::exp(cplx(-0.3 * t, 0.2 * t * t / (1 + t))); };
    std::vector<double> times{0.0, 0.1, 1.0, 3.0, 3.0, 10.0, 80.0};
    auto cum = cumulative_kernel_integral(zeta, 0.4, times, q);
    for (std::size_t k = 0; k < times.size(); ++k) {
        const cplx ref = times[k] > 0 ? integrate_kernel(zeta, 0.4, times[k], q).value : cplx(0.0);
        CHECK(std::abs(cum[k] - ref) < 1e-10);
    }
    std::vector<double> bad{1.0, 0.5};
    CHECK_THROWS_AS(cumulative_kernel_integral(zeta, 0.0, bad, q), DomainError);
}

TEST_CASE("time grids") {
    auto g = TimeGrid::uniform(0.0, 1.0, 0.3);
    CHECK(g.size() == 5);
    CHECK(g.end() == doctest::Approx(1.0));
    CHECK_THROWS_AS(TimeGrid::uniform(0.0, 1.0, 0.0), ConfigError);
    CHECK_THROWS(TimeGrid::from_nodes({0.0, 2.0, 1.0}));
}

TEST_CASE("propagation against the matrix exponential") {
    std::mt19937_64 rng(11);
    const MatrixXcd H = testing::random_hermitian(4, 1.0, rng);
    const MatrixXcd L = cplx(0.0, -1.0) * H; // y' = -i H y
    Eigen::VectorXcd y0 = Eigen::VectorXcd::Zero(4);
    y0(0) = 1.0;
    const auto grid = TimeGrid::uniform(0.0, 5.0, 0.5);
    const auto rk = propagate(L, y0, grid);
    PropagateOptions o;
    o.stepper = Stepper::dopri5;
    o.tolerance = 1e-11;
    ComplexRhs rhs = [&](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) { dy = L * y; };
    const auto dp = propagate(rhs, y0, grid, o);
    for (std::size_t s = 0; s < grid.size(); ++s) {
        const Eigen::VectorXcd ex = expm_hermitian(H, cplx(0.0, -grid.nodes[s])) * y0;
        CHECK((rk[s] - ex).norm() < 1e-8);
        CHECK((dp[s] - ex).norm() < 1e-8);
    }
}

TEST_CASE("real propagation of a two-state rate equation") {
    Eigen::MatrixXd L(2, 2);
    L << -0.3, 0.1, 0.3, -0.1;
    Eigen::VectorXd p0(2);
    p0 << 1.0, 0.0;
    const auto grid = TimeGrid::uniform(0.0, 20.0, 1.0);
    const auto p = propagate(L, p0, grid);
    for (std::size_t s = 0; s < grid.size(); ++s) {
        const double ex = 0.25 + 0.75 * std::exp(-0.4 * grid.nodes[s]);
        CHECK(std::abs(p[s](0) - ex) < 1e-9);
    }
    const auto v = steady_null_space(L);
    CHECK(std::abs(v(0) - 0.25) < 1e-12);
    CHECK(std::abs(v(1) - 0.75) < 1e-12);
}

TEST_CASE("vectorization identities") {
    std::mt19937_64 rng(3);
    const MatrixXcd A = testing::random_hermitian(3, 1.0, rng) + cplx(0, 1) * testing::random_hermitian(3, 1.0, rng);
    const MatrixXcd B = testing::random_hermitian(3, 1.0, rng);
    const MatrixXcd X = testing::random_hermitian(3, 1.0, rng) + cplx(0, 0.5) * testing::random_hermitian(3, 1.0, rng);
    CHECK((unvec(sandwich(A, B) * vec(X), 3) - A * X * B).norm() < 1e-12);
    CHECK((unvec(left_mult(A) * vec(X), 3) - A * X).norm() < 1e-12);
    CHECK((unvec(right_mult(B) * vec(X), 3) - X * B).norm() < 1e-12);
    CHECK((kron(A, B).block(0, 0, 3, 3) - A(0, 0) * B).norm() < 1e-14);
}

TEST_CASE("norms and Hermitian exponentials") {
    std::mt19937_64 rng(5);
    const MatrixXcd H = testing::random_hermitian(4, 2.0, rng);
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H);
    CHECK(std::abs(trace_norm(H) - es.eigenvalues().cwiseAbs().sum()) < 1e-12);
    CHECK(std::abs(operator_norm(H) - es.eigenvalues().cwiseAbs().maxCoeff()) < 1e-12);
    const MatrixXcd U = expm_hermitian(H, cplx(0.0, 0.7));
    CHECK((U * U.adjoint() - MatrixXcd::Identity(4, 4)).norm() < 1e-12);
    const MatrixXcd E = expm_hermitian(H, cplx(-0.5, 0.0));
    CHECK(std::abs(E.trace().real() - (-0.5 * es.eigenvalues().array()).exp().sum()) < 1e-12);
}

TEST_CASE("invalid quadrature settings") {
    QuadratureSpec q;
    q.rel_tol = 0.0;
    CHECK_THROWS_AS(q.validate(), ConfigError);
}

}
