// test_generators.cpp — Rate matrices and block generators: rates, detailed balance, positivity, reductions

#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "strongdecoh/dynamics.hpp"
#include "strongdecoh/errors.hpp"
#include "strongdecoh/generators.hpp"

using namespace strongdecoh;
using namespace strongdecoh::generators;
using strongdecoh::testing::cplx;
using Eigen::MatrixXcd;

namespace {

kernels::KernelContext simple_context(const model::SystemSpec& spec) {
    return kernels::KernelContext(model::build_pointer_model_simple(spec), bath::lineshape(spec.bath));
}

kernels::KernelContext general_context(const testing::DegenerateModel& d) {
    return kernels::KernelContext(model::build_pointer_model_general(d.spec, model::ExplicitPartition{d.projectors}),
                                  bath::lineshape(d.spec.bath));
}

} // namespace

TEST_SUITE("generators") {

TEST_CASE("spin-boson transfer rate against a direct trapezoid") {
    const auto ctx = simple_context(testing::spin_boson());
    const auto R = forster_rates(ctx);
    const double eta = units::cm_to_rad_fs(100.0), Om = 0.01, beta = ctx.model().beta;
    const double e = units::cm_to_rad_fs(10.0);
    // 2 J^2 Re int_0^inf exp[-G(t) - 4 i eta t], closed-form high-temperature G
    auto f = [&](double t) {
        const double x = Om * t;
        const cplx G = 4.0 * eta / Om * cplx(2.0 / (beta * Om), -1.0) * (std::exp(-x) + x - 1.0);
        return std::exp(-G - cplx(0.0, 4.0 * eta * t)).real();
    };
    const double h = 1e-3;
    double s = 0.5 * f(0.0);
    for (int k = 1; k * h < 200.0; ++k) s += f(k * h);
    const double ref = 2.0 * e * e * s * h;
    CHECK(R.rate(0, 1) == doctest::Approx(ref).epsilon(1e-6));
    CHECK(R.rate(1, 0) == doctest::Approx(ref).epsilon(1e-6));
    CHECK(units::rad_fs_to_cm(R.rate(0, 1)) == doctest::Approx(0.4067266).epsilon(1e-5));
    CHECK(R.gamma.colwise().sum().cwiseAbs().maxCoeff() < 1e-18);
}

TEST_CASE("detailed balance of the transfer rates on random models") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 4; ++trial) {
        const int N = 3 + trial % 3;
        const auto spec = testing::random_simple_model(N, 1 + trial % 2, rng, trial % 2 == 1);
        const auto ctx = simple_context(spec);
        const auto R = forster_rates(ctx);
        CHECK(detailed_balance_residual(R, ctx.model().eps_bar, ctx.model().beta) < 1e-6);
        CHECK_NOTHROW(R.validate());
    }
}

TEST_CASE("uncoupled pointer states have zero rates") {
    auto spec = testing::spin_boson();
    spec.hamiltonian = MatrixXcd::Zero(2, 2);
    const auto ctx = simple_context(spec);
    const auto R = forster_rates(ctx);
    CHECK(R.gamma.cwiseAbs().maxCoeff() == 0.0);
    CHECK(detailed_balance_residual(R, ctx.model().eps_bar, ctx.model().beta) == 0.0);
    CHECK(block_generator(ctx).terms.empty());
}

TEST_CASE("rate matrix construction and validation") {
    Eigen::MatrixXd off(3, 3);
    off << 0, 1, 2, 3, 0, 4, 5, 6, 0;
    const auto R = rate_matrix_from_rates(off);
    CHECK(R.gamma(0, 0) == -8.0);
    CHECK(R.gamma(2, 2) == -6.0);
    CHECK((R.rates() - off).cwiseAbs().maxCoeff() == 0.0);
    RateMatrix bad = R;
    bad.gamma(0, 1) = -1.0;
    CHECK_THROWS_AS(bad.validate(), NumericalError);
}

TEST_CASE("block generator with rank-one blocks reduces to the transfer rates") {
    std::mt19937_64 rng(103);
    for (int trial = 0; trial < 3; ++trial) {
        const int N = 3 + trial;
        const auto spec = testing::random_simple_model(N, 1, rng);
        const auto ctx = simple_context(spec);
        const auto R = forster_rates(ctx);
        const auto gen = block_generator(ctx);
        const MatrixXcd S = gen.superoperator(0.0);
        Eigen::MatrixXd pop(N, N);
        double leak = 0.0;
        for (int n = 0; n < N; ++n)
            for (int m = 0; m < N; ++m) pop(n, m) = S(n + N * n, m + N * m).real();
        for (int i = 0; i < N * N; ++i)
            for (int m = 0; m < N; ++m)
                if (i % (N + 1) != 0) leak = std::max(leak, std::abs(S(i, m + N * m)));
        const double scale = R.gamma.operatorNorm();
        CHECK((pop - R.gamma).operatorNorm() <= 1e-10 * scale);
        CHECK(leak <= 1e-12 * scale);
    }
}

TEST_CASE("eigenoperators of the block Hamiltonian") {
    std::mt19937_64 rng(107);
    const auto d = testing::random_degenerate_model({2, 2}, 1, rng);
    const auto ctx = general_context(d);
    const auto layout = empty_generator(ctx);
    const MatrixXcd X = testing::random_hermitian(4, 1.0, rng);
    for (auto [n, m] : {std::pair{0, 0}, std::pair{0, 1}, std::pair{1, 0}}) {
        const auto ops = eigenoperators(layout, X, n, m);
        MatrixXcd sum = MatrixXcd::Zero(4, 4);
        for (const auto& [w, Xw] : ops) {
            CHECK((layout.hbar * Xw - Xw * layout.hbar + w * Xw).norm() < 1e-12);
            sum += Xw;
        }
        const MatrixXcd piece = ctx.model().projector(n) * X * ctx.model().projector(m);
        CHECK((sum - piece).norm() < 1e-12);
        for (std::size_t k = 1; k < ops.size(); ++k) CHECK(ops[k].first > ops[k - 1].first);
    }
}

TEST_CASE("secular generator on degenerate models: detailed balance, positivity, stationarity") {
    std::mt19937_64 rng(109);
    int trial = 0;
    for (const auto& sizes : {std::vector<int>{2, 2}, std::vector<int>{2, 1, 2}}) {
        const auto d = testing::random_degenerate_model(sizes, 1 + trial % 2, rng, trial % 2 == 1);
        const auto ctx = general_context(d);
        const auto gen = block_generator(ctx);
        CHECK(gen.secular);
        CHECK_FALSE(gen.terms.empty());
        CHECK(detailed_balance_residual(gen) < 1e-6);
        CHECK(min_gamma_eigenvalue(secular_gamma_matrices(ctx, gen)) >= -1e-12);
        CHECK(dynamics::stationarity_residual(gen, dynamics::mean_force_gibbs_limit(ctx.model())) < 1e-8);
        const MatrixXcd LS = gen.lamb_shift();
        CHECK((LS - LS.adjoint()).norm() < 1e-14);
        ++trial;
    }
}

TEST_CASE("secularization keeps only equal-frequency terms") {
    std::mt19937_64 rng(113);
    const auto d = testing::random_degenerate_model({2, 2}, 1, rng);
    const auto ctx = general_context(d);
    GeneratorOptions o;
    o.secular = false;
    const auto full = block_generator(ctx, o);
    const auto sec = secularize(full);
    const auto direct = block_generator(ctx);
    CHECK(sec.terms.size() == direct.terms.size());
    CHECK(sec.terms.size() < full.terms.size());
    CHECK((sec.superoperator(0.0) - direct.superoperator(0.0)).norm() < 1e-12 * direct.superoperator(0.0).norm());
    // non-secular parts carry explicit time dependence
    CHECK((full.superoperator(137.0) - full.superoperator(0.0)).norm() > 0.0);
    CHECK((sec.superoperator(137.0) - sec.superoperator(0.0)).norm() == 0.0);
}

TEST_CASE("unsupported and invalid requests") {
    // partition that does not diagonalize the coupling
    const auto spec = testing::spin_boson();
    MatrixXcd P0 = MatrixXcd::Zero(2, 2), P1 = MatrixXcd::Zero(2, 2);
    P0(0, 0) = 1.0;
    P1(1, 1) = 1.0;
    const kernels::KernelContext ctx(model::build_pointer_model_general(spec, model::ExplicitPartition{{P0, P1}}),
                                     bath::lineshape(spec.bath));
    CHECK_THROWS_AS(transition_block(ctx, 0, 1), UnsupportedModeError);
    CHECK_THROWS_AS(forster_rates(ctx), DomainError);
    const auto sb = simple_context(spec);
    CHECK_THROWS_AS(transition_block(sb, 0, 0), DomainError);
    CHECK_THROWS_AS(gamma_raw(sb, 1, 1, 0.0), DomainError);
}

}
