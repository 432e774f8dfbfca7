// test_kernels.cpp — Bath overlap kernels against brute force, double integrals and their structural identities

#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "strongdecoh/errors.hpp"
#include "strongdecoh/kernels.hpp"

using namespace strongdecoh;
using namespace strongdecoh::kernels;
using strongdecoh::testing::cplx;
using Eigen::MatrixXcd;

namespace {

KernelContext spin_boson_context(bool ht = true) {
    const auto spec = testing::spin_boson(ht);
    return KernelContext(model::build_pointer_model_simple(spec), bath::lineshape(spec.bath));
}

// three pointer states coupled to one narrow bath line
KernelContext fock_context(const testing::FockOracle& fo) {
    model::SystemSpec s;
    s.hamiltonian = MatrixXcd::Zero(3, 3);
    s.hamiltonian(0, 1) = s.hamiltonian(1, 0) = 0.01;
    MatrixXcd A = MatrixXcd::Zero(3, 3);
    A(0, 0) = 1.0;
    A(1, 1) = -0.5;
    A(2, 2) = 0.3;
    s.couplings = {A};
    s.bath.beta = fo.beta;
    s.bath.spectral = bath::SpectralDensityMatrix::diagonal({fo.spectral()});
    return KernelContext(model::build_pointer_model_simple(s),
                         bath::lineshape(s.bath, numerics::TimeGrid::uniform(0.0, 200.0, 0.05)));
}

} // namespace

TEST_SUITE("kernels") {

TEST_CASE("cumulant kernels are exact for a single bosonic mode") {
    const testing::FockOracle fo;
    const auto ctx = fock_context(fo);
    const auto& th = ctx.model().theta;
    double e2 = 0.0, e3 = 0.0;
    for (double t : {0.5, 3.0, 17.0, 60.0, 150.0}) {
        for (int n = 0; n < 3; ++n)
            for (int m = 0; m < 3; ++m)
                if (n != m) e2 = std::max(e2, std::abs(zeta(ctx, n, m, t) - fo.zeta(th(0, n), th(0, m), t)));
        for (double f : {0.0, 0.3, 1.0})
            for (int m = 0; m < 3; ++m)
                for (int n = 0; n < 3; ++n)
                    for (int l = 0; l < 3; ++l)
                        e3 = std::max(e3, std::abs(zeta3(ctx, m, n, l, t, f * t) -
                                                   fo.zeta3(th(0, m), th(0, n), th(0, l), t, f * t)));
    }
    CHECK(e2 < 1e-6);
    CHECK(e3 < 1e-6);
}

TEST_CASE("overlap function equals the double integral of the correlation function") {
    bath::BathSpec b;
    b.beta = 24.1;
    b.high_temperature = true;
    const double Om = 0.02, eta = 0.02;
    b.spectral = bath::SpectralDensityMatrix::diagonal({bath::DrudeLorentz{eta, Om}});
    const auto tab = bath::lineshape(b);
    const cplx c = eta * Om * cplx(2.0 / (b.beta * Om), -1.0);
    auto C = [&](double t) { return t >= 0.0 ? c * std::exp(-Om * t) : std::conj(c) * std::exp(Om * t); };
    // distinct cell widths keep the midpoint rule away from the kink of Im C at zero
    for (auto [t1, t2] : {std::pair{10.0, 4.0}, std::pair{4.0, 10.0}, std::pair{7.0, 0.5}}) {
        const int n = 4000;
        const double h1 = t1 / n, h2 = t2 / n;
        cplx D = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) D += C((i + 0.5) * h1 - (j + 0.5) * h2);
        D *= h1 * h2;
        CHECK(std::abs(h_overlap(tab, 0, 0, t1, t2) - D) < 1e-6 * std::abs(D));
    }
    CHECK_THROWS_AS(h_overlap(tab, 0, 0, -1.0, 1.0), DomainError);
}

TEST_CASE("closed-form three-point kernel equals the factor-by-factor cumulant") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 2; ++trial) {
        const auto spec = testing::random_simple_model(3, 1 + trial, rng, trial == 1);
        const KernelContext ctx(model::build_pointer_model_simple(spec), bath::lineshape(spec.bath));
        double err = 0.0;
        for (double t : {0.0, 3.0, 40.0, 400.0})
            for (double f : {0.0, 0.25, 0.8, 1.0})
                for (int m = 0; m < 3; ++m)
                    for (int n = 0; n < 3; ++n)
                        for (int l = 0; l < 3; ++l)
                            err = std::max(err, std::abs(zeta3(ctx, m, n, l, t, f * t) -
                                                         zeta3_cumulant(ctx, m, n, l, t, f * t)));
        CHECK(err < 1e-10);
    }
}

TEST_CASE("kernel identities") {
    const auto ctx = spin_boson_context();
    for (double t : {0.0, 1.0, 30.0, 500.0}) {
        CHECK(zeta(ctx, 0, 0, t) == cplx(1.0));
        CHECK(std::abs(zeta(ctx, 0, 1, -t) - std::conj(zeta(ctx, 0, 1, t))) < 1e-15);
        CHECK(std::abs(zeta(ctx, 0, 1, t)) <= 1.0 + 1e-14);
        CHECK(std::abs(zeta3(ctx, 0, 1, 0, t, 0.0) - 1.0) < 1e-12);
        CHECK(std::abs(zeta3(ctx, 1, 1, 1, t, 0.5 * t) - 1.0) < 1e-12);
        // zeta_mnn does not depend on tau
        for (double f : {0.2, 0.7, 1.0})
            CHECK(std::abs(zeta3(ctx, 0, 1, 1, t, f * t) - zeta3(ctx, 0, 1, 1, t, 0.0)) < 1e-12);
    }
    CHECK(std::abs(zeta(ctx, 0, 1, 0.0) - 1.0) < 1e-15);
    CHECK_THROWS_AS(zeta3(ctx, 0, 1, 0, 1.0, 2.0), DomainError);
    CHECK_THROWS_AS(zeta(ctx, 0, 2, 1.0), DomainError);
}

TEST_CASE("Lambda and the decoherence rate of the spin-boson model") {
    const auto ctx = spin_boson_context();
    const double eta = units::cm_to_rad_fs(100.0), beta = ctx.model().beta;
    // d = theta_+ - theta_- = 2
    CHECK(ctx.Lambda(0, 1) == doctest::Approx(4.0 * eta).epsilon(1e-8));
    CHECK(ctx.decoherence_rate(0, 1) == doctest::Approx(8.0 * eta / (beta * 0.01)).epsilon(1e-8));
    CHECK(ctx.decoherence_rate(0, 0) == 0.0);
    const double x = 0.01 * 250.0;
    const cplx G = 4.0 * eta / 0.01 * cplx(2.0 / (beta * 0.01), -1.0) * (std::exp(-x) + x - 1.0);
    CHECK(std::abs(ctx.G(0, 1, 250.0) - G) < 1e-9 * std::abs(G));
}

TEST_CASE("three-point kernel approaches the two-point kernel at the bath rate") {
    const auto ctx = spin_boson_context();
    const auto& pm = ctx.model();
    const double tau = 20.0;
    const cplx lim = std::exp(cplx(0.0, -(pm.delta_eps(0) - pm.delta_eps(1)) * tau)) * zeta(ctx, 1, 0, tau);
    auto dev = [&](double t) { return std::abs(zeta3(ctx, 0, 1, 0, t, tau) - lim); };
    const double t1 = 300.0, t2 = 900.0;
    const double rate = std::log(dev(t1) / dev(t2)) / (t2 - t1);
    CHECK(std::abs(rate / 0.01 - 1.0) < 0.1);
    CHECK(dev(3000.0) < 1e-8);
}

}
