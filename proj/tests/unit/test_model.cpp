// test_model.cpp — Pointer-basis decomposition, partitions and structural checks

#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "strongdecoh/errors.hpp"
#include "strongdecoh/model.hpp"

using namespace strongdecoh;
using namespace strongdecoh::model;
using strongdecoh::testing::cplx;
using Eigen::MatrixXcd;

namespace {

bool unitary(const MatrixXcd& U) { return (U.adjoint() * U - MatrixXcd::Identity(U.cols(), U.cols())).norm() < 1e-10; }

} // namespace

TEST_SUITE("model") {

TEST_CASE("spin-boson pointer basis, theta and energies") {
    const auto pm = build_pointer_model_simple(testing::spin_boson());
    const double e = units::cm_to_rad_fs(10.0), eta = units::cm_to_rad_fs(100.0);
    REQUIRE(pm.size() == 2);
    CHECK(pm.simple);
    CHECK(unitary(pm.basis));
    // |+> first
    CHECK(pm.theta(0, 0) == doctest::Approx(1.0));
    CHECK(pm.theta(0, 1) == doctest::Approx(-1.0));
    CHECK(std::abs(std::abs(pm.basis(0, 0)) - M_SQRT1_2) < 1e-12);
    CHECK(std::abs(pm.basis(0, 0) - pm.basis(1, 0)) < 1e-12);
    CHECK(std::abs(pm.J(0, 1) - cplx(e)) < 1e-12);
    CHECK(std::abs(pm.J(1, 0) - cplx(e)) < 1e-12);
    for (int n = 0; n < 2; ++n) {
        CHECK(std::abs(pm.eps(n)) < 1e-14);
        CHECK(std::abs(pm.delta_eps(n) - eta) < 1e-8 * eta);
        CHECK(std::abs(pm.eps_bar(n) + eta) < 1e-8 * eta);
    }
    CHECK(pm.bath_relaxation_rate == doctest::Approx(0.01));
    CHECK(pm.offblock_coupling_norm < 1e-12);
}

TEST_CASE("reassembled Hamiltonian and couplings reproduce the input") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 3; ++trial) {
        const auto spec = testing::random_simple_model(3 + trial, 1 + trial % 2, rng);
        const auto pm = build_pointer_model_simple(spec);
        CHECK(unitary(pm.basis));
        CHECK((reassemble_hamiltonian(pm) - pm.to_pointer(spec.hamiltonian)).norm() < 1e-10 * spec.hamiltonian.norm());
        for (int a = 0; a < pm.channels(); ++a) {
            CHECK((reassemble_coupling(pm, a) - pm.to_pointer(spec.couplings[static_cast<std::size_t>(a)])).norm() < 1e-10);
            CHECK(pm.delta_a[static_cast<std::size_t>(a)].norm() < 1e-10);
        }
        // pointer states sorted by theta of the first channel, descending
        for (int n = 0; n + 1 < pm.size(); ++n) CHECK(pm.theta(0, n) >= pm.theta(0, n + 1));
    }
}

TEST_CASE("counter-term shifts the pointer energies by the reorganization energy") {
    auto spec = testing::spin_boson();
    spec.counter_term = true;
    const auto pm = build_pointer_model_simple(spec);
    for (int n = 0; n < 2; ++n) {
        CHECK(std::abs(pm.eps(n) - pm.delta_eps(n)) < 1e-12);
        CHECK(std::abs(pm.eps_bar(n)) < 1e-12);
    }
}

TEST_CASE("structural conditions are enforced") {
    auto spec = testing::spin_boson();
    MatrixXcd Z = MatrixXcd::Zero(2, 2);
    Z(0, 0) = 1.0;
    Z(1, 1) = -1.0;
    spec.couplings.push_back(Z);
    spec.bath.spectral = bath::SpectralDensityMatrix::diagonal(
        {bath::DrudeLorentz{0.01, 0.01}, bath::DrudeLorentz{0.01, 0.01}});
    CHECK_THROWS_AS(build_pointer_model_simple(spec), ModelError);

    // degenerate nonzero eigenvalue
    auto deg = testing::spin_boson();
    deg.hamiltonian = MatrixXcd::Identity(3, 3);
    deg.couplings = {MatrixXcd::Identity(3, 3)};
    deg.couplings[0](2, 2) = -1.0;
    CHECK_THROWS_AS(build_pointer_model_simple(deg), ModelError);

    // a state that does not see the bath
    auto dark = deg;
    dark.couplings[0](0, 0) = 0.0;
    dark.couplings[0](1, 1) = 0.5;
    CHECK_THROWS_AS(build_pointer_model_simple(dark), ModelError);

    // malformed input
    auto bad = testing::spin_boson();
    bad.hamiltonian(0, 1) = cplx(0.0, 1.0);
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    auto wrong = testing::spin_boson();
    wrong.couplings[0] = MatrixXcd::Identity(3, 3);
    CHECK_THROWS_AS(wrong.validate(), ConfigError);
}

TEST_CASE("explicit and automatic partitions of a degenerate model") {
    std::mt19937_64 rng(23);
    const auto d = testing::random_degenerate_model({2, 1, 2}, 2, rng);
    const auto pm = build_pointer_model_general(d.spec, ExplicitPartition{d.projectors});
    REQUIRE(pm.blocks() == 3);
    CHECK_FALSE(pm.simple);
    CHECK_THROWS_AS(pm.J(0, 2), DomainError);
    CHECK(unitary(pm.basis));
    int total = 0;
    for (int n = 0; n < 3; ++n) total += pm.block_size[static_cast<std::size_t>(n)];
    CHECK(total == 5);
    CHECK(pm.offblock_coupling_norm < 1e-10);
    for (double r : pm.residual_norm) CHECK(r < 1e-10);
    CHECK((reassemble_hamiltonian(pm) - pm.to_pointer(d.spec.hamiltonian)).norm() < 1e-10 * d.spec.hamiltonian.norm());
    for (int a = 0; a < 2; ++a)
        CHECK((reassemble_coupling(pm, a) - pm.to_pointer(d.spec.couplings[static_cast<std::size_t>(a)])).norm() < 1e-10);
    // each projector is diagonal in the pointer basis
    for (int n = 0; n < 3; ++n) {
        const MatrixXcd Pn = pm.projector(n);
        CHECK((Pn * Pn - Pn).norm() < 1e-12);
    }
    double matched = 0.0;
    for (const auto& P : d.projectors) {
        const MatrixXcd Pp = pm.to_pointer(P);
        double best = 1e9;
        for (int n = 0; n < 3; ++n) best = std::min(best, (Pp - pm.projector(n)).norm());
        matched = std::max(matched, best);
    }
    CHECK(matched < 1e-10);

    const auto pa = build_pointer_model_general(d.spec, AutoPartition{0.05});
    CHECK(pa.blocks() == 3);
    CHECK((pa.theta - pm.theta).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("invalid explicit partitions are rejected") {
    std::mt19937_64 rng(29);
    const auto d = testing::random_degenerate_model({2, 2}, 1, rng);
    CHECK_THROWS_AS(build_pointer_model_general(d.spec, ExplicitPartition{{d.projectors[0]}}), ModelError);
    CHECK_THROWS_AS(build_pointer_model_general(d.spec, ExplicitPartition{{d.projectors[0], d.projectors[0]}}),
                    ModelError);
    CHECK_THROWS_AS(build_pointer_model_general(d.spec, ExplicitPartition{}), ModelError);
    CHECK_THROWS_AS(build_pointer_model_general(d.spec, AutoPartition{-1.0}), ConfigError);
}

TEST_CASE("validity verdicts follow the rate ratios") {
    const auto pm = build_pointer_model_simple(testing::spin_boson());
    Eigen::MatrixXd r(2, 2), g(2, 2);
    r << 0.0, 0.6, 0.6, 0.0;
    g << 0.0, 1e-4, 1e-4, 0.0;
    CHECK(validity_report(pm, g, r).overall == Verdict::pass);
    g(0, 1) = 0.2 * 0.01;
    CHECK(validity_report(pm, g, r).overall == Verdict::warn);
    g(0, 1) = 0.6;
    const auto rep = validity_report(pm, g, r);
    CHECK(rep.overall == Verdict::hard_warn);
    CHECK(rep.pairs.size() == 2);
    CHECK(to_string(Verdict::hard_warn) == "hard_warn");
    CHECK_THROWS_AS(validity_report(pm, Eigen::MatrixXd::Zero(3, 3), r), DomainError);
}

}
