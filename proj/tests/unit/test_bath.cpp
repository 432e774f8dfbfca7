// test_bath.cpp — Spectral densities, correlation and lineshape functions against series and KMS references

#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "strongdecoh/bath.hpp"
#include "strongdecoh/errors.hpp"
#include "strongdecoh/units.hpp"

using namespace strongdecoh;
using namespace strongdecoh::bath;
using strongdecoh::testing::cplx;

namespace {

// Drude-Lorentz correlation as an exponential series: c_0 e^{-Omega t} + sum_k c_k e^{-nu_k t}
struct MatsubaraDL {
    double eta, Omega, beta;
    int terms{20000};

    template <class F>
    cplx sum(F f) const {
        cplx v = f(eta * Omega * cplx(1.0 / std::tan(beta * Omega / 2.0), -1.0), Omega);
        for (int k = 1; k <= terms; ++k) {
            const double nu = 2.0 * M_PI * k / beta;
            v += f(cplx(4.0 * eta * Omega / beta * nu / (nu * nu - Omega * Omega)), nu);
        }
        return v;
    }
    cplx C(double t) const {
        return sum([t](cplx c, double r) { return c * std::exp(-r * t); });
    }
    // truncated terms k > terms: c_k ~ 4 eta Omega / (beta nu_k), contributing c_k (t / nu_k - 1 / nu_k^2)
    cplx g(double t) const {
        const double K = terms, s = beta / (2.0 * M_PI);
        const double inv2 = 1.0 / K - 0.5 / (K * K) + 1.0 / (6.0 * K * K * K);
        const double inv3 = 0.5 / (K * K) - 0.5 / (K * K * K);
        const double tail = 4.0 * eta * Omega / beta * (t * s * s * inv2 - s * s * s * inv3);
        return tail + sum([t](cplx c, double r) { return c / (r * r) * (std::exp(-r * t) + r * t - 1.0); });
    }
};

BathSpec dl_bath(double eta, double Omega, double beta, bool ht) {
    BathSpec b;
    b.beta = beta;
    b.high_temperature = ht;
    b.spectral = SpectralDensityMatrix::diagonal({DrudeLorentz{eta, Omega}});
    return b;
}

} // namespace

TEST_SUITE("bath") {

TEST_CASE("reorganization energy equals eta for every parametric form") {
    const double eta = units::cm_to_rad_fs(100.0);
    for (const SpectralForm& f : {SpectralForm(DrudeLorentz{eta, 0.01}), SpectralForm(OhmicExp{eta, 0.02}),
                                  SpectralForm(SuperOhmic{3.0, eta, 0.02}), SpectralForm(SuperOhmic{1.5, eta, 0.05})}) {
        const auto J = SpectralDensityMatrix::diagonal({f});
        CHECK(std::abs(reorganization_matrix(J)(0, 0).real() / eta - 1.0) < 1e-8);
    }
}

TEST_CASE("tabulated Drude-Lorentz reproduces the parametric reorganization energy") {
    const DrudeLorentz d{0.02, 0.01};
    Tabulated t;
    for (int k = 0; k <= 200000; ++k) {
        const double w = 1e-5 * k;
        t.omega.push_back(w);
        t.values.push_back(evaluate(d, w));
    }
    const auto J = SpectralDensityMatrix::diagonal({t});
    // the table stops at w = 2, missing 2 eta/pi * atan(Omega/2) of the weight
    const double missing = 2.0 * d.eta / M_PI * std::atan(d.cutoff / 2.0);
    CHECK(std::abs(reorganization_matrix(J)(0, 0).real() - (d.eta - missing)) < 1e-6 * d.eta);
}

TEST_CASE("Bose-Einstein factor") {
    CHECK(bose_einstein(0.3, 2.0) == doctest::Approx(1.0 / (std::exp(0.6) - 1.0)).epsilon(1e-14));
    CHECK_THROWS_AS(bose_einstein(0.0, 1.0), DomainError);
}

TEST_CASE("high-temperature lineshape matches its closed form") {
    const double eta = units::cm_to_rad_fs(100.0), Om = 0.01;
    const double beta = units::beta_from_temperature(300.0, units::kBoltzmannPaperCmPerK);
    const auto b = dl_bath(eta, Om, beta, true);
    const auto tab = lineshape(b);
    for (double t : {0.0, 0.5, 7.0, 100.0, 1234.5, 20000.0, 1e5}) {
        const double x = Om * t;
        const cplx ex = eta / Om * cplx(2.0 / (beta * Om), -1.0) * (std::exp(-x) + x - 1.0);
        CHECK(std::abs(tab.g(0, 0, t) - ex) <= 1e-9 * std::max(1e-3, std::abs(ex)));
    }
    CHECK(std::abs(tab.slope()(0, 0) - cplx(2.0 * eta / (beta * Om), -eta)) < 1e-10 * eta);
    CHECK(std::abs(correlation(b, 30.0)(0, 0) - eta * Om * cplx(2.0 / (beta * Om), -1.0) * std::exp(-0.3)) < 1e-14);
}

TEST_CASE("exact Drude-Lorentz correlation and lineshape against the Matsubara series") {
    const double eta = units::cm_to_rad_fs(50.0), Om = 0.02, beta = units::beta_from_temperature(150.0);
    const auto b = dl_bath(eta, Om, beta, false);
    const MatsubaraDL ref{eta, Om, beta};
    const auto tab = lineshape(b);
    for (double t : {0.3, 2.0, 15.0, 120.0, 900.0}) {
        const cplx gref = ref.g(t);
        CHECK(std::abs(tab.g(0, 0, t) - gref) <= 1e-6 * std::max(1e-2, std::abs(gref)));
        CHECK(std::abs(lineshape_direct(b, 0, 0, t) - gref) <= 1e-6 * std::max(1e-2, std::abs(gref)));
        const cplx cref = ref.C(t);
        CHECK(std::abs(correlation(b, t)(0, 0) - cref) <= 1e-6 * std::abs(ref.C(0.3)));
    }
    // negative times by Hermitian conjugation
    CHECK(std::abs(correlation(b, -4.0)(0, 0) - std::conj(ref.C(4.0))) <= 1e-6 * std::abs(ref.C(0.3)));
    // slope from the small-frequency limit: pi J(w)/(beta w) -> 2 eta / (beta Omega)
    CHECK(std::abs(lineshape_asymptotic_slope(b)(0, 0) - cplx(2.0 * eta / (beta * Om), -eta)) < 1e-7 * eta);
}

TEST_CASE("full-line spectrum obeys the KMS condition") {
    BathSpec b;
    b.beta = 30.0;
    b.spectral = SpectralDensityMatrix::diagonal({OhmicExp{0.01, 0.02}, SuperOhmic{3.0, 0.005, 0.04}});
    for (int a = 0; a < 2; ++a)
        for (double w : {1e-3, 0.01, 0.05, 0.2}) {
            const cplx up = full_line_spectrum(b, a, a, w), down = full_line_spectrum(b, a, a, -w);
            CHECK(std::abs(down - std::exp(-b.beta * w) * up) <= 1e-13 * std::abs(up));
        }
}

TEST_CASE("real part of the half-line transform is half the full-line spectrum") {
    const auto b = dl_bath(0.01, 0.015, 40.0, false);
    const auto tab = lineshape(b);
    for (double w : {-0.05, -0.01, 0.0, 0.004, 0.03}) {
        const cplx G = gamma_bath_halfline(tab, 0, 0, w);
        const double S = w == 0.0 ? 2.0 * M_PI * 2.0 * 0.01 / (M_PI * 0.015) / 40.0 : full_line_spectrum(b, 0, 0, w).real();
        CHECK(std::abs(G.real() - 0.5 * S) < 1e-6 * std::abs(S));
    }
}

TEST_CASE("spectral density matrices are Hermitian") {
    SpectralDensityMatrix J(2);
    J.set(0, 0, DrudeLorentz{0.01, 0.01});
    J.set(1, 1, DrudeLorentz{0.02, 0.01});
    Tabulated off;
    off.omega = {0.0, 0.01, 0.1};
    off.values = {0.0, cplx(0.001, 0.0005), 0.0};
    J.set(0, 1, off);
    CHECK(J(1, 0, 0.01) == std::conj(J(0, 1, 0.01)));
    CHECK_FALSE(J.is_diagonal());
    CHECK_FALSE(J.entry_real(0, 1));
}

TEST_CASE("invalid baths are rejected") {
    auto b = dl_bath(0.01, 0.05, 40.0, true); // beta Omega = 2
    CHECK_THROWS_AS(b.validate(), ConfigError);
    BathSpec o;
    o.beta = 10.0;
    o.high_temperature = true;
    o.spectral = SpectralDensityMatrix::diagonal({OhmicExp{0.01, 0.02}});
    CHECK_THROWS_AS(o.validate(), ConfigError);
    BathSpec neg = dl_bath(0.01, 0.01, -1.0, false);
    CHECK_THROWS_AS(neg.validate(), ConfigError);
}

}
