// fixtures.hpp — Model builders and brute-force references shared by unit and acceptance tests

#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <random>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

#include "strongdecoh/dynamics.hpp"
#include "strongdecoh/units.hpp"

namespace strongdecoh::testing {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// scratch directory removed on destruction
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("strongdecoh_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string write(const std::string& name, const std::string& text) const {
        const auto p = path / name;
        std::ofstream(p, std::ios::binary) << text;
        return p.string();
    }
    std::string read(const std::string& name) const {
        std::ifstream in(path / name, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }
};

inline MatrixXcd sigma_x() {
    MatrixXcd X = MatrixXcd::Zero(2, 2);
    X(0, 1) = X(1, 0) = 1.0;
    return X;
}

// H = diag(eps, -eps), A = sigma_x, Drude-Lorentz eta = 100 cm^-1, Omega = 0.01 rad/fs, T = 300 K, kB = 0.734
inline model::SystemSpec spin_boson(bool high_temperature = true, double eps_cm = 10.0) {
    model::SystemSpec s;
    const double e = units::cm_to_rad_fs(eps_cm);
    s.hamiltonian = MatrixXcd::Zero(2, 2);
    s.hamiltonian(0, 0) = e;
    s.hamiltonian(1, 1) = -e;
    s.couplings = {sigma_x()};
    s.bath.beta = units::beta_from_temperature(300.0, units::kBoltzmannPaperCmPerK);
    s.bath.high_temperature = high_temperature;
    s.bath.spectral = bath::SpectralDensityMatrix::diagonal({bath::DrudeLorentz{units::cm_to_rad_fs(100.0), 0.01}});
    return s;
}

inline MatrixXcd random_unitary(int N, std::mt19937_64& rng) {
    std::normal_distribution<double> d;
    MatrixXcd Z(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) Z(i, j) = cplx(d(rng), d(rng));
    Eigen::HouseholderQR<MatrixXcd> qr(Z);
    return qr.householderQ();
}

inline MatrixXcd random_hermitian(int N, double scale, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    MatrixXcd H(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) H(i, j) = cplx(u(rng), u(rng));
    return scale * 0.5 * (H + H.adjoint().eval());
}

// N levels, diagonal couplings with distinct theta (one-dimensional pointer blocks), exact bath
inline model::SystemSpec random_simple_model(int N, int channels, std::mt19937_64& rng, bool ohmic = false) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    model::SystemSpec s;
    s.hamiltonian = random_hermitian(N, units::cm_to_rad_fs(40.0), rng);
    std::vector<bath::SpectralForm> forms;
    for (int a = 0; a < channels; ++a) {
        MatrixXcd A = MatrixXcd::Zero(N, N);
        for (int n = 0; n < N; ++n) A(n, n) = 2.0 * u(rng) + 0.1 * n;
        s.couplings.push_back(A);
        const double eta = units::cm_to_rad_fs(40.0 + 30.0 * (u(rng) + 1.0));
        if (ohmic) forms.emplace_back(bath::OhmicExp{eta, 0.02});
        else forms.emplace_back(bath::DrudeLorentz{eta, 0.01 + 0.005 * (u(rng) + 1.0)});
    }
    s.bath.beta = units::beta_from_temperature(300.0);
    s.bath.spectral = bath::SpectralDensityMatrix::diagonal(forms);
    return s;
}

// degenerate ultrastrong coupling: A_alpha = sum_n theta_an Pi_n with multidimensional Pi_n in a random basis
struct DegenerateModel {
    model::SystemSpec spec;
    std::vector<MatrixXcd> projectors;
};

inline DegenerateModel random_degenerate_model(const std::vector<int>& sizes, int channels, std::mt19937_64& rng,
                                               bool ohmic = false) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int N = 0;
    for (int s : sizes) N += s;
    const MatrixXcd U = random_unitary(N, rng);
    DegenerateModel d;
    d.spec.hamiltonian = random_hermitian(N, units::cm_to_rad_fs(30.0), rng);
    std::vector<bath::SpectralForm> forms;
    for (int a = 0; a < channels; ++a) {
        MatrixXcd A = MatrixXcd::Zero(N, N);
        int o = 0;
        for (std::size_t b = 0; b < sizes.size(); ++b) {
            const double th = 2.0 * u(rng) + 0.2 * static_cast<double>(b);
            for (int k = 0; k < sizes[b]; ++k) A(o + k, o + k) = th;
            o += sizes[b];
        }
        d.spec.couplings.push_back(U * A * U.adjoint());
        const double eta = units::cm_to_rad_fs(60.0);
        if (ohmic) forms.emplace_back(bath::OhmicExp{eta, 0.02});
        else forms.emplace_back(bath::DrudeLorentz{eta, 0.01});
    }
    d.spec.bath.beta = units::beta_from_temperature(300.0);
    d.spec.bath.spectral = bath::SpectralDensityMatrix::diagonal(forms);
    int o = 0;
    for (int sz : sizes) {
        MatrixXcd p = MatrixXcd::Zero(N, N);
        for (int k = 0; k < sz; ++k) p(o + k, o + k) = 1.0;
        o += sz;
        d.projectors.push_back(U * p * U.adjoint());
    }
    return d;
}

// Single bosonic mode w0 coupled through lambda (a + a^dag), truncated at D Fock states.
// The bath is represented by a narrow triangular spectral density of weight lambda^2 at w0.
struct FockOracle {
    double w0{0.05}, beta{20.0}, lambda{0.02}, half_width{1e-5};
    int D{60};
    MatrixXcd HB, B;

    FockOracle() {
        MatrixXcd a = MatrixXcd::Zero(D, D);
        for (int k = 1; k < D; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
        HB = w0 * a.adjoint() * a;
        B = lambda * (a + a.adjoint());
    }

    bath::Tabulated spectral() const {
        bath::Tabulated t;
        t.omega = {w0 - half_width, w0, w0 + half_width};
        t.values = {0.0, lambda * lambda / half_width, 0.0};
        return t;
    }

    MatrixXcd expi(const MatrixXcd& H, double t) const { return numerics::expm_hermitian(H, cplx(0.0, t)); }

    MatrixXcd gibbs(const MatrixXcd& H) const {
        MatrixXcd r = numerics::expm_hermitian(H, cplx(-beta, 0.0));
        return r / r.trace();
    }

    // <e^{i H_m t} e^{-i H_n t}>_{displaced m}, H_k = H_B + theta_k B + theta_k^2 lambda^2 / w0
    cplx zeta(double th_n, double th_m, double t) const {
        const double shift = lambda * lambda / w0;
        const MatrixXcd Hn = HB + th_n * B + th_n * th_n * shift * MatrixXcd::Identity(D, D);
        const MatrixXcd Hm = HB + th_m * B + th_m * th_m * shift * MatrixXcd::Identity(D, D);
        return (expi(Hm, t) * expi(Hn, -t) * gibbs(Hm)).trace();
    }

    // <e^{i(H_B+th_m B)t} e^{-i(H_B+th_n B)tau} e^{-i(H_B+th_l B)(t-tau)}>_{H_B}
    cplx zeta3(double th_m, double th_n, double th_l, double t, double tau) const {
        return (expi(HB + th_m * B, t) * expi(HB + th_n * B, -tau) * expi(HB + th_l * B, -(t - tau)) * gibbs(HB)).trace();
    }
};

} // namespace strongdecoh::testing
