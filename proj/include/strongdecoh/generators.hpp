// generators.hpp — Förster rate matrices, intra-block Redfield and inter-block transition generators

#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "strongdecoh/kernels.hpp"

namespace strongdecoh::generators {

using cplx = std::complex<double>;

// gamma(n,m) = rate m -> n for n != m, gamma(n,n) = -sum_k gamma(k,n)
struct RateMatrix {
    Eigen::MatrixXd gamma;

    int size() const { return static_cast<int>(gamma.rows()); }
    double rate(int n, int m) const { return gamma(n, m); }
    // off-diagonal part only
    Eigen::MatrixXd rates() const;
    void validate() const;
};

RateMatrix forster_rates(const kernels::KernelContext& ctx, const numerics::QuadratureSpec& quad = {});
RateMatrix rate_matrix_from_rates(const Eigen::MatrixXd& offdiagonal);

// int_0^inf zeta_nm(tau) e^{i nu tau} dtau
cplx gamma_raw(const kernels::KernelContext& ctx, int n, int m, double nu, const numerics::QuadratureSpec& quad = {});
// Gamma_nm(w) = int_0^inf zeta_nm(tau) e^{i(eps_bar_m - eps_bar_n - w) tau} dtau
cplx gamma_halfline(const kernels::KernelContext& ctx, int n, int m, double w,
                    const numerics::QuadratureSpec& quad = {});

enum class TermKind { redfield, transition };

// gamma (L rho R^+ - 1/2 {R^+ L, rho}) - i S [R^+ L, rho], multiplied by e^{i (wp - w) t}
struct DissipatorTerm {
    TermKind kind{TermKind::redfield};
    int n{0}, m{0};   // target and source block (n == m for redfield)
    int a{0}, b{0};   // channels (redfield); 0 for transitions
    double w{0.0}, wp{0.0};
    cplx gamma{0.0, 0.0};
    cplx shift{0.0, 0.0};
    Eigen::MatrixXcd L, R; // pointer basis, N x N
};

struct BlockGenerator {
    int dim{0};
    std::vector<int> block_offset, block_size;
    Eigen::MatrixXcd hbar;   // bar H_S^(d), pointer basis
    double beta{0.0};
    bool secular{false};
    std::vector<DissipatorTerm> terms;
    std::vector<std::string> notes;

    // interaction-picture generator on vec(rho) at time t
    Eigen::MatrixXcd superoperator(double t) const;
    // phase frequencies and the superoperators they multiply, terms with equal phase merged
    std::vector<std::pair<double, Eigen::MatrixXcd>> phase_groups() const;
    // Lamb shift Hamiltonian of the secular terms
    Eigen::MatrixXcd lamb_shift() const;
    // Bohr frequencies present for a (n, m) pair
    std::vector<double> frequencies(int n, int m) const;
    void append(const BlockGenerator& other);
};

struct GeneratorOptions {
    bool secular{true};
    bool redfield{true};
    bool transitions{true};
    double bohr_tolerance{1e-9};  // rad/fs
    double secular_gap{1e-9};     // |w - w'| below this counts as secular
    numerics::QuadratureSpec quad{};
};

// empty generator carrying the model layout
BlockGenerator empty_generator(const kernels::KernelContext& ctx);

BlockGenerator redfield_block(const kernels::KernelContext& ctx, int n, const GeneratorOptions& opts = {});
BlockGenerator transition_block(const kernels::KernelContext& ctx, int n, int m, const GeneratorOptions& opts = {});
// all redfield and transition parts requested in opts
BlockGenerator block_generator(const kernels::KernelContext& ctx, const GeneratorOptions& opts = {});

BlockGenerator secularize(const BlockGenerator& gen, double gap_threshold = 1e-9);

// eigenoperator decomposition X = sum_w X_w between block n (bra side) and block m (ket side) of hbar,
// [hbar, X_w] = -w X_w
std::vector<std::pair<double, Eigen::MatrixXcd>> eigenoperators(const BlockGenerator& layout, const Eigen::MatrixXcd& X,
                                                                int n, int m, double tol = 1e-9);

struct GammaMatrix {
    TermKind kind{TermKind::redfield};
    int n{0}, m{0};
    double w{0.0};
    Eigen::MatrixXcd gamma; // channel x channel (1 x 1 for transitions)
};
// per-w rate matrices of the secular terms (redfield: gamma_ab(w, w) over all channels)
std::vector<GammaMatrix> secular_gamma_matrices(const kernels::KernelContext& ctx, const BlockGenerator& gen,
                                                const numerics::QuadratureSpec& quad = {});
double min_gamma_eigenvalue(const std::vector<GammaMatrix>& mats);

// max |gamma_nm(w) - e^{beta w} gamma_mn(-w)| / max gamma over stored secular entries
double detailed_balance_residual(const BlockGenerator& gen);
// max |gamma_nm - e^{beta(eps_bar_m - eps_bar_n)} gamma_mn| / max gamma
double detailed_balance_residual(const RateMatrix& rates, const Eigen::VectorXd& eps_bar, double beta);

} // namespace strongdecoh::generators
