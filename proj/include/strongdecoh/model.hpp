// model.hpp — System specification, pointer-basis decomposition and validity diagnostics

#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "strongdecoh/bath.hpp"

namespace strongdecoh::model {

using cplx = std::complex<double>;

// Everything in rad/fs after boundary conversion.
struct SystemSpec {
    Eigen::MatrixXcd hamiltonian;           // H_S in the system basis
    std::vector<Eigen::MatrixXcd> couplings; // A_alpha, dimensionless
    bath::BathSpec bath;
    bool counter_term{false}; // add sum_n delta_eps_n Pi_n to H_S

    int dimension() const { return static_cast<int>(hamiltonian.rows()); }
    int channels() const { return static_cast<int>(couplings.size()); }
    void validate() const;
};

// Pointer basis: columns of `basis` grouped into contiguous blocks; every operator below is expressed in it.
struct PointerModel {
    Eigen::MatrixXcd basis;        // unitary, column k = k-th pointer vector in the system basis
    std::vector<int> block_offset; // first pointer index of block n
    std::vector<int> block_size;
    Eigen::MatrixXd theta;         // M x N
    Eigen::MatrixXcd hamiltonian;  // H_S (pointer basis, counter-term included when requested)
    std::vector<Eigen::MatrixXcd> couplings; // A_alpha (pointer basis)
    std::vector<Eigen::MatrixXcd> delta_a;   // A_alpha - sum_n theta_an Pi_n
    Eigen::MatrixXcd V;                      // off-diagonal blocks of H_S
    Eigen::MatrixXcd reorganization;         // delta_eps_ab (M x M)
    Eigen::VectorXd delta_eps;               // per block
    std::vector<Eigen::MatrixXcd> block_hamiltonians; // bar H_S^(n), d_n x d_n
    Eigen::VectorXd eps;     // <n|H_S|n> for 1-dim blocks, block trace mean otherwise
    Eigen::VectorXd eps_bar; // eps - delta_eps; for multi-dim blocks the mean eigenvalue of bar H_S^(n)
    double beta{0.0};
    double bath_relaxation_rate{0.0}; // slowest spectral scale (Omega for Drude-Lorentz), rad/fs
    double offblock_coupling_norm{0.0}; // max ||Pi_n A_alpha Pi_m||, n != m
    std::vector<double> residual_norm;  // max_alpha ||Pi_n delta A_alpha Pi_n|| per block
    bool simple{false};

    int size() const { return static_cast<int>(basis.rows()); }
    int blocks() const { return static_cast<int>(block_size.size()); }
    int channels() const { return static_cast<int>(theta.rows()); }
    // J_nm = <n|H_S|m> between 1-dim blocks
    cplx J(int n, int m) const;
    // projector Pi_n as an N x N matrix (pointer basis)
    Eigen::MatrixXcd projector(int n) const;
    // bar H_S^(d) = sum_n bar H_S^(n) (pointer basis)
    Eigen::MatrixXcd block_diagonal_hamiltonian() const;
    // sum_ab u_a v_b X_ab
    static cplx contract(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const Eigen::MatrixXcd& X);
    Eigen::VectorXd theta_diff(int n, int m) const { return theta.col(n) - theta.col(m); }
    // operator given in the system basis -> pointer basis
    Eigen::MatrixXcd to_pointer(const Eigen::MatrixXcd& X) const { return basis.adjoint() * X * basis; }
    Eigen::MatrixXcd to_system(const Eigen::MatrixXcd& X) const { return basis * X * basis.adjoint(); }
};

PointerModel build_pointer_model_simple(const SystemSpec& spec, const numerics::QuadratureSpec& quad = {});

struct ExplicitPartition {
    std::vector<Eigen::MatrixXcd> projectors; // system basis
};
struct AutoPartition {
    double threshold{0.05}; // max-norm distance between theta columns merged into one block
};
using Partition = std::variant<ExplicitPartition, AutoPartition>;

PointerModel build_pointer_model_general(const SystemSpec& spec, const Partition& partition,
                                         const numerics::QuadratureSpec& quad = {});

// H_0 + H' system parts reassembled (pointer basis): sum_n [bar H^(n) + delta_eps_n Pi_n + reorg. terms] + V
Eigen::MatrixXcd reassemble_hamiltonian(const PointerModel& model);
// sum_n theta_an Pi_n + delta A_alpha (pointer basis)
Eigen::MatrixXcd reassemble_coupling(const PointerModel& model, int alpha);

enum class Verdict { pass, warn, hard_warn };
std::string to_string(Verdict v);

struct PairDiagnostic {
    int n{0}, m{0};
    double transition_rate{0.0};  // gamma_nm, 1/fs
    double decoherence_rate{0.0}; // r_nm, 1/fs
    double ratio_decoherence{0.0}; // gamma / r
    double ratio_bath{0.0};        // gamma / Omega
    Verdict verdict{Verdict::pass};
};

struct ValidityReport {
    double bath_relaxation_rate{0.0}; // slowest spectral scale, rad/fs
    std::vector<PairDiagnostic> pairs;
    Verdict overall{Verdict::pass};
};

// gamma: transition rates (gamma(n,m) = rate m -> n); decoherence: r_nm from the asymptotic lineshape slope
ValidityReport validity_report(const PointerModel& model, const Eigen::MatrixXd& gamma,
                               const Eigen::MatrixXd& decoherence);

} // namespace strongdecoh::model
