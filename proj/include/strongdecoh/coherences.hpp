// coherences.hpp — Off-diagonal density-matrix elements reconstructed from populations and kernels

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "strongdecoh/dynamics.hpp"
#include "strongdecoh/generators.hpp"
#include "strongdecoh/kernels.hpp"

namespace strongdecoh::coherences {

using cplx = std::complex<double>;

// Schroedinger picture, pointer basis; diagonals are zero
struct CoherenceTerms {
    Eigen::MatrixXcd eq, noneq, decoh, cohcoh;
    Eigen::MatrixXcd total() const { return eq + noneq + decoh + cohcoh; }
};

struct CoherenceTrajectory {
    numerics::TimeGrid grid;
    std::vector<Eigen::VectorXd> populations;
    std::vector<CoherenceTerms> terms;
    // diag(p) + total coherences
    Eigen::MatrixXcd density(std::size_t k) const;
};

// populations p_t taken at the same time t (Markovian replacement)
Eigen::MatrixXcd coherence_equilibrium(const kernels::KernelContext& ctx, const Eigen::VectorXd& p_t, double t,
                                       const numerics::QuadratureSpec& quad = {});
Eigen::MatrixXcd coherence_steady(const kernels::KernelContext& ctx, const numerics::QuadratureSpec& quad = {});
// initial state sum_n p0_n |n><n| x rho_B
Eigen::MatrixXcd coherence_noneq(const kernels::KernelContext& ctx, const Eigen::VectorXd& p0, double t,
                                 const numerics::QuadratureSpec& quad = {});
// rho0: initial system state in the pointer basis; p_t populations at t
CoherenceTerms coherence_full(const kernels::KernelContext& ctx, const Eigen::MatrixXcd& rho0,
                              const Eigen::VectorXd& p_t, double t, const numerics::QuadratureSpec& quad = {});

struct TrajectoryOptions {
    bool noneq{true};
    bool decoh{true};
    bool cohcoh{true};
    numerics::QuadratureSpec quad{};
};
// all terms along a population trajectory that started from diag(rho0)
CoherenceTrajectory coherence_trajectory(const kernels::KernelContext& ctx, const Eigen::MatrixXcd& rho0,
                                         const dynamics::PopulationTrajectory& pops,
                                         const TrajectoryOptions& opts = {});

// off-diagonal blocks from the block-diagonal state rho_d (Schroedinger picture, pointer basis)
Eigen::MatrixXcd coherence_blocks_general(const kernels::KernelContext& ctx, const Eigen::MatrixXcd& rho_d,
                                          double t, const numerics::QuadratureSpec& quad = {});

// r_nm (1/fs)
Eigen::MatrixXd decoherence_rates(const kernels::KernelContext& ctx);

// 1/2 ||a - b||_1
double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

} // namespace strongdecoh::coherences
