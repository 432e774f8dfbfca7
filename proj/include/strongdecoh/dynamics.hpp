// dynamics.hpp — Pauli and block master-equation evolution, steady states, stationarity checks

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "strongdecoh/generators.hpp"
#include "strongdecoh/numerics.hpp"

namespace strongdecoh::dynamics {

using cplx = std::complex<double>;

struct PopulationTrajectory {
    numerics::TimeGrid grid;
    std::vector<Eigen::VectorXd> p;
};

// rho(t) for every grid node: Schroedinger picture, pointer basis, block-diagonal
struct BlockTrajectory {
    numerics::TimeGrid grid;
    std::vector<Eigen::MatrixXcd> rho;
};

PopulationTrajectory evolve_pauli(const generators::RateMatrix& rates, const Eigen::VectorXd& p0,
                                  const numerics::TimeGrid& grid, const numerics::PropagateOptions& opts = {});

struct Ergodicity {
    bool ergodic{true};
    int components{1};     // strongly connected components of the gamma > 0 graph
    int closed_classes{1}; // components without outgoing edges
    std::vector<int> component; // component label per level
};
Ergodicity ergodicity(const generators::RateMatrix& rates);

// e^{-beta e_n} / Z
Eigen::VectorXd gibbs_populations(const Eigen::VectorXd& energies, double beta);

struct SteadyState {
    Eigen::VectorXd closed_form; // Gibbs over eps_bar
    Eigen::VectorXd null_space;  // kernel of the rate matrix
    double discrepancy{0.0};     // max abs difference
};
// throws NonErgodicError when the rate graph is not strongly connected
SteadyState steady_populations(const model::PointerModel& model, const generators::RateMatrix& rates);

// e^{-beta bar H^(d)} / Z in the pointer basis
Eigen::MatrixXcd mean_force_gibbs_limit(const model::PointerModel& model);

BlockTrajectory evolve_blocks(const generators::BlockGenerator& gen, const Eigen::MatrixXcd& rho0,
                              const numerics::TimeGrid& grid, const numerics::PropagateOptions& opts = {});

// ||L rho||_1 / ||L|| for the time-independent (secular) part of the generator; 0 if L = 0
double stationarity_residual(const generators::BlockGenerator& gen, const Eigen::MatrixXcd& rho);

// 1 / (2 min nonzero |Re lambda|); infinity if the generator has no decaying mode
double relaxation_time(const generators::RateMatrix& rates);
double relaxation_time(const generators::BlockGenerator& gen);
// 1 / min nonzero |Re lambda|, the e-folding time of the slowest mode; (2 gamma)^-1 for a symmetric two-level system
double characteristic_time(const generators::RateMatrix& rates);
double characteristic_time(const generators::BlockGenerator& gen);

// sum p ln(p / q)
double relative_entropy(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

} // namespace strongdecoh::dynamics
