// heom.hpp — High-temperature hierarchical equations of motion for Drude-Lorentz baths

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "strongdecoh/model.hpp"
#include "strongdecoh/numerics.hpp"

namespace strongdecoh::heom {

using cplx = std::complex<double>;

// One independent Drude-Lorentz bath per coupling operator; C_k(t) = c_k e^{-Omega_k t}, c_k = eta_k Omega_k (2/(beta Omega_k) - i)
struct HierarchySpec {
    model::SystemSpec system;
    int depth{8};

    void validate() const;
    int baths() const { return system.channels(); }
};

struct HeomOptions {
    double tolerance{1e-9};
    double max_step{1.0}; // fs
};

struct HeomResult {
    numerics::TimeGrid grid;
    std::vector<Eigen::MatrixXcd> rho; // system basis
    int depth{0};
    int auxiliaries{0};
    double max_trace_error{0.0};
    double max_hermiticity_error{0.0};
    std::vector<std::string> warnings;
};

// number of multi-indices with |n| <= depth for k baths
int hierarchy_size(int baths, int depth);

HeomResult heom_evolve(const HierarchySpec& spec, const Eigen::MatrixXcd& rho0, const numerics::TimeGrid& grid,
                       const HeomOptions& opts = {});

struct ConvergenceReport {
    std::vector<int> depths;
    std::vector<double> differences; // max |rho_K - rho_K'| to the next depth
    int depth{0};                    // first depth within tolerance; largest depth if none
    bool converged{false};
    HeomResult trajectory;           // at the accepted depth
};

// depths ascending, at least two
ConvergenceReport heom_converged(const model::SystemSpec& system, const Eigen::MatrixXcd& rho0,
                                 const numerics::TimeGrid& grid, const std::vector<int>& depths,
                                 double tolerance = 1e-4, const HeomOptions& opts = {});

} // namespace strongdecoh::heom
