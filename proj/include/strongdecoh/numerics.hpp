// numerics.hpp — Quadrature, ODE propagation and linear-algebra helpers

#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace strongdecoh::numerics {

using cplx = std::complex<double>;
using ComplexFn = std::function<cplx(double)>;

struct QuadratureSpec {
    double rel_tol{1e-10};
    double abs_tol{1e-14};
    int max_subdivisions{4000};
    double omega_max{1.0};        // rad/fs; split point between the finite part and the mapped tail
    double decay_threshold{1e-13}; // kernel truncation: stop once |zeta| stays below this
    double max_horizon{2e6};      // fs; beyond this a kernel is declared non-decaying
    double time_scale{4.0};       // fs; first window of half-line kernel integrals

    void validate() const;
};

struct QuadResult {
    cplx value{0.0, 0.0};
    double abs_error{0.0};
    bool converged{true};
    long evaluations{0};
};

// Adaptive Gauss-Kronrod (21 point) on [a, b]. Breakpoints inside (a, b) seed the partition.
QuadResult integrate_interval(const ComplexFn& f, double a, double b, const QuadratureSpec& spec,
                              std::span<const double> breakpoints = {});

// Integral over [0, inf): adaptive on [0, omega_max], tail mapped by w = omega_max / x.
QuadResult integrate_frequency(const ComplexFn& f, const QuadratureSpec& spec,
                               std::span<const double> breakpoints = {});

// int_0^upper zeta(tau) e^{i w0 tau} dtau, truncated once |zeta| < decay_threshold over a whole window.
// upper = +inf gives the half-line transform.
QuadResult integrate_kernel(const ComplexFn& zeta, double w0, double upper, const QuadratureSpec& spec);

inline QuadResult integrate_kernel_halfline(const ComplexFn& zeta, double w0, const QuadratureSpec& spec) {
    return integrate_kernel(zeta, w0, std::numeric_limits<double>::infinity(), spec);
}

// Running integrals int_0^{t_k} zeta(tau) e^{i w0 tau} dtau at sorted nonnegative times.
std::vector<cplx> cumulative_kernel_integral(const ComplexFn& zeta, double w0, std::span<const double> times,
                                             const QuadratureSpec& spec);

struct TimeGrid {
    std::vector<double> nodes;

    static TimeGrid uniform(double start, double end, double step);
    static TimeGrid from_nodes(std::vector<double> nodes);
    void validate() const;
    std::size_t size() const { return nodes.size(); }
    double start() const { return nodes.front(); }
    double end() const { return nodes.back(); }
};

enum class Stepper { rk4, dopri5 };

struct PropagateOptions {
    Stepper stepper{Stepper::rk4};
    double max_step{1.0};       // fs
    double generator_norm{0.0}; // ||L||, sets the RK4 step min(max_step, 0.01/||L||)
    double tolerance{1e-9};     // adaptive per-step tolerance
    double min_step{1e-10};     // fs; adaptive underflow limit
};

using ComplexRhs = std::function<void(double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dydt)>;
using RealRhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt)>;

std::vector<Eigen::VectorXcd> propagate(const ComplexRhs& rhs, const Eigen::VectorXcd& y0, const TimeGrid& grid,
                                        const PropagateOptions& opts = {});
std::vector<Eigen::VectorXd> propagate(const RealRhs& rhs, const Eigen::VectorXd& y0, const TimeGrid& grid,
                                       const PropagateOptions& opts = {});

// Constant generators; the RK4 step is chosen from ||L|| automatically.
std::vector<Eigen::VectorXd> propagate(const Eigen::MatrixXd& L, const Eigen::VectorXd& y0, const TimeGrid& grid,
                                       PropagateOptions opts = {});
std::vector<Eigen::VectorXcd> propagate(const Eigen::MatrixXcd& L, const Eigen::VectorXcd& y0,
                                        const TimeGrid& grid, PropagateOptions opts = {});

// Normalized kernel vector of a Pauli generator (sum 1, nonnegative).
Eigen::VectorXd steady_null_space(const Eigen::MatrixXd& L);
// Kernel vector normalized so that w . v = 1 (w: trace functional of a vectorized density matrix).
Eigen::VectorXcd steady_null_space(const Eigen::MatrixXcd& L, const Eigen::VectorXcd& w);

double operator_norm(const Eigen::MatrixXd& A);
double operator_norm(const Eigen::MatrixXcd& A);
double trace_norm(const Eigen::MatrixXcd& A);

// Column-major vectorization: vec(A X B) = (B^T kron A) vec(X)
Eigen::VectorXcd vec(const Eigen::MatrixXcd& X);
Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, Eigen::Index n);
Eigen::MatrixXcd kron(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B);
// superoperators of X -> A X B, X -> A X, X -> X B
Eigen::MatrixXcd sandwich(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B);
Eigen::MatrixXcd left_mult(const Eigen::MatrixXcd& A);
Eigen::MatrixXcd right_mult(const Eigen::MatrixXcd& B);

// Hermitian matrix exponential exp(s H) with complex scalar s
Eigen::MatrixXcd expm_hermitian(const Eigen::MatrixXcd& H, cplx s);

} // namespace strongdecoh::numerics
