// kernels.hpp — Two- and three-point bath overlap kernels from the second-order cumulant

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "strongdecoh/bath.hpp"
#include "strongdecoh/model.hpp"

namespace strongdecoh::kernels {

using cplx = std::complex<double>;

// Immutable; holds copies of the model and table. Indices n, m, l are block indices.
class KernelContext {
public:
    KernelContext(model::PointerModel model, bath::LineshapeTable table);

    const model::PointerModel& model() const { return model_; }
    const bath::LineshapeTable& table() const { return table_; }
    int blocks() const { return model_.blocks(); }

    // G_nm(t) = sum_ab d_a d_b g_ab(t), d = theta_n - theta_m
    cplx G(int n, int m, double t) const;
    // Lambda_nm = sum_ab d_a d_b delta_eps_ab
    double Lambda(int n, int m) const { return lambda_(n, m); }
    // asymptotic decoherence rate Re sum_ab d_a d_b (dg/dt)_ab(inf)
    double decoherence_rate(int n, int m) const { return rate_(n, m); }

private:
    model::PointerModel model_;
    bath::LineshapeTable table_;
    Eigen::MatrixXd lambda_;
    Eigen::MatrixXd rate_;
};

// time at which Re G_nm first reaches 1 (first window of kernel quadrature), fs
double kernel_time_scale(const KernelContext& ctx, int n, int m);

// zeta_nm(t) = exp[-G_nm(t) - i t Lambda_nm]; negative t via conjugation
cplx zeta(const KernelContext& ctx, int n, int m, double t);

// zeta_mnl(t, tau), 0 <= tau <= t, closed form
cplx zeta3(const KernelContext& ctx, int m, int n, int l, double t, double tau);
// same kernel assembled factor by factor from h_overlap pieces
cplx zeta3_cumulant(const KernelContext& ctx, int m, int n, int l, double t, double tau);

// h_ab(t1, t2) = g_ab(t1) - g_ab(t1 - t2) + conj g_ba(t2)
cplx h_overlap(const bath::LineshapeTable& table, int a, int b, double t1, double t2);
Eigen::MatrixXcd h_overlap(const bath::LineshapeTable& table, double t1, double t2);

} // namespace strongdecoh::kernels
