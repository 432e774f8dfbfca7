// kernels.cpp — Cumulant kernels zeta_nm, zeta_mnl and the h overlap

#include "strongdecoh/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "strongdecoh/errors.hpp"

namespace strongdecoh::kernels {

namespace {

using model::PointerModel;

constexpr double kUnderflowExponent = 700.0;

cplx safe_exp(cplx e) {
    if (-e.real() > kUnderflowExponent) return 0.0;
    return std::exp(e);
}

void check_block(const KernelContext& ctx, int n) {
    if (n < 0 || n >= ctx.blocks()) throw DomainError("block index " + std::to_string(n) + " out of range");
}

} // namespace

KernelContext::KernelContext(model::PointerModel model, bath::LineshapeTable table)
    : model_(std::move(model)), table_(std::move(table)) {
    if (table_.channels() != model_.channels())
        throw DomainError("lineshape table and model have different numbers of channels");
    const int B = model_.blocks();
    lambda_.setZero(B, B);
    rate_.setZero(B, B);
    const Eigen::MatrixXcd& reorg = model_.reorganization;
    for (int n = 0; n < B; ++n)
        for (int m = 0; m < B; ++m) {
            const Eigen::VectorXd d = model_.theta_diff(n, m);
            lambda_(n, m) = PointerModel::contract(d, d, reorg).real();
            rate_(n, m) = PointerModel::contract(d, d, table_.slope()).real();
            // Lambda_nm = delta_eps_n + delta_eps_m - 2 Re theta_n^T reorg theta_m
            const double alt = model_.delta_eps(n) + model_.delta_eps(m) -
                               2.0 * PointerModel::contract(model_.theta.col(n), model_.theta.col(m), reorg).real();
            if (std::abs(alt - lambda_(n, m)) > 1e-10 * (1.0 + std::abs(alt)))
                throw NumericalError("inconsistent reorganization contraction for pair (" + std::to_string(n) + "," +
                                     std::to_string(m) + ")");
        }
}

cplx KernelContext::G(int n, int m, double t) const {
    if (n == m) return 0.0;
    const Eigen::VectorXd d = model_.theta_diff(n, m);
    const int M = model_.channels();
    cplx s = 0.0;
    for (int a = 0; a < M; ++a) {
        if (d(a) == 0.0) continue;
        for (int b = 0; b < M; ++b)
            if (d(b) != 0.0) s += d(a) * d(b) * table_.g(a, b, t);
    }
    return s;
}

double kernel_time_scale(const KernelContext& ctx, int n, int m) {
    if (n == m) return ctx.table().memory_time();
    double t = 1e-2;
    const double horizon = std::max(1e6, 100.0 * ctx.table().memory_time());
    while (t < horizon && ctx.G(n, m, t).real() < 1.0) t *= 1.5;
    return std::clamp(t, 1e-2, std::max(1.0, ctx.table().memory_time()));
}

cplx zeta(const KernelContext& ctx, int n, int m, double t) {
    check_block(ctx, n);
    check_block(ctx, m);
    if (n == m) return 1.0;
    if (t < 0.0) return std::conj(zeta(ctx, n, m, -t));
    return safe_exp(-ctx.G(n, m, t) - cplx(0.0, t * ctx.Lambda(n, m)));
}

cplx zeta3(const KernelContext& ctx, int m, int n, int l, double t, double tau) {
    check_block(ctx, m);
    check_block(ctx, n);
    check_block(ctx, l);
    if (tau < 0.0 || tau > t * (1.0 + 1e-14) + 1e-14)
        throw DomainError("zeta3 requires 0 <= tau <= t");
    tau = std::min(tau, t);
    const auto& pm = ctx.model();
    const auto& tab = ctx.table();
    const int M = pm.channels();
    const Eigen::VectorXd dnm = pm.theta_diff(n, m);
    const Eigen::VectorXd dnl = pm.theta_diff(n, l);
    const Eigen::VectorXd tm = pm.theta.col(m);
    const Eigen::VectorXd tl = pm.theta.col(l);
    const double u = t - tau;
    cplx e = 0.0;
    for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) {
            const cplx gt = tab.g(a, b, t), gu = tab.g(a, b, u), gtau = tab.g(a, b, tau);
            e += -dnm(a) * dnl(b) * gtau;
            e += dnm(a) * (tm(b) * std::conj(gt) - tl(b) * gt);
            e += dnl(a) * (tl(b) * gu - tm(b) * std::conj(gu));
        }
    return safe_exp(e);
}

cplx zeta3_cumulant(const KernelContext& ctx, int m, int n, int l, double t, double tau) {
    check_block(ctx, m);
    check_block(ctx, n);
    check_block(ctx, l);
    if (tau < 0.0 || tau > t * (1.0 + 1e-14) + 1e-14)
        throw DomainError("zeta3 requires 0 <= tau <= t");
    tau = std::min(tau, t);
    const auto& pm = ctx.model();
    const auto& tab = ctx.table();
    const double u = t - tau;
    const cplx I(0.0, 1.0);
    // ordered exponential factors exp(s_k theta_k . X(T_k)), X(T) the integrated bath displacement up to T
    struct Factor {
        cplx s;
        Eigen::VectorXd c;
        double T;
    };
    const std::array<Factor, 4> f{{{I, pm.theta.col(m), t},
                                   {-I, pm.theta.col(n), t},
                                   {I, pm.theta.col(n), u},
                                   {-I, pm.theta.col(l), u}}};
    cplx e = 0.0;
    for (const auto& fk : f) {
        const Eigen::MatrixXcd g = tab.g(fk.T);
        const cplx q = PointerModel::contract(fk.c, fk.c, fk.s.imag() < 0.0 ? g : Eigen::MatrixXcd(g.conjugate()));
        e -= q;
    }
    for (std::size_t j = 0; j < f.size(); ++j)
        for (std::size_t k = j + 1; k < f.size(); ++k)
            e += f[j].s * f[k].s * PointerModel::contract(f[j].c, f[k].c, h_overlap(tab, f[j].T, f[k].T));
    return safe_exp(e);
}

cplx h_overlap(const bath::LineshapeTable& table, int a, int b, double t1, double t2) {
    if (t1 < 0.0 || t2 < 0.0) throw DomainError("h_overlap requires nonnegative times");
    return table.g(a, b, t1) - table.g(a, b, t1 - t2) + std::conj(table.g(b, a, t2));
}

Eigen::MatrixXcd h_overlap(const bath::LineshapeTable& table, double t1, double t2) {
    const int M = table.channels();
    Eigen::MatrixXcd H(M, M);
    for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) H(a, b) = h_overlap(table, a, b, t1, t2);
    return H;
}

} // namespace strongdecoh::kernels
