// coherences.cpp — Equilibrium, steady, nonequilibrium, decoherence and coherence-coherence terms

#include "strongdecoh/coherences.hpp"

#include <cmath>

#include "strongdecoh/errors.hpp"

namespace strongdecoh::coherences {

namespace {

using kernels::KernelContext;

const cplx I(0.0, 1.0);

numerics::QuadratureSpec kq(const KernelContext& ctx, int n, int m, const numerics::QuadratureSpec& quad) {
    numerics::QuadratureSpec q = quad;
    q.time_scale = kernels::kernel_time_scale(ctx, n, m);
    return q;
}

void require_simple(const KernelContext& ctx) {
    if (!ctx.model().simple) throw DomainError("this coherence formula needs one-dimensional blocks");
}

cplx finite_kernel(const numerics::ComplexFn& f, double w0, double t, const numerics::QuadratureSpec& q) {
    if (t <= 0.0) return 0.0;
    return numerics::integrate_kernel(f, w0, t, q).value;
}

Eigen::MatrixXcd decoh_term(const KernelContext& ctx, const Eigen::MatrixXcd& rho0, double t) {
    const auto& pm = ctx.model();
    const int N = pm.blocks();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(N, N);
    for (int n = 0; n < N; ++n)
        for (int m = 0; m < N; ++m) {
            if (n == m || rho0(n, m) == 0.0) continue;
            out(n, m) = rho0(n, m) * kernels::zeta3(ctx, m, n, n, t, 0.0) *
                        std::exp(I * ((pm.eps(m) - pm.eps(n)) * t));
        }
    return out;
}

Eigen::MatrixXcd cohcoh_term(const KernelContext& ctx, const Eigen::MatrixXcd& rho0, double t,
                             const numerics::QuadratureSpec& quad) {
    const auto& pm = ctx.model();
    const int N = pm.blocks();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(N, N);
    if (t <= 0.0 || N < 3) return out;
    const Eigen::VectorXd& e = pm.eps;
    for (int n = 0; n < N; ++n)
        for (int m = 0; m < N; ++m) {
            if (n == m) continue;
            cplx acc = 0.0;
            for (int l = 0; l < N; ++l) {
                if (l == n || l == m) continue;
                const cplx a = rho0(n, l) * pm.J(l, m);
                const cplx b = rho0(l, m) * pm.J(n, l);
                if (a == 0.0 && b == 0.0) continue;
                auto f = [&](double tau) -> cplx {
                    cplx v = 0.0;
                    if (a != 0.0)
                        v += a * std::conj(kernels::zeta3(ctx, n, m, l, t, tau)) *
                             std::exp(I * (e(m) * tau - e(n) * t + e(l) * (t - tau)));
                    if (b != 0.0)
                        v -= b * kernels::zeta3(ctx, m, n, l, t, tau) *
                             std::exp(I * (e(m) * t - e(n) * tau - e(l) * (t - tau)));
                    return v;
                };
                numerics::QuadratureSpec q = quad;
                q.time_scale = std::min(t, std::min(kernels::kernel_time_scale(ctx, n, l), kernels::kernel_time_scale(ctx, m, l)));
                acc += numerics::integrate_interval(f, 0.0, t, q).value;
            }
            out(n, m) = I * acc;
        }
    return out;
}

} // namespace

Eigen::MatrixXcd CoherenceTrajectory::density(std::size_t k) const {
    Eigen::MatrixXcd r = terms[k].total();
    r.diagonal() = populations[k].cast<cplx>();
    return r;
}

Eigen::MatrixXcd coherence_equilibrium(const KernelContext& ctx, const Eigen::VectorXd& p, double t,
                                       const numerics::QuadratureSpec& quad) {
    require_simple(ctx);
    const auto& pm = ctx.model();
    const int N = pm.blocks();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(N, N);
    for (int n = 0; n < N; ++n)
        for (int m = n + 1; m < N; ++m) {
            const cplx J = pm.J(n, m);
            if (J == 0.0 || t <= 0.0) continue;
            const double w = pm.eps_bar(m) - pm.eps_bar(n);
            const auto q = kq(ctx, n, m, quad);
            const cplx I1 = finite_kernel([&](double tau) { return std::conj(kernels::zeta(ctx, m, n, tau)); }, w, t, q);
            const cplx I2 = finite_kernel([&](double tau) { return kernels::zeta(ctx, n, m, tau); }, w, t, q);
            out(n, m) = I * J * p(n) * I1 - I * J * p(m) * I2;
            out(m, n) = std::conj(out(n, m));
        }
    return out;
}

Eigen::MatrixXcd coherence_steady(const KernelContext& ctx, const numerics::QuadratureSpec& quad) {
    require_simple(ctx);
    const auto& pm = ctx.model();
    const int N = pm.blocks();
    const Eigen::VectorXd p = dynamics::gibbs_populations(pm.eps_bar, pm.beta);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(N, N);
    for (int n = 0; n < N; ++n)
        for (int m = n + 1; m < N; ++m) {
            const cplx J = pm.J(n, m);
            if (J == 0.0) continue;
            const double w = pm.eps_bar(m) - pm.eps_bar(n);
            const auto q = kq(ctx, n, m, quad);
            const cplx A = numerics::integrate_kernel_halfline([&](double tau) { return kernels::zeta(ctx, m, n, tau); }, -w, q).value;
            const cplx B = numerics::integrate_kernel_halfline([&](double tau) { return kernels::zeta(ctx, n, m, tau); }, w, q).value;
            out(n, m) = J * p(n) * A.imag() + J * p(m) * B.imag();
            out(m, n) = std::conj(out(n, m));
        }
    return out;
}

Eigen::MatrixXcd coherence_noneq(const KernelContext& ctx, const Eigen::VectorXd& p0, double t,
                                 const numerics::QuadratureSpec& quad) {
    require_simple(ctx);
    const auto& pm = ctx.model();
    const int N = pm.blocks();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(N, N);
    if (t <= 0.0) return out;
    for (int n = 0; n < N; ++n)
        for (int m = n + 1; m < N; ++m) {
            const cplx J = pm.J(n, m);
            if (J == 0.0) continue;
            const double dd = pm.delta_eps(m) - pm.delta_eps(n);
            auto f = [&](double tau) -> cplx {
                const cplx ph = std::exp(-I * (dd * tau));
                cplx v = 0.0;
                if (p0(n) != 0.0)
                    v += p0(n) * (std::conj(kernels::zeta3(ctx, n, m, n, t, tau)) - ph * std::conj(kernels::zeta(ctx, m, n, tau)));
                if (p0(m) != 0.0)
                    v -= p0(m) * (kernels::zeta3(ctx, m, n, m, t, tau) - ph * kernels::zeta(ctx, n, m, tau));
                return v;
            };
            auto q = kq(ctx, n, m, quad);
            // the two pieces are O(1) over ~time_scale and cancel once t >> 1/Omega; resolve only above their rounding floor
            q.abs_tol = std::max(q.abs_tol, 1e-13 * q.time_scale);
            out(n, m) = I * J * finite_kernel(f, pm.eps(m) - pm.eps(n), t, q);
            out(m, n) = std::conj(out(n, m));
        }
    return out;
}

CoherenceTerms coherence_full(const KernelContext& ctx, const Eigen::MatrixXcd& rho0, const Eigen::VectorXd& p_t,
                              double t, const numerics::QuadratureSpec& quad) {
    require_simple(ctx);
    const int N = ctx.blocks();
    if (rho0.rows() != N || rho0.cols() != N) throw DomainError("initial state has wrong dimension");
    CoherenceTerms c;
    c.eq = coherence_equilibrium(ctx, p_t, t, quad);
    c.noneq = coherence_noneq(ctx, rho0.diagonal().real(), t, quad);
    c.decoh = decoh_term(ctx, rho0, t);
    c.cohcoh = cohcoh_term(ctx, rho0, t, quad);
    return c;
}

CoherenceTrajectory coherence_trajectory(const KernelContext& ctx, const Eigen::MatrixXcd& rho0,
                                         const dynamics::PopulationTrajectory& pops, const TrajectoryOptions& opts) {
    require_simple(ctx);
    const auto& pm = ctx.model();
    const int N = pm.blocks();
    if (rho0.rows() != N || rho0.cols() != N) throw DomainError("initial state has wrong dimension");
    const auto& times = pops.grid.nodes;
    if (!times.empty() && times.front() < 0.0) throw DomainError("coherence trajectories need nonnegative times");
    CoherenceTrajectory tr;
    tr.grid = pops.grid;
    tr.populations = pops.p;
    const Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(N, N);
    tr.terms.assign(times.size(), CoherenceTerms{zero, zero, zero, zero});

    // equilibrium term from running integrals
    for (int n = 0; n < N; ++n)
        for (int m = n + 1; m < N; ++m) {
            const cplx J = pm.J(n, m);
            if (J == 0.0) continue;
            const double w = pm.eps_bar(m) - pm.eps_bar(n);
            const auto q = kq(ctx, n, m, opts.quad);
            const auto I1 = numerics::cumulative_kernel_integral(
                [&](double tau) { return std::conj(kernels::zeta(ctx, m, n, tau)); }, w, times, q);
            const auto I2 = numerics::cumulative_kernel_integral(
                [&](double tau) { return kernels::zeta(ctx, n, m, tau); }, w, times, q);
            for (std::size_t k = 0; k < times.size(); ++k) {
                const auto& p = pops.p[k];
                const cplx v = I * J * p(n) * I1[k] - I * J * p(m) * I2[k];
                tr.terms[k].eq(n, m) = v;
                tr.terms[k].eq(m, n) = std::conj(v);
            }
        }
    const Eigen::VectorXd p0 = rho0.diagonal().real();
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double t = times[k];
        if (opts.noneq) tr.terms[k].noneq = coherence_noneq(ctx, p0, t, opts.quad);
        if (opts.decoh) tr.terms[k].decoh = decoh_term(ctx, rho0, t);
        if (opts.cohcoh) tr.terms[k].cohcoh = cohcoh_term(ctx, rho0, t, opts.quad);
    }
    return tr;
}

Eigen::MatrixXcd coherence_blocks_general(const KernelContext& ctx, const Eigen::MatrixXcd& rho_d, double t,
                                          const numerics::QuadratureSpec& quad) {
    const auto& pm = ctx.model();
    if (pm.offblock_coupling_norm > 1e-10)
        throw UnsupportedModeError("coupling operators have off-diagonal blocks; only the degenerate ultrastrong case is implemented");
    const int N = pm.size();
    if (rho_d.rows() != N || rho_d.cols() != N) throw DomainError("block state has wrong dimension");
    const auto layout = generators::empty_generator(ctx);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(N, N);
    if (t <= 0.0) return out;
    const int B = pm.blocks();
    for (int n = 0; n < B; ++n)
        for (int m = 0; m < B; ++m) {
            if (n == m) continue;
            const int on = pm.block_offset[static_cast<std::size_t>(n)], dn = pm.block_size[static_cast<std::size_t>(n)];
            const int om = pm.block_offset[static_cast<std::size_t>(m)], dm = pm.block_size[static_cast<std::size_t>(m)];
            Eigen::MatrixXcd Vnm = Eigen::MatrixXcd::Zero(N, N);
            Vnm.block(on, om, dn, dm) = pm.V.block(on, om, dn, dm);
            if (Vnm.cwiseAbs().maxCoeff() == 0.0) continue;
            Eigen::MatrixXcd rn = Eigen::MatrixXcd::Zero(N, N), rm = Eigen::MatrixXcd::Zero(N, N);
            rn.block(on, on, dn, dn) = rho_d.block(on, on, dn, dn);
            rm.block(om, om, dm, dm) = rho_d.block(om, om, dm, dm);
            const auto q = kq(ctx, n, m, quad);
            for (const auto& [nu, Vw] : generators::eigenoperators(layout, Vnm, n, m)) {
                const cplx A = finite_kernel([&](double tau) { return std::conj(kernels::zeta(ctx, m, n, tau)); }, nu, t, q);
                const cplx Bv = finite_kernel([&](double tau) { return kernels::zeta(ctx, n, m, tau); }, nu, t, q);
                out += I * (A * (rn * Vw) - Bv * (Vw * rm));
            }
        }
    return out;
}

Eigen::MatrixXd decoherence_rates(const KernelContext& ctx) {
    const int B = ctx.blocks();
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(B, B);
    for (int n = 0; n < B; ++n)
        for (int m = 0; m < B; ++m)
            if (n != m) r(n, m) = ctx.decoherence_rate(n, m);
    return r;
}

double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    const Eigen::MatrixXcd d = a - b;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

} // namespace strongdecoh::coherences
