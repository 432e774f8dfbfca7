// generators.cpp — Rate matrices, eigenoperator decompositions and block generators

#include "strongdecoh/generators.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "strongdecoh/errors.hpp"

namespace strongdecoh::generators {

namespace {

using kernels::KernelContext;

struct Level {
    double energy;
    Eigen::MatrixXcd projector; // N x N
};

// eigenvalue clusters of the block Hamiltonian, embedded in the full space
std::vector<Level> block_levels(const BlockGenerator& g, int n, double tol) {
    const int o = g.block_offset[static_cast<std::size_t>(n)], d = g.block_size[static_cast<std::size_t>(n)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g.hbar.block(o, o, d, d));
    if (es.info() != Eigen::Success) throw NumericalError("eigen-decomposition of block Hamiltonian failed");
    std::vector<Level> out;
    int start = 0;
    for (int i = 1; i <= d; ++i) {
        if (i == d || es.eigenvalues()(i) - es.eigenvalues()(i - 1) > tol) {
            Level lv;
            lv.energy = es.eigenvalues().segment(start, i - start).mean();
            lv.projector = Eigen::MatrixXcd::Zero(g.dim, g.dim);
            const Eigen::MatrixXcd U = es.eigenvectors().middleCols(start, i - start);
            lv.projector.block(o, o, d, d) = U * U.adjoint();
            out.push_back(std::move(lv));
            start = i;
        }
    }
    return out;
}

Eigen::MatrixXcd term_superoperator(const DissipatorTerm& t) {
    const Eigen::MatrixXcd K = t.R.adjoint() * t.L;
    Eigen::MatrixXcd S = t.gamma * (numerics::sandwich(t.L, t.R.adjoint()) - 0.5 * numerics::left_mult(K) -
                                    0.5 * numerics::right_mult(K));
    if (t.shift != 0.0) S += cplx(0.0, -1.0) * t.shift * (numerics::left_mult(K) - numerics::right_mult(K));
    return S;
}

// pairwise cache of Gamma_ab(w) for the intra-block terms
class BathGammaCache {
public:
    BathGammaCache(const bath::LineshapeTable& t, const numerics::QuadratureSpec& q) : table_(t), quad_(q) {}
    cplx operator()(int a, int b, double w) {
        const auto key = std::make_tuple(a, b, w);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const cplx v = bath::gamma_bath_halfline(table_, a, b, w, quad_);
        cache_.emplace(key, v);
        return v;
    }

private:
    const bath::LineshapeTable& table_;
    numerics::QuadratureSpec quad_;
    std::map<std::tuple<int, int, double>, cplx> cache_;
};

numerics::QuadratureSpec kernel_quad(const KernelContext& ctx, int n, int m, const numerics::QuadratureSpec& quad) {
    numerics::QuadratureSpec q = quad;
    q.time_scale = kernels::kernel_time_scale(ctx, n, m);
    return q;
}

} // namespace

Eigen::MatrixXd RateMatrix::rates() const {
    Eigen::MatrixXd r = gamma;
    r.diagonal().setZero();
    return r;
}

void RateMatrix::validate() const {
    const int N = size();
    for (int n = 0; n < N; ++n) {
        for (int m = 0; m < N; ++m)
            if (n != m && gamma(n, m) < -1e-14) throw NumericalError("negative off-diagonal rate");
        if (std::abs(gamma.col(n).sum()) > 1e-12 * std::max(1.0, gamma.cwiseAbs().maxCoeff()))
            throw NumericalError("rate matrix column does not sum to zero");
    }
}

RateMatrix rate_matrix_from_rates(const Eigen::MatrixXd& off) {
    RateMatrix R;
    R.gamma = off;
    R.gamma.diagonal().setZero();
    for (int n = 0; n < off.cols(); ++n) R.gamma(n, n) = -R.gamma.col(n).sum();
    return R;
}

cplx gamma_raw(const KernelContext& ctx, int n, int m, double nu, const numerics::QuadratureSpec& quad) {
    if (n == m) throw DomainError("gamma requires distinct blocks");
    const auto q = kernel_quad(ctx, n, m, quad);
    return numerics::integrate_kernel_halfline([&](double tau) { return kernels::zeta(ctx, n, m, tau); }, nu, q).value;
}

cplx gamma_halfline(const KernelContext& ctx, int n, int m, double w, const numerics::QuadratureSpec& quad) {
    const auto& eb = ctx.model().eps_bar;
    return gamma_raw(ctx, n, m, eb(m) - eb(n) - w, quad);
}

RateMatrix forster_rates(const KernelContext& ctx, const numerics::QuadratureSpec& quad) {
    const auto& pm = ctx.model();
    if (!pm.simple) throw DomainError("Förster rates need one-dimensional blocks");
    const int N = pm.blocks();
    Eigen::MatrixXd off = Eigen::MatrixXd::Zero(N, N);
    for (int n = 0; n < N; ++n)
        for (int m = 0; m < N; ++m) {
            if (n == m) continue;
            const double J2 = std::norm(pm.J(n, m));
            if (J2 == 0.0) continue;
            const cplx G = gamma_halfline(ctx, n, m, 0.0, quad);
            double r = 2.0 * J2 * G.real();
            if (r < 0.0) {
                if (r > -1e-10) {
                    r = 0.0;
                } else {
                    throw NumericalError("negative Förster rate " + std::to_string(r) + " for pair (" +
                                         std::to_string(n) + "," + std::to_string(m) + "), half-line integral " +
                                         std::to_string(G.real()) + " + " + std::to_string(G.imag()) + "i");
                }
            }
            off(n, m) = r;
        }
    return rate_matrix_from_rates(off);
}

Eigen::MatrixXcd BlockGenerator::superoperator(double t) const {
    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(dim * dim, dim * dim);
    for (const auto& [w, L] : phase_groups()) S += std::exp(cplx(0.0, w * t)) * L;
    return S;
}

std::vector<std::pair<double, Eigen::MatrixXcd>> BlockGenerator::phase_groups() const {
    std::vector<std::pair<double, Eigen::MatrixXcd>> out;
    for (const auto& t : terms) {
        const double ph = t.wp - t.w;
        auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return std::abs(p.first - ph) <= 1e-9; });
        if (it == out.end()) {
            out.emplace_back(ph, term_superoperator(t));
        } else {
            it->second += term_superoperator(t);
        }
    }
    if (out.empty()) out.emplace_back(0.0, Eigen::MatrixXcd::Zero(dim * dim, dim * dim));
    return out;
}

Eigen::MatrixXcd BlockGenerator::lamb_shift() const {
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& t : terms)
        if (std::abs(t.wp - t.w) <= 1e-9) H += t.shift * (t.R.adjoint() * t.L);
    return 0.5 * (H + H.adjoint());
}

std::vector<double> BlockGenerator::frequencies(int n, int m) const {
    std::vector<double> out;
    for (const auto& t : terms)
        if (t.n == n && t.m == m)
            for (double w : {t.w, t.wp})
                if (std::none_of(out.begin(), out.end(), [&](double x) { return std::abs(x - w) <= 1e-9; }))
                    out.push_back(w);
    std::sort(out.begin(), out.end());
    return out;
}

void BlockGenerator::append(const BlockGenerator& other) {
    if (other.dim != dim) throw DomainError("cannot combine generators of different dimension");
    terms.insert(terms.end(), other.terms.begin(), other.terms.end());
    notes.insert(notes.end(), other.notes.begin(), other.notes.end());
}

BlockGenerator empty_generator(const KernelContext& ctx) {
    const auto& pm = ctx.model();
    BlockGenerator g;
    g.dim = pm.size();
    g.block_offset = pm.block_offset;
    g.block_size = pm.block_size;
    g.hbar = pm.block_diagonal_hamiltonian();
    g.beta = pm.beta;
    return g;
}

std::vector<std::pair<double, Eigen::MatrixXcd>> eigenoperators(const BlockGenerator& layout, const Eigen::MatrixXcd& X,
                                                                int n, int m, double tol) {
    const auto Ln = block_levels(layout, n, tol);
    const auto Lm = n == m ? Ln : block_levels(layout, m, tol);
    std::vector<std::pair<double, Eigen::MatrixXcd>> out;
    const double scale = std::max(1.0, X.cwiseAbs().maxCoeff());
    for (const auto& a : Ln)
        for (const auto& b : Lm) {
            Eigen::MatrixXcd piece = a.projector * X * b.projector;
            if (piece.cwiseAbs().maxCoeff() <= 1e-14 * scale) continue;
            const double w = b.energy - a.energy;
            auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return std::abs(p.first - w) <= tol; });
            if (it == out.end()) {
                out.emplace_back(w, std::move(piece));
            } else {
                it->second += piece;
            }
        }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    return out;
}

BlockGenerator redfield_block(const KernelContext& ctx, int n, const GeneratorOptions& opts) {
    const auto& pm = ctx.model();
    if (n < 0 || n >= pm.blocks()) throw DomainError("block index out of range");
    BlockGenerator g = empty_generator(ctx);
    g.secular = opts.secular;
    const int M = pm.channels();
    const int o = pm.block_offset[static_cast<std::size_t>(n)], d = pm.block_size[static_cast<std::size_t>(n)];
    std::vector<std::vector<std::pair<double, Eigen::MatrixXcd>>> ops(static_cast<std::size_t>(M));
    for (int a = 0; a < M; ++a) {
        Eigen::MatrixXcd dA = Eigen::MatrixXcd::Zero(g.dim, g.dim);
        dA.block(o, o, d, d) = pm.delta_a[static_cast<std::size_t>(a)].block(o, o, d, d);
        if (dA.cwiseAbs().maxCoeff() <= 1e-14) continue;
        ops[static_cast<std::size_t>(a)] = eigenoperators(g, dA, n, n, opts.bohr_tolerance);
    }
    BathGammaCache G(ctx.table(), opts.quad);
    for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) {
            if (ctx.table().reorganization()(a, b) == 0.0 && ctx.table().slope()(a, b) == 0.0) continue;
            for (const auto& [w, Ab] : ops[static_cast<std::size_t>(b)])
                for (const auto& [wp, Aa] : ops[static_cast<std::size_t>(a)]) {
                    if (opts.secular && std::abs(w - wp) > opts.secular_gap) continue;
                    DissipatorTerm t;
                    t.kind = TermKind::redfield;
                    t.n = t.m = n;
                    t.a = a;
                    t.b = b;
                    t.w = w;
                    t.wp = wp;
                    const cplx Gw = G(a, b, w), Gwp = G(b, a, wp);
                    t.gamma = Gw + std::conj(Gwp);
                    t.shift = (Gw - std::conj(Gwp)) / cplx(0.0, 2.0);
                    t.L = Ab;
                    t.R = Aa;
                    g.terms.push_back(std::move(t));
                }
        }
    return g;
}

BlockGenerator transition_block(const KernelContext& ctx, int n, int m, const GeneratorOptions& opts) {
    const auto& pm = ctx.model();
    if (n == m) throw DomainError("transition block needs distinct blocks");
    if (n < 0 || m < 0 || n >= pm.blocks() || m >= pm.blocks()) throw DomainError("block index out of range");
    if (pm.offblock_coupling_norm > 1e-10)
        throw UnsupportedModeError("coupling operators have off-diagonal blocks (norm " +
                                   std::to_string(pm.offblock_coupling_norm) +
                                   "); only the degenerate ultrastrong case is implemented");
    BlockGenerator g = empty_generator(ctx);
    g.secular = opts.secular;
    Eigen::MatrixXcd Vnm = Eigen::MatrixXcd::Zero(g.dim, g.dim);
    const int on = pm.block_offset[static_cast<std::size_t>(n)], dn = pm.block_size[static_cast<std::size_t>(n)];
    const int om = pm.block_offset[static_cast<std::size_t>(m)], dm = pm.block_size[static_cast<std::size_t>(m)];
    Vnm.block(on, om, dn, dm) = pm.V.block(on, om, dn, dm);
    if (Vnm.cwiseAbs().maxCoeff() == 0.0) return g;
    const auto ops = eigenoperators(g, Vnm, n, m, opts.bohr_tolerance);
    std::vector<cplx> Gam;
    Gam.reserve(ops.size());
    for (const auto& op : ops) Gam.push_back(gamma_raw(ctx, n, m, op.first, opts.quad));
    for (std::size_t i = 0; i < ops.size(); ++i)
        for (std::size_t j = 0; j < ops.size(); ++j) {
            const double w = ops[i].first, wp = ops[j].first;
            if (opts.secular && std::abs(w - wp) > opts.secular_gap) continue;
            DissipatorTerm t;
            t.kind = TermKind::transition;
            t.n = n;
            t.m = m;
            t.w = w;
            t.wp = wp;
            t.gamma = Gam[i] + std::conj(Gam[j]);
            t.shift = (Gam[i] - std::conj(Gam[j])) / cplx(0.0, 2.0);
            t.L = ops[i].second;
            t.R = ops[j].second;
            g.terms.push_back(std::move(t));
        }
    return g;
}

BlockGenerator block_generator(const KernelContext& ctx, const GeneratorOptions& opts) {
    BlockGenerator g = empty_generator(ctx);
    g.secular = opts.secular;
    const int B = ctx.blocks();
    if (opts.redfield)
        for (int n = 0; n < B; ++n) g.append(redfield_block(ctx, n, opts));
    if (opts.transitions)
        for (int n = 0; n < B; ++n)
            for (int m = 0; m < B; ++m)
                if (n != m) g.append(transition_block(ctx, n, m, opts));
    return g;
}

BlockGenerator secularize(const BlockGenerator& gen, double gap_threshold) {
    BlockGenerator out = gen;
    out.terms.clear();
    out.secular = true;
    double min_gap = std::numeric_limits<double>::infinity();
    for (const auto& t : gen.terms) {
        const double gap = std::abs(t.wp - t.w);
        if (gap <= gap_threshold) {
            out.terms.push_back(t);
        } else {
            min_gap = std::min(min_gap, gap);
        }
    }
    if (std::isfinite(min_gap) && min_gap < 1e3 * gap_threshold)
        out.notes.push_back("near-degenerate Bohr frequencies: smallest dropped gap " + std::to_string(min_gap) +
                            " rad/fs");
    return out;
}

std::vector<GammaMatrix> secular_gamma_matrices(const KernelContext& ctx, const BlockGenerator& gen,
                                                const numerics::QuadratureSpec& quad) {
    std::vector<GammaMatrix> out;
    const int M = ctx.model().channels();
    BathGammaCache G(ctx.table(), quad);
    auto seen = [&](TermKind k, int n, int m, double w) {
        return std::any_of(out.begin(), out.end(), [&](const GammaMatrix& g) {
            return g.kind == k && g.n == n && g.m == m && std::abs(g.w - w) <= 1e-9;
        });
    };
    for (const auto& t : gen.terms) {
        if (std::abs(t.wp - t.w) > 1e-9 || seen(t.kind, t.n, t.m, t.w)) continue;
        GammaMatrix gm;
        gm.kind = t.kind;
        gm.n = t.n;
        gm.m = t.m;
        gm.w = t.w;
        if (t.kind == TermKind::transition) {
            gm.gamma = Eigen::MatrixXcd::Constant(1, 1, t.gamma);
        } else {
            gm.gamma.resize(M, M);
            for (int a = 0; a < M; ++a)
                for (int b = 0; b < M; ++b) gm.gamma(a, b) = G(a, b, t.w) + std::conj(G(b, a, t.w));
        }
        out.push_back(std::move(gm));
    }
    return out;
}

double min_gamma_eigenvalue(const std::vector<GammaMatrix>& mats) {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& g : mats) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (g.gamma + g.gamma.adjoint()), Eigen::EigenvaluesOnly);
        lo = std::min(lo, es.eigenvalues().minCoeff());
    }
    return lo;
}

double detailed_balance_residual(const BlockGenerator& gen) {
    std::vector<const DissipatorTerm*> sec;
    double gmax = 0.0;
    for (const auto& t : gen.terms)
        if (std::abs(t.wp - t.w) <= 1e-9) {
            sec.push_back(&t);
            gmax = std::max(gmax, std::abs(t.gamma));
        }
    if (gmax == 0.0) return 0.0;
    double worst = 0.0;
    for (const auto* t : sec) {
        if (t->w > 1e-9) continue; // each pair checked once, from the side where e^{beta w} <= 1
        for (const auto* u : sec) {
            if (u->kind != t->kind || u->n != t->m || u->m != t->n || u->a != t->b || u->b != t->a) continue;
            if (std::abs(u->w + t->w) > 1e-9) continue;
            worst = std::max(worst, std::abs(t->gamma - std::exp(gen.beta * t->w) * u->gamma) / gmax);
        }
    }
    return worst;
}

double detailed_balance_residual(const RateMatrix& rates, const Eigen::VectorXd& eps_bar, double beta) {
    const Eigen::MatrixXd off = rates.rates();
    const double gmax = off.maxCoeff();
    if (gmax <= 0.0) return 0.0;
    double worst = 0.0;
    for (int n = 0; n < rates.size(); ++n)
        for (int m = 0; m < rates.size(); ++m) {
            if (n == m) continue;
            const double dw = eps_bar(m) - eps_bar(n);
            if (dw > 0.0) continue;
            worst = std::max(worst, std::abs(off(n, m) - std::exp(beta * dw) * off(m, n)) / gmax);
        }
    return worst;
}

} // namespace strongdecoh::generators
