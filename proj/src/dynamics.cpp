// dynamics.cpp — Population and block evolution, Gibbs limits, ergodicity analysis

#include "strongdecoh/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "strongdecoh/errors.hpp"

namespace strongdecoh::dynamics {

namespace {

// column-major vec positions (i + N j) of the block-diagonal entries
std::vector<Eigen::Index> block_indices(const generators::BlockGenerator& g) {
    std::vector<Eigen::Index> idx;
    for (std::size_t b = 0; b < g.block_size.size(); ++b) {
        const int o = g.block_offset[b], d = g.block_size[b];
        for (int j = o; j < o + d; ++j)
            for (int i = o; i < o + d; ++i) idx.push_back(static_cast<Eigen::Index>(i) + static_cast<Eigen::Index>(g.dim) * j);
    }
    std::sort(idx.begin(), idx.end());
    return idx;
}

Eigen::MatrixXcd restrict(const Eigen::MatrixXcd& L, const std::vector<Eigen::Index>& idx) {
    const auto k = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXcd R(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) R(i, j) = L(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    return R;
}

// Tarjan strongly connected components on the edge set m -> n for gamma(n, m) > thr
std::vector<int> scc(const Eigen::MatrixXd& G, double thr, int& count) {
    const int N = static_cast<int>(G.rows());
    std::vector<int> index(static_cast<std::size_t>(N), -1), low(static_cast<std::size_t>(N), 0),
        comp(static_cast<std::size_t>(N), -1);
    std::vector<bool> on(static_cast<std::size_t>(N), false);
    std::vector<int> stack;
    int next = 0;
    count = 0;
    std::function<void(int)> visit = [&](int v) {
        const auto uv = static_cast<std::size_t>(v);
        index[uv] = low[uv] = next++;
        stack.push_back(v);
        on[uv] = true;
        for (int w = 0; w < N; ++w) {
            if (w == v || !(G(w, v) > thr)) continue;
            const auto uw = static_cast<std::size_t>(w);
            if (index[uw] < 0) {
                visit(w);
                low[uv] = std::min(low[uv], low[uw]);
            } else if (on[uw]) {
                low[uv] = std::min(low[uv], index[uw]);
            }
        }
        if (low[uv] == index[uv]) {
            int w;
            do {
                w = stack.back();
                stack.pop_back();
                on[static_cast<std::size_t>(w)] = false;
                comp[static_cast<std::size_t>(w)] = count;
            } while (w != v);
            ++count;
        }
    };
    for (int v = 0; v < N; ++v)
        if (index[static_cast<std::size_t>(v)] < 0) visit(v);
    return comp;
}

} // namespace

PopulationTrajectory evolve_pauli(const generators::RateMatrix& rates, const Eigen::VectorXd& p0,
                                  const numerics::TimeGrid& grid, const numerics::PropagateOptions& opts) {
    if (p0.size() != rates.size()) throw DomainError("initial populations have wrong dimension");
    if ((p0.array() < -1e-12).any() || std::abs(p0.sum() - 1.0) > 1e-10)
        throw DomainError("initial populations are not a probability vector");
    grid.validate();
    PopulationTrajectory tr;
    tr.grid = grid;
    tr.p = numerics::propagate(rates.gamma, p0, grid, opts);
    return tr;
}

Ergodicity ergodicity(const generators::RateMatrix& rates) {
    Ergodicity e;
    const double thr = 1e-14 * std::max(1e-300, rates.rates().cwiseAbs().maxCoeff());
    e.component = scc(rates.gamma, thr, e.components);
    std::vector<bool> has_exit(static_cast<std::size_t>(e.components), false);
    for (int m = 0; m < rates.size(); ++m)
        for (int n = 0; n < rates.size(); ++n)
            if (n != m && rates.gamma(n, m) > thr && e.component[static_cast<std::size_t>(n)] != e.component[static_cast<std::size_t>(m)])
                has_exit[static_cast<std::size_t>(e.component[static_cast<std::size_t>(m)])] = true;
    e.closed_classes = static_cast<int>(std::count(has_exit.begin(), has_exit.end(), false));
    e.ergodic = e.components == 1;
    return e;
}

Eigen::VectorXd gibbs_populations(const Eigen::VectorXd& energies, double beta) {
    const double e0 = energies.minCoeff();
    Eigen::VectorXd p = (-beta * (energies.array() - e0)).exp().matrix();
    return p / p.sum();
}

SteadyState steady_populations(const model::PointerModel& model, const generators::RateMatrix& rates) {
    if (!model.simple) throw DomainError("steady populations need one-dimensional blocks");
    if (rates.size() != model.blocks()) throw DomainError("rate matrix does not match the model");
    const auto erg = ergodicity(rates);
    if (!erg.ergodic)
        throw NonErgodicError("rate graph has " + std::to_string(erg.components) + " strongly connected components (" +
                                  std::to_string(erg.closed_classes) + " closed)",
                              erg.closed_classes);
    SteadyState s;
    s.closed_form = gibbs_populations(model.eps_bar, model.beta);
    s.null_space = rates.size() == 1 ? Eigen::VectorXd::Ones(1) : numerics::steady_null_space(rates.gamma);
    s.discrepancy = (s.closed_form - s.null_space).cwiseAbs().maxCoeff();
    return s;
}

Eigen::MatrixXcd mean_force_gibbs_limit(const model::PointerModel& model) {
    const Eigen::MatrixXcd H = model.block_diagonal_hamiltonian();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    const Eigen::VectorXd p = gibbs_populations(es.eigenvalues(), model.beta);
    Eigen::MatrixXcd rho = es.eigenvectors() * p.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
    // exact zeros outside the blocks
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
    for (int n = 0; n < model.blocks(); ++n) {
        const int o = model.block_offset[static_cast<std::size_t>(n)], d = model.block_size[static_cast<std::size_t>(n)];
        out.block(o, o, d, d) = rho.block(o, o, d, d);
    }
    return 0.5 * (out + out.adjoint());
}

BlockTrajectory evolve_blocks(const generators::BlockGenerator& gen, const Eigen::MatrixXcd& rho0,
                              const numerics::TimeGrid& grid, const numerics::PropagateOptions& opts) {
    const int N = gen.dim;
    if (rho0.rows() != N || rho0.cols() != N) throw DomainError("initial state has wrong dimension");
    grid.validate();
    const auto idx = block_indices(gen);
    {
        Eigen::MatrixXcd off = rho0;
        for (auto k : idx) off(k % N, k / N) = 0.0;
        if (off.cwiseAbs().maxCoeff() > 1e-12) throw DomainError("initial state is not block-diagonal");
    }
    const auto k = static_cast<Eigen::Index>(idx.size());
    Eigen::VectorXcd y0(k);
    for (Eigen::Index i = 0; i < k; ++i) y0(i) = rho0(idx[static_cast<std::size_t>(i)] % N, idx[static_cast<std::size_t>(i)] / N);

    std::vector<std::pair<double, Eigen::MatrixXcd>> groups;
    for (auto& [w, L] : gen.phase_groups()) groups.emplace_back(w, restrict(L, idx));
    const bool constant = groups.size() == 1 && std::abs(groups.front().first) <= 1e-9;

    std::vector<Eigen::VectorXcd> ys;
    if (constant) {
        ys = numerics::propagate(groups.front().second, y0, grid, opts);
    } else {
        // RK4 stages sample the phases at the step midpoints
        numerics::PropagateOptions o = opts;
        double wmax = 0.0, lnorm = 0.0;
        for (const auto& [w, L] : groups) {
            wmax = std::max(wmax, std::abs(w));
            lnorm += numerics::operator_norm(L);
        }
        o.max_step = std::min(opts.max_step, 0.05 / std::max({wmax, lnorm, 1e-300}));
        numerics::ComplexRhs rhs = [&groups](double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
            dy.setZero(y.size());
            for (const auto& [w, L] : groups) dy.noalias() += std::exp(cplx(0.0, w * t)) * (L * y);
        };
        ys = numerics::propagate(rhs, y0, grid, o);
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gen.hbar);
    BlockTrajectory tr;
    tr.grid = grid;
    tr.rho.reserve(ys.size());
    for (std::size_t s = 0; s < ys.size(); ++s) {
        Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(N, N);
        for (Eigen::Index i = 0; i < k; ++i) r(idx[static_cast<std::size_t>(i)] % N, idx[static_cast<std::size_t>(i)] / N) = ys[s](i);
        const double t = grid.nodes[s];
        const Eigen::MatrixXcd U =
            es.eigenvectors() * (es.eigenvalues().cast<cplx>() * cplx(0.0, -t)).array().exp().matrix().asDiagonal() *
            es.eigenvectors().adjoint();
        tr.rho.push_back(U * r * U.adjoint());
    }
    return tr;
}

double stationarity_residual(const generators::BlockGenerator& gen, const Eigen::MatrixXcd& rho) {
    Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(gen.dim * gen.dim, gen.dim * gen.dim);
    for (const auto& [w, Lw] : gen.phase_groups())
        if (std::abs(w) <= 1e-9) L += Lw;
    const double norm = numerics::operator_norm(L);
    if (norm == 0.0) return 0.0;
    return numerics::trace_norm(numerics::unvec(L * numerics::vec(rho), gen.dim)) / norm;
}

double relaxation_time(const generators::RateMatrix& rates) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(rates.gamma, false);
    const double scale = std::max(1e-300, rates.gamma.cwiseAbs().maxCoeff());
    double lo = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double r = std::abs(es.eigenvalues()(i).real());
        if (r > 1e-10 * scale) lo = std::min(lo, r);
    }
    return std::isfinite(lo) ? 1.0 / (2.0 * lo) : std::numeric_limits<double>::infinity();
}

double relaxation_time(const generators::BlockGenerator& gen) {
    Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(gen.dim * gen.dim, gen.dim * gen.dim);
    for (const auto& [w, Lw] : gen.phase_groups())
        if (std::abs(w) <= 1e-9) L += Lw;
    const Eigen::MatrixXcd R = restrict(L, block_indices(gen));
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(R, false);
    const double scale = std::max(1e-300, R.cwiseAbs().maxCoeff());
    double lo = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double r = std::abs(es.eigenvalues()(i).real());
        if (r > 1e-10 * scale) lo = std::min(lo, r);
    }
    return std::isfinite(lo) ? 1.0 / (2.0 * lo) : std::numeric_limits<double>::infinity();
}

double characteristic_time(const generators::RateMatrix& rates) { return 2.0 * relaxation_time(rates); }
double characteristic_time(const generators::BlockGenerator& gen) { return 2.0 * relaxation_time(gen); }

double relative_entropy(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p(i) > 0.0) s += p(i) * std::log(p(i) / q(i));
    return s;
}

} // namespace strongdecoh::dynamics
