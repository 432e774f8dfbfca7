// heom.cpp — Scaled high-temperature hierarchy, multi-index bookkeeping and depth convergence

#include "strongdecoh/heom.hpp"

#include <cmath>
#include <functional>
#include <map>

#include "strongdecoh/errors.hpp"

namespace strongdecoh::heom {

namespace {

struct Hierarchy {
    std::vector<std::vector<int>> index;    // multi-index per auxiliary
    std::vector<std::vector<int>> up, down; // neighbour auxiliary per bath, -1 if absent
    std::vector<double> decay;              // sum_k n_k Omega_k
};

Hierarchy build(int K, int depth, const std::vector<double>& omega) {
    Hierarchy h;
    std::map<std::vector<int>, int> pos;
    std::vector<int> cur(static_cast<std::size_t>(K), 0);
    // enumerate by total order so that tier 0 comes first
    for (int tier = 0; tier <= depth; ++tier) {
        std::function<void(int, int)> rec = [&](int k, int left) {
            if (k == K - 1) {
                cur[static_cast<std::size_t>(k)] = left;
                pos[cur] = static_cast<int>(h.index.size());
                h.index.push_back(cur);
                return;
            }
            for (int v = left; v >= 0; --v) {
                cur[static_cast<std::size_t>(k)] = v;
                rec(k + 1, left - v);
            }
        };
        rec(0, tier);
    }
    const std::size_t A = h.index.size();
    h.up.assign(A, std::vector<int>(static_cast<std::size_t>(K), -1));
    h.down.assign(A, std::vector<int>(static_cast<std::size_t>(K), -1));
    h.decay.assign(A, 0.0);
    for (std::size_t a = 0; a < A; ++a) {
        auto v = h.index[a];
        for (int k = 0; k < K; ++k) {
            const auto uk = static_cast<std::size_t>(k);
            h.decay[a] += v[uk] * omega[uk];
            v[uk] += 1;
            if (auto it = pos.find(v); it != pos.end()) h.up[a][uk] = it->second;
            v[uk] -= 2;
            if (v[uk] >= 0)
                if (auto it = pos.find(v); it != pos.end()) h.down[a][uk] = it->second;
            v[uk] += 1;
        }
    }
    return h;
}

} // namespace

void HierarchySpec::validate() const {
    system.validate();
    if (depth < 1) throw ConfigError("hierarchy depth must be >= 1");
    const auto& J = system.bath.spectral;
    if (J.size() > 3) throw ConfigError("the hierarchy supports at most 3 baths");
    if (!J.is_diagonal()) throw ConfigError("the hierarchy needs independent baths (diagonal spectral density matrix)");
    for (int a = 0; a < J.size(); ++a)
        if (!J.entry_zero(a, a) && !std::holds_alternative<bath::DrudeLorentz>(J.form(a, a)))
            throw ConfigError("the hierarchy needs Drude-Lorentz spectral densities");
}

int hierarchy_size(int baths, int depth) {
    // binomial(depth + baths, baths)
    double c = 1.0;
    for (int i = 1; i <= baths; ++i) c = c * (depth + i) / i;
    return static_cast<int>(std::llround(c));
}

HeomResult heom_evolve(const HierarchySpec& spec, const Eigen::MatrixXcd& rho0, const numerics::TimeGrid& grid,
                       const HeomOptions& opts) {
    spec.validate();
    grid.validate();
    const int N = spec.system.dimension();
    const int K = spec.baths();
    if (rho0.rows() != N || rho0.cols() != N) throw DomainError("initial state has wrong dimension");

    HeomResult res;
    std::vector<double> omega(static_cast<std::size_t>(K), 0.0);
    std::vector<cplx> c(static_cast<std::size_t>(K), 0.0);
    const double beta = spec.system.bath.beta;
    for (int k = 0; k < K; ++k) {
        const auto& f = spec.system.bath.spectral.form(k, k);
        if (const auto* d = std::get_if<bath::DrudeLorentz>(&f)) {
            omega[static_cast<std::size_t>(k)] = d->cutoff;
            c[static_cast<std::size_t>(k)] = d->eta * d->cutoff * cplx(2.0 / (beta * d->cutoff), -1.0);
            if (d->eta != 0.0 && !(beta * d->cutoff < 1.0))
                res.warnings.push_back("bath " + std::to_string(k) + ": beta*Omega = " +
                                       std::to_string(beta * d->cutoff) + " >= 1, high-temperature hierarchy is inaccurate");
        }
    }
    const Hierarchy h = build(K, spec.depth, omega);
    const auto A = static_cast<Eigen::Index>(h.index.size());
    const Eigen::Index NN = static_cast<Eigen::Index>(N) * N;
    res.depth = spec.depth;
    res.auxiliaries = static_cast<int>(A);

    const Eigen::MatrixXcd H = spec.system.hamiltonian;
    const auto& Aops = spec.system.couplings;
    std::vector<double> sq(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) sq[static_cast<std::size_t>(k)] = std::sqrt(std::abs(c[static_cast<std::size_t>(k)]));
    const cplx I(0.0, 1.0);

    numerics::ComplexRhs rhs = [&](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        dy.resize(y.size());
        for (Eigen::Index a = 0; a < A; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            Eigen::Map<const Eigen::MatrixXcd> s(y.data() + a * NN, N, N);
            Eigen::Map<Eigen::MatrixXcd> ds(dy.data() + a * NN, N, N);
            ds.noalias() = -I * (H * s);
            ds.noalias() += I * (s * H);
            ds -= h.decay[ua] * s;
            for (int k = 0; k < K; ++k) {
                const auto uk = static_cast<std::size_t>(k);
                if (c[uk] == 0.0) continue;
                const auto& Ak = Aops[uk];
                const int nk = h.index[ua][uk];
                if (const int u = h.up[ua][uk]; u >= 0) {
                    Eigen::Map<const Eigen::MatrixXcd> su(y.data() + static_cast<Eigen::Index>(u) * NN, N, N);
                    const double f = std::sqrt(static_cast<double>(nk + 1)) * sq[uk];
                    ds.noalias() -= (I * f) * (Ak * su);
                    ds.noalias() += (I * f) * (su * Ak);
                }
                if (const int d = h.down[ua][uk]; d >= 0) {
                    Eigen::Map<const Eigen::MatrixXcd> sd(y.data() + static_cast<Eigen::Index>(d) * NN, N, N);
                    const double f = std::sqrt(static_cast<double>(nk)) / sq[uk];
                    ds.noalias() -= (I * f * c[uk]) * (Ak * sd);
                    ds.noalias() += (I * f * std::conj(c[uk])) * (sd * Ak);
                }
            }
        }
    };

    Eigen::VectorXcd y0 = Eigen::VectorXcd::Zero(A * NN);
    y0.head(NN) = numerics::vec(rho0);
    numerics::PropagateOptions po;
    po.stepper = numerics::Stepper::dopri5;
    po.tolerance = opts.tolerance;
    po.max_step = opts.max_step;
    const auto ys = numerics::propagate(rhs, y0, grid, po);
    res.grid = grid;
    res.rho.reserve(ys.size());
    const cplx tr0 = rho0.trace();
    for (const auto& y : ys) {
        Eigen::MatrixXcd r = numerics::unvec(y.head(NN), N);
        res.max_trace_error = std::max(res.max_trace_error, std::abs(r.trace() - tr0));
        res.max_hermiticity_error = std::max(res.max_hermiticity_error, (r - r.adjoint()).cwiseAbs().maxCoeff());
        res.rho.push_back(std::move(r));
    }
    return res;
}

ConvergenceReport heom_converged(const model::SystemSpec& system, const Eigen::MatrixXcd& rho0,
                                 const numerics::TimeGrid& grid, const std::vector<int>& depths, double tolerance,
                                 const HeomOptions& opts) {
    if (depths.size() < 2) throw ConfigError("convergence check needs at least two depths");
    for (std::size_t i = 1; i < depths.size(); ++i)
        if (depths[i] <= depths[i - 1]) throw ConfigError("depths must be strictly increasing");
    ConvergenceReport rep;
    rep.depths = depths;
    std::vector<HeomResult> runs;
    for (std::size_t i = 0; i < depths.size(); ++i) {
        runs.push_back(heom_evolve(HierarchySpec{system, depths[i]}, rho0, grid, opts));
        if (i == 0) continue;
        double diff = 0.0;
        for (std::size_t s = 0; s < grid.size(); ++s)
            diff = std::max(diff, (runs[i].rho[s] - runs[i - 1].rho[s]).cwiseAbs().maxCoeff());
        rep.differences.push_back(diff);
        if (diff <= tolerance) {
            rep.depth = depths[i - 1];
            rep.converged = true;
            rep.trajectory = std::move(runs[i - 1]);
            return rep;
        }
        // keep only the last run in memory
        runs[i - 1] = HeomResult{};
    }
    rep.depth = depths.back();
    rep.converged = false;
    rep.trajectory = std::move(runs.back());
    rep.trajectory.warnings.push_back("no depth converged within " + std::to_string(tolerance));
    return rep;
}

} // namespace strongdecoh::heom
