// model.cpp — Joint diagonalization of couplings, block decomposition and renormalized block Hamiltonians

#include "strongdecoh/model.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "strongdecoh/errors.hpp"

namespace strongdecoh::model {

namespace {

double hermiticity_defect(const Eigen::MatrixXcd& X) { return (X - X.adjoint()).cwiseAbs().maxCoeff(); }

// global phase: largest-magnitude component (first on ties) made real positive
void fix_phase(Eigen::Ref<Eigen::VectorXcd> v) {
    Eigen::Index k = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v(i));
        if (a > best * (1.0 + 1e-10) + 1e-14) {
            best = a;
            k = i;
        }
    }
    if (best > 0.0) v *= std::conj(v(k)) / std::abs(v(k));
}

// split the span of Q (N x d) into eigenspaces of Q^+ A Q, eigenvalues clustered within tol
std::vector<Eigen::MatrixXcd> split_subspace(const Eigen::MatrixXcd& Q, const Eigen::MatrixXcd& A, double tol) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Q.adjoint() * A * Q);
    if (es.info() != Eigen::Success) throw NumericalError("eigen-decomposition of a coupling operator failed");
    const auto& ev = es.eigenvalues();
    std::vector<Eigen::MatrixXcd> out;
    Eigen::Index start = 0;
    for (Eigen::Index i = 1; i <= ev.size(); ++i) {
        if (i == ev.size() || ev(i) - ev(i - 1) > tol) {
            out.push_back(Q * es.eigenvectors().middleCols(start, i - start));
            start = i;
        }
    }
    return out;
}

void check_partition(const std::vector<Eigen::MatrixXcd>& P, int N) {
    if (P.empty()) throw ModelError("partition has no blocks");
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(N, N);
    for (std::size_t n = 0; n < P.size(); ++n) {
        if (P[n].rows() != N || P[n].cols() != N) throw ModelError("projector " + std::to_string(n) + " has wrong shape");
        if (hermiticity_defect(P[n]) > 1e-10) throw ModelError("projector " + std::to_string(n) + " not Hermitian");
        if ((P[n] * P[n] - P[n]).cwiseAbs().maxCoeff() > 1e-10)
            throw ModelError("projector " + std::to_string(n) + " not idempotent");
        if (std::abs(P[n].trace()) < 0.5) throw ModelError("block " + std::to_string(n) + " is empty");
        for (std::size_t m = 0; m < n; ++m)
            if ((P[n] * P[m]).cwiseAbs().maxCoeff() > 1e-10)
                throw ModelError("projectors " + std::to_string(m) + " and " + std::to_string(n) + " not orthogonal");
        sum += P[n];
    }
    if ((sum - Eigen::MatrixXcd::Identity(N, N)).cwiseAbs().maxCoeff() > 1e-10)
        throw ModelError("projectors do not sum to the identity");
}

// lexicographic descending order of theta columns
bool theta_greater(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a(i) > b(i) + 1e-12) return true;
        if (a(i) < b(i) - 1e-12) return false;
    }
    return false;
}

double coupling_scale(const SystemSpec& spec) {
    double s = 0.0;
    for (const auto& A : spec.couplings) s = std::max(s, numerics::operator_norm(A));
    return std::max(s, 1.0);
}

// fills everything downstream of the pointer basis, block layout and theta
PointerModel assemble(const SystemSpec& spec, Eigen::MatrixXcd U, std::vector<int> sizes, Eigen::MatrixXd theta,
                      const numerics::QuadratureSpec& quad) {
    PointerModel pm;
    const int N = spec.dimension();
    const int M = spec.channels();
    const int B = static_cast<int>(sizes.size());
    pm.basis = std::move(U);
    pm.block_size = std::move(sizes);
    pm.block_offset.resize(B);
    for (int n = 0, off = 0; n < B; ++n) {
        pm.block_offset[n] = off;
        off += pm.block_size[n];
    }
    pm.theta = std::move(theta);
    pm.beta = spec.bath.beta;
    pm.bath_relaxation_rate = spec.bath.spectral.min_scale();
    pm.reorganization = bath::reorganization_matrix(spec.bath.spectral, quad);

    pm.delta_eps.resize(B);
    for (int n = 0; n < B; ++n)
        pm.delta_eps(n) = PointerModel::contract(pm.theta.col(n), pm.theta.col(n), pm.reorganization).real();

    pm.hamiltonian = pm.to_pointer(spec.hamiltonian);
    if (spec.counter_term)
        for (int n = 0; n < B; ++n) pm.hamiltonian += pm.delta_eps(n) * pm.projector(n);

    pm.couplings.reserve(M);
    pm.delta_a.reserve(M);
    for (int a = 0; a < M; ++a) {
        Eigen::MatrixXcd Ap = pm.to_pointer(spec.couplings[static_cast<std::size_t>(a)]);
        Eigen::MatrixXcd dA = Ap;
        for (int n = 0; n < B; ++n) dA -= pm.theta(a, n) * pm.projector(n);
        pm.couplings.push_back(Ap);
        pm.delta_a.push_back(dA);
    }

    pm.V = pm.hamiltonian;
    for (int n = 0; n < B; ++n) {
        const int o = pm.block_offset[n], d = pm.block_size[n];
        pm.V.block(o, o, d, d).setZero();
    }

    pm.offblock_coupling_norm = 0.0;
    for (int a = 0; a < M; ++a)
        for (int n = 0; n < B; ++n)
            for (int m = 0; m < B; ++m) {
                if (n == m) continue;
                const auto blk = pm.couplings[static_cast<std::size_t>(a)].block(
                    pm.block_offset[n], pm.block_offset[m], pm.block_size[n], pm.block_size[m]);
                pm.offblock_coupling_norm = std::max(pm.offblock_coupling_norm, numerics::operator_norm(Eigen::MatrixXcd(blk)));
            }

    // delta_eps_an + delta_eps_na = sum_b theta_bn (delta_eps_ab + delta_eps_ba)
    const Eigen::MatrixXd sym = (pm.reorganization + pm.reorganization.transpose()).real();
    pm.block_hamiltonians.resize(B);
    pm.residual_norm.assign(B, 0.0);
    pm.eps.resize(B);
    pm.eps_bar.resize(B);
    for (int n = 0; n < B; ++n) {
        const int o = pm.block_offset[n], d = pm.block_size[n];
        Eigen::MatrixXcd h = pm.hamiltonian.block(o, o, d, d);
        pm.eps(n) = h.trace().real() / d;
        h -= pm.delta_eps(n) * Eigen::MatrixXcd::Identity(d, d);
        const Eigen::VectorXd shift = sym * pm.theta.col(n);
        for (int a = 0; a < M; ++a) {
            const Eigen::MatrixXcd dA = pm.delta_a[static_cast<std::size_t>(a)].block(o, o, d, d);
            pm.residual_norm[n] = std::max(pm.residual_norm[n], numerics::operator_norm(dA));
            h -= shift(a) * dA;
        }
        h = 0.5 * (h + h.adjoint());
        pm.block_hamiltonians[n] = h;
        pm.eps_bar(n) = h.trace().real() / d;
    }
    // one-dimensional blocks that also diagonalize every coupling
    double a_scale = 1.0;
    for (const auto& A : pm.couplings) a_scale = std::max(a_scale, A.cwiseAbs().maxCoeff());
    pm.simple = std::all_of(pm.block_size.begin(), pm.block_size.end(), [](int d) { return d == 1; }) &&
                pm.offblock_coupling_norm <= 1e-10 * a_scale;
    (void)N;
    return pm;
}

} // namespace

void SystemSpec::validate() const {
    const int N = dimension();
    if (N < 1 || hamiltonian.cols() != N) throw ConfigError("Hamiltonian must be a non-empty square matrix");
    const double hs = std::max(1.0, hamiltonian.cwiseAbs().maxCoeff());
    if (hermiticity_defect(hamiltonian) > 1e-12 * hs) throw ConfigError("Hamiltonian is not Hermitian");
    if (couplings.empty()) throw ConfigError("at least one coupling operator is required");
    for (std::size_t a = 0; a < couplings.size(); ++a) {
        const auto& A = couplings[a];
        if (A.rows() != N || A.cols() != N)
            throw ConfigError("coupling operator " + std::to_string(a) + " has wrong dimension");
        if (hermiticity_defect(A) > 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff()))
            throw ConfigError("coupling operator " + std::to_string(a) + " is not Hermitian");
    }
    if (bath.spectral.size() != channels())
        throw ConfigError("number of coupling operators (" + std::to_string(channels()) +
                          ") differs from the spectral density dimension (" + std::to_string(bath.spectral.size()) + ")");
    bath.validate();
}

cplx PointerModel::J(int n, int m) const {
    if (block_size[static_cast<std::size_t>(n)] != 1 || block_size[static_cast<std::size_t>(m)] != 1)
        throw DomainError("J_nm is defined between one-dimensional blocks only");
    return hamiltonian(block_offset[static_cast<std::size_t>(n)], block_offset[static_cast<std::size_t>(m)]);
}

Eigen::MatrixXcd PointerModel::projector(int n) const {
    Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(size(), size());
    const int o = block_offset[static_cast<std::size_t>(n)], d = block_size[static_cast<std::size_t>(n)];
    P.block(o, o, d, d).setIdentity();
    return P;
}

Eigen::MatrixXcd PointerModel::block_diagonal_hamiltonian() const {
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(size(), size());
    for (int n = 0; n < blocks(); ++n) {
        const int o = block_offset[static_cast<std::size_t>(n)], d = block_size[static_cast<std::size_t>(n)];
        H.block(o, o, d, d) = block_hamiltonians[static_cast<std::size_t>(n)];
    }
    return H;
}

cplx PointerModel::contract(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const Eigen::MatrixXcd& X) {
    return (u.cast<cplx>().transpose() * X * v.cast<cplx>())(0, 0);
}

PointerModel build_pointer_model_simple(const SystemSpec& spec, const numerics::QuadratureSpec& quad) {
    spec.validate();
    const int N = spec.dimension();
    const int M = spec.channels();
    const double scale = coupling_scale(spec);

    for (int a = 0; a < M; ++a)
        for (int b = a + 1; b < M; ++b) {
            const auto& A = spec.couplings[static_cast<std::size_t>(a)];
            const auto& Bm = spec.couplings[static_cast<std::size_t>(b)];
            const double c = (A * Bm - Bm * A).cwiseAbs().maxCoeff();
            if (c > 1e-10 * scale * scale)
                throw ModelError("coupling operators " + std::to_string(a) + " and " + std::to_string(b) +
                                 " do not commute (defect " + std::to_string(c) + ")");
        }

    // random real combination, then refinement inside degenerate eigenspaces
    std::mt19937_64 rng(20231017ULL);
    std::uniform_real_distribution<double> U(0.5, 1.5);
    Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(N, N);
    for (int a = 0; a < M; ++a) K += U(rng) * spec.couplings[static_cast<std::size_t>(a)];
    const double tol = 1e-8 * scale;
    std::vector<Eigen::MatrixXcd> spaces = split_subspace(Eigen::MatrixXcd::Identity(N, N), K, tol);
    for (int a = 0; a < M; ++a) {
        std::vector<Eigen::MatrixXcd> next;
        for (const auto& Q : spaces) {
            if (Q.cols() == 1) {
                next.push_back(Q);
                continue;
            }
            for (auto& S : split_subspace(Q, spec.couplings[static_cast<std::size_t>(a)], tol)) next.push_back(S);
        }
        spaces = std::move(next);
    }

    std::vector<Eigen::VectorXcd> vecs;
    for (const auto& Q : spaces) {
        if (Q.cols() > 1) {
            Eigen::VectorXd th(M);
            for (int a = 0; a < M; ++a)
                th(a) = (Q.col(0).adjoint() * spec.couplings[static_cast<std::size_t>(a)] * Q.col(0))(0, 0).real();
            if (th.cwiseAbs().maxCoeff() <= 1e-12 * scale)
                throw ModelError("condition (i) violated: a " + std::to_string(Q.cols()) +
                                 "-dimensional subspace does not interact with the bath");
            int alpha = 0;
            th.cwiseAbs().maxCoeff(&alpha);
            throw ModelError("condition (ii) violated: nonzero eigenvalue " + std::to_string(th(alpha)) +
                             " of coupling operator " + std::to_string(alpha) + " is degenerate");
        }
        vecs.push_back(Q.col(0));
    }

    Eigen::MatrixXd theta(M, N);
    for (int k = 0; k < N; ++k)
        for (int a = 0; a < M; ++a)
            theta(a, k) = (vecs[static_cast<std::size_t>(k)].adjoint() * spec.couplings[static_cast<std::size_t>(a)] *
                           vecs[static_cast<std::size_t>(k)])(0, 0)
                              .real();

    std::vector<int> order(static_cast<std::size_t>(N));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return theta_greater(theta.col(i), theta.col(j)); });

    Eigen::MatrixXcd basis(N, N);
    Eigen::MatrixXd th_sorted(M, N);
    for (int k = 0; k < N; ++k) {
        basis.col(k) = vecs[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
        fix_phase(basis.col(k));
        th_sorted.col(k) = theta.col(order[static_cast<std::size_t>(k)]);
    }

    for (int n = 0; n < N; ++n) {
        if (th_sorted.col(n).cwiseAbs().maxCoeff() <= 1e-12 * scale)
            throw ModelError("condition (i) violated: pointer state " + std::to_string(n) +
                             " does not interact with the bath");
        for (int a = 0; a < M; ++a)
            for (int m = n + 1; m < N; ++m)
                if (std::abs(th_sorted(a, n) - th_sorted(a, m)) <= 1e-12 * scale &&
                    std::abs(th_sorted(a, n)) > 1e-12 * scale)
                    throw ModelError("condition (ii) violated: pointer states " + std::to_string(n) + " and " +
                                     std::to_string(m) + " share the nonzero eigenvalue " +
                                     std::to_string(th_sorted(a, n)) + " of coupling operator " + std::to_string(a));
    }

    return assemble(spec, basis, std::vector<int>(static_cast<std::size_t>(N), 1), th_sorted, quad);
}

PointerModel build_pointer_model_general(const SystemSpec& spec, const Partition& partition,
                                         const numerics::QuadratureSpec& quad) {
    spec.validate();
    const int N = spec.dimension();
    const int M = spec.channels();

    std::vector<Eigen::MatrixXcd> isometries;
    if (const auto* ex = std::get_if<ExplicitPartition>(&partition)) {
        check_partition(ex->projectors, N);
        for (const auto& P : ex->projectors) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (P + P.adjoint()));
            std::vector<Eigen::Index> cols;
            for (Eigen::Index i = 0; i < N; ++i)
                if (es.eigenvalues()(i) > 0.5) cols.push_back(i);
            Eigen::MatrixXcd Q(N, static_cast<Eigen::Index>(cols.size()));
            for (std::size_t i = 0; i < cols.size(); ++i) Q.col(static_cast<Eigen::Index>(i)) = es.eigenvectors().col(cols[i]);
            isometries.push_back(Q);
        }
    } else {
        const double thr = std::get<AutoPartition>(partition).threshold;
        if (!(thr >= 0.0)) throw ConfigError("clustering threshold must be nonnegative");
        std::mt19937_64 rng(20231017ULL);
        std::uniform_real_distribution<double> U(0.5, 1.5);
        Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(N, N);
        for (int a = 0; a < M; ++a) K += U(rng) * spec.couplings[static_cast<std::size_t>(a)];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(K);
        if (es.info() != Eigen::Success) throw NumericalError("eigen-decomposition of the coupling combination failed");
        const Eigen::MatrixXcd& W = es.eigenvectors();
        Eigen::MatrixXd th(M, N);
        for (int k = 0; k < N; ++k)
            for (int a = 0; a < M; ++a)
                th(a, k) = (W.col(k).adjoint() * spec.couplings[static_cast<std::size_t>(a)] * W.col(k))(0, 0).real();
        // single-linkage clustering in the max norm
        std::vector<int> label(static_cast<std::size_t>(N));
        std::iota(label.begin(), label.end(), 0);
        auto find = [&](int i) {
            while (label[static_cast<std::size_t>(i)] != i) i = label[static_cast<std::size_t>(i)];
            return i;
        };
        for (int i = 0; i < N; ++i)
            for (int j = i + 1; j < N; ++j)
                if ((th.col(i) - th.col(j)).cwiseAbs().maxCoeff() < thr) label[static_cast<std::size_t>(find(j))] = find(i);
        std::vector<std::vector<int>> groups;
        std::vector<int> root_to_group(static_cast<std::size_t>(N), -1);
        for (int k = 0; k < N; ++k) {
            const int r = find(k);
            if (root_to_group[static_cast<std::size_t>(r)] < 0) {
                root_to_group[static_cast<std::size_t>(r)] = static_cast<int>(groups.size());
                groups.emplace_back();
            }
            groups[static_cast<std::size_t>(root_to_group[static_cast<std::size_t>(r)])].push_back(k);
        }
        for (const auto& g : groups) {
            Eigen::MatrixXcd Q(N, static_cast<Eigen::Index>(g.size()));
            for (std::size_t i = 0; i < g.size(); ++i) Q.col(static_cast<Eigen::Index>(i)) = W.col(g[i]);
            isometries.push_back(Q);
        }
    }

    const int B = static_cast<int>(isometries.size());
    Eigen::MatrixXd theta(M, B);
    for (int n = 0; n < B; ++n) {
        const auto& Q = isometries[static_cast<std::size_t>(n)];
        for (int a = 0; a < M; ++a)
            theta(a, n) = (Q.adjoint() * spec.couplings[static_cast<std::size_t>(a)] * Q).trace().real() /
                          static_cast<double>(Q.cols());
    }
    std::vector<int> order(static_cast<std::size_t>(B));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return theta_greater(theta.col(i), theta.col(j)); });

    Eigen::MatrixXcd basis(N, N);
    Eigen::MatrixXd th_sorted(M, B);
    std::vector<int> sizes;
    int col = 0;
    for (int k = 0; k < B; ++k) {
        const auto& Q = isometries[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
        // inside a block: eigenbasis of the projected Hamiltonian, ascending
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Q.adjoint() * spec.hamiltonian * Q);
        Eigen::MatrixXcd Qb = Q * es.eigenvectors();
        for (Eigen::Index i = 0; i < Qb.cols(); ++i) {
            basis.col(col) = Qb.col(i);
            fix_phase(basis.col(col));
            ++col;
        }
        sizes.push_back(static_cast<int>(Q.cols()));
        th_sorted.col(k) = theta.col(order[static_cast<std::size_t>(k)]);
    }
    return assemble(spec, basis, sizes, th_sorted, quad);
}

Eigen::MatrixXcd reassemble_hamiltonian(const PointerModel& pm) {
    const Eigen::MatrixXd sym = (pm.reorganization + pm.reorganization.transpose()).real();
    Eigen::MatrixXcd H = pm.V;
    for (int n = 0; n < pm.blocks(); ++n) {
        const int o = pm.block_offset[static_cast<std::size_t>(n)], d = pm.block_size[static_cast<std::size_t>(n)];
        Eigen::MatrixXcd h = pm.block_hamiltonians[static_cast<std::size_t>(n)] +
                             pm.delta_eps(n) * Eigen::MatrixXcd::Identity(d, d);
        const Eigen::VectorXd shift = sym * pm.theta.col(n);
        for (int a = 0; a < pm.channels(); ++a) h += shift(a) * pm.delta_a[static_cast<std::size_t>(a)].block(o, o, d, d);
        H.block(o, o, d, d) += h;
    }
    return H;
}

Eigen::MatrixXcd reassemble_coupling(const PointerModel& pm, int alpha) {
    Eigen::MatrixXcd A = pm.delta_a[static_cast<std::size_t>(alpha)];
    for (int n = 0; n < pm.blocks(); ++n) A += pm.theta(alpha, n) * pm.projector(n);
    return A;
}

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::warn: return "warn";
    case Verdict::hard_warn: return "hard_warn";
    }
    return "unknown";
}

ValidityReport validity_report(const PointerModel& pm, const Eigen::MatrixXd& gamma, const Eigen::MatrixXd& decoherence) {
    const int B = pm.blocks();
    if (gamma.rows() != B || gamma.cols() != B || decoherence.rows() != B || decoherence.cols() != B)
        throw DomainError("rate matrices do not match the number of blocks");
    ValidityReport rep;
    rep.bath_relaxation_rate = pm.bath_relaxation_rate;
    for (int n = 0; n < B; ++n)
        for (int m = 0; m < B; ++m) {
            if (n == m) continue;
            PairDiagnostic d;
            d.n = n;
            d.m = m;
            d.transition_rate = std::max(0.0, gamma(n, m));
            d.decoherence_rate = decoherence(n, m);
            const auto Vb = pm.V.block(pm.block_offset[static_cast<std::size_t>(n)], pm.block_offset[static_cast<std::size_t>(m)],
                                       pm.block_size[static_cast<std::size_t>(n)], pm.block_size[static_cast<std::size_t>(m)]);
            const bool coupled = Vb.cwiseAbs().maxCoeff() > 0.0 || d.transition_rate > 0.0;
            const double rtiny = 1e-14;
            if (d.decoherence_rate <= rtiny) {
                d.ratio_decoherence = coupled ? std::numeric_limits<double>::infinity() : 0.0;
            } else {
                d.ratio_decoherence = d.transition_rate / d.decoherence_rate;
            }
            d.ratio_bath = rep.bath_relaxation_rate > 0.0 ? d.transition_rate / rep.bath_relaxation_rate : 0.0;
            const double worst = std::max(d.ratio_decoherence, d.ratio_bath);
            d.verdict = worst < 0.1 ? Verdict::pass : (worst < 0.5 ? Verdict::warn : Verdict::hard_warn);
            rep.overall = std::max(rep.overall, d.verdict);
            rep.pairs.push_back(d);
        }
    return rep;
}

} // namespace strongdecoh::model
