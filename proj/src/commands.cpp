// commands.cpp — Scenario execution, CSV/JSON export and the comparison harness

#include "strongdecoh/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "strongdecoh/dynamics.hpp"
#include "strongdecoh/errors.hpp"
#include "strongdecoh/units.hpp"

namespace strongdecoh::commands {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using config::Method;
using config::RunConfig;
using cplx = std::complex<double>;

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

json finite_or_null(double x) {
    return std::isfinite(x) ? json(x) : json(nullptr);
}

json vector_json(const Eigen::VectorXd& v, double scale = 1.0) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i) * scale);
    return a;
}

json real_matrix_json(const Eigen::MatrixXd& M, double scale = 1.0) {
    json a = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(finite_or_null(M(i, j) * scale));
        a.push_back(row);
    }
    return a;
}

json complex_json(cplx z, double scale = 1.0) {
    return json::array({z.real() * scale, z.imag() * scale});
}

json complex_matrix_json(const Eigen::MatrixXcd& M, double scale = 1.0) {
    json a = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(complex_json(M(i, j), scale));
        a.push_back(row);
    }
    return a;
}

json header_json(const RunConfig& cfg) {
    json h;
    h["version"] = STRONGDECOH_VERSION;
    h["config"] = cfg.source;
    h["config_hash"] = cfg.hash_hex();
    h["units"] = {{"time", "fs"}, {"energy", "cm^-1"}, {"rate", "1/ps"}, {"hbar", 1}};
    h["kB_cm_per_K"] = cfg.kB_cm_per_K;
    h["temperature_K"] = cfg.temperature_K;
    h["beta_fs"] = cfg.system.bath.beta;
    h["high_temperature"] = cfg.system.bath.high_temperature;
    h["method"] = config::to_string(cfg.method);
    return h;
}

fs::path output_dir(const RunConfig& cfg, const Options& opts) {
    fs::path d = opts.out_dir.empty() ? fs::path(cfg.output.dir) : fs::path(opts.out_dir);
    std::error_code ec;
    fs::create_directories(d, ec);
    if (ec) throw ConfigError("cannot create output directory " + d.string() + ": " + ec.message());
    return d;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + p.string());
    f << text;
}

std::string populations_csv(const RunConfig& cfg, const Simulation& sim) {
    std::ostringstream os;
    os << file_header(cfg, "frame=schroedinger basis=pointer observable=populations");
    os << "t_fs";
    for (int k = 0; k < sim.model.size(); ++k) os << ",p_" << k;
    os << '\n';
    for (std::size_t s = 0; s < sim.grid.size(); ++s) {
        os << fmt(sim.grid.nodes[s]);
        for (Eigen::Index k = 0; k < sim.populations[s].size(); ++k) os << ',' << fmt(sim.populations[s](k));
        os << '\n';
    }
    return os.str();
}

std::string blocks_csv(const RunConfig& cfg, const Simulation& sim) {
    const auto& pm = sim.model;
    std::ostringstream os;
    os << file_header(cfg, "frame=schroedinger basis=pointer observable=block_entries");
    os << "t_fs";
    for (int n = 0; n < pm.blocks(); ++n)
        for (int i = 0; i < pm.block_size[static_cast<std::size_t>(n)]; ++i)
            for (int j = 0; j < pm.block_size[static_cast<std::size_t>(n)]; ++j)
                os << ",re(rho_" << n << '_' << i << j << "),im(rho_" << n << '_' << i << j << ')';
    os << '\n';
    for (std::size_t s = 0; s < sim.grid.size(); ++s) {
        os << fmt(sim.grid.nodes[s]);
        for (int n = 0; n < pm.blocks(); ++n) {
            const int o = pm.block_offset[static_cast<std::size_t>(n)], d = pm.block_size[static_cast<std::size_t>(n)];
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) os << ',' << fmt(sim.density[s](o + i, o + j).real()) << ',' << fmt(sim.density[s](o + i, o + j).imag());
        }
        os << '\n';
    }
    return os.str();
}

std::string coherences_csv(const RunConfig& cfg, const Simulation& sim, bool breakdown) {
    const int N = sim.model.size();
    std::ostringstream os;
    os << file_header(cfg, "frame=schroedinger basis=pointer observable=coherences");
    os << "t_fs,n,m,re(rho_nm),im(rho_nm),term\n";
    const char* total = sim.method == Method::heom ? "heom" : "total";
    for (std::size_t s = 0; s < sim.grid.size(); ++s) {
        const std::string t = fmt(sim.grid.nodes[s]);
        for (int n = 0; n < N; ++n)
            for (int m = n + 1; m < N; ++m) {
                auto row = [&](cplx z, const char* term) {
                    os << t << ',' << n << ',' << m << ',' << fmt(z.real()) << ',' << fmt(z.imag()) << ',' << term << '\n';
                };
                row(sim.density[s](n, m), total);
                if (breakdown && sim.coherence) {
                    const auto& T = sim.coherence->terms[s];
                    row(T.eq(n, m), "eq");
                    if (cfg.term_noneq) row(T.noneq(n, m), "noneq");
                    if (cfg.term_decoh) row(T.decoh(n, m), "decoh");
                    if (cfg.term_cohcoh) row(T.cohcoh(n, m), "cohcoh");
                }
            }
    }
    return os.str();
}

std::vector<std::pair<double, double>> trace_distances(const Simulation& sim) {
    std::vector<std::pair<double, double>> d;
    const Eigen::MatrixXcd diag0 = block_diagonal_part(sim.model, sim.density.front());
    for (const auto& r : sim.density)
        d.emplace_back(coherences::trace_distance(r, diag0), coherences::trace_distance(r, block_diagonal_part(sim.model, r)));
    return d;
}

std::string tracedist_csv(const RunConfig& cfg, const Simulation& sim) {
    std::ostringstream os;
    os << file_header(cfg, "frame=schroedinger basis=pointer observable=trace_distance");
    os << "t_fs,dist_diag0,dist_diagt\n";
    const auto d = trace_distances(sim);
    for (std::size_t s = 0; s < sim.grid.size(); ++s)
        os << fmt(sim.grid.nodes[s]) << ',' << fmt(d[s].first) << ',' << fmt(d[s].second) << '\n';
    return os.str();
}

json heom_json(const RunConfig& cfg, const heom::ConvergenceReport& rep) {
    json j = header_json(cfg);
    j["depths"] = rep.depths;
    j["differences"] = rep.differences;
    j["depth"] = rep.depth;
    j["converged"] = rep.converged;
    j["tolerance"] = cfg.tolerances.heom_convergence;
    j["auxiliaries"] = rep.trajectory.auxiliaries;
    j["max_trace_error"] = rep.trajectory.max_trace_error;
    j["max_hermiticity_error"] = rep.trajectory.max_hermiticity_error;
    j["warnings"] = rep.trajectory.warnings;
    return j;
}

struct Deviation {
    double max_abs{0.0};
    double rms{0.0};
};

template <class F>
Deviation deviation(std::size_t n, F diff, const std::vector<double>& t, double lo = -1.0,
                    double hi = std::numeric_limits<double>::infinity()) {
    Deviation d;
    std::size_t count = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (t[s] < lo || t[s] >= hi) continue;
        const double x = diff(s);
        d.max_abs = std::max(d.max_abs, x);
        d.rms += x * x;
        ++count;
    }
    d.rms = count ? std::sqrt(d.rms / static_cast<double>(count)) : 0.0;
    return d;
}

json deviation_json(const Deviation& d) {
    return {{"max_abs", d.max_abs}, {"rms", d.rms}};
}

int exit_for_verdict(const RunConfig& cfg, const Options& opts, std::ostream& err) {
    if (!opts.strict) return ok;
    const auto v = validity_verdict(cfg);
    if (v == model::Verdict::pass) return ok;
    err << "strict: validity verdict is " << model::to_string(v) << '\n';
    return validity_failure;
}

} // namespace

model::PointerModel build_model(const RunConfig& cfg) {
    const auto q = cfg.quadrature();
    switch (cfg.partition) {
    case config::PartitionKind::simple: return model::build_pointer_model_simple(cfg.system, q);
    case config::PartitionKind::automatic:
        return model::build_pointer_model_general(cfg.system, model::AutoPartition{cfg.cluster_threshold}, q);
    case config::PartitionKind::explicit_projectors:
        return model::build_pointer_model_general(cfg.system, model::ExplicitPartition{cfg.projectors}, q);
    }
    throw ConfigError("unknown partition");
}

Eigen::MatrixXcd initial_state(const RunConfig& cfg, const model::PointerModel& pm) {
    const int N = pm.size();
    const auto& in = cfg.initial;
    using K = config::InitialConfig::Kind;
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(N, N);
    switch (in.kind) {
    case K::pointer_state:
        if (in.pointer < 0 || in.pointer >= N) throw ConfigError("initial.pointer out of range");
        rho(in.pointer, in.pointer) = 1.0;
        return rho;
    case K::pointer_populations:
        if (in.populations.size() != N) throw ConfigError("initial.populations needs one entry per pointer state");
        if ((in.populations.array() < 0.0).any() || std::abs(in.populations.sum() - 1.0) > 1e-10)
            throw ConfigError("initial.populations must be nonnegative and sum to 1");
        rho.diagonal() = in.populations.cast<cplx>();
        return rho;
    case K::system_vector: {
        if (in.vector.size() != N) throw ConfigError("initial.vector has wrong dimension");
        if (std::abs(in.vector.norm() - 1.0) > 1e-8) throw ConfigError("initial.vector must be normalized");
        return pm.to_pointer(in.vector * in.vector.adjoint());
    }
    case K::system_density: {
        const auto& D = in.density;
        if (D.rows() != N || D.cols() != N) throw ConfigError("initial.density has wrong dimension");
        if ((D - D.adjoint()).cwiseAbs().maxCoeff() > 1e-10) throw ConfigError("initial.density is not Hermitian");
        if (std::abs(D.trace() - 1.0) > 1e-10) throw ConfigError("initial.density must have unit trace");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(D);
        if (es.eigenvalues().minCoeff() < -1e-10) throw ConfigError("initial.density is not positive semidefinite");
        return pm.to_pointer(D);
    }
    }
    return rho;
}

Eigen::MatrixXcd block_diagonal_part(const model::PointerModel& pm, const Eigen::MatrixXcd& rho) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
    for (int n = 0; n < pm.blocks(); ++n) {
        const int o = pm.block_offset[static_cast<std::size_t>(n)], d = pm.block_size[static_cast<std::size_t>(n)];
        out.block(o, o, d, d) = rho.block(o, o, d, d);
    }
    return out;
}

Simulation simulate(const RunConfig& cfg, bool with_density) {
    Simulation sim;
    sim.method = cfg.method;
    sim.model = build_model(cfg);
    sim.grid = cfg.grid.grid();
    const auto& pm = sim.model;
    const Eigen::MatrixXcd rho0 = initial_state(cfg, pm);
    const auto q = cfg.quadrature();

    if (cfg.method == Method::heom) {
        if (!cfg.system.bath.high_temperature)
            sim.notes.push_back("the hierarchy uses the high-temperature correlation function regardless of bath.high_temperature");
        const Eigen::MatrixXcd rho_sys = pm.to_system(rho0);
        heom::HeomOptions ho;
        ho.tolerance = cfg.tolerances.ode_tolerance;
        ho.max_step = cfg.tolerances.max_step_fs;
        if (cfg.depths.size() >= 2) {
            sim.heom = heom::heom_converged(cfg.system, rho_sys, sim.grid, cfg.depths, cfg.tolerances.heom_convergence, ho);
        } else {
            heom::ConvergenceReport rep;
            rep.depths = cfg.depths;
            rep.depth = cfg.depths.front();
            rep.trajectory = heom::heom_evolve({cfg.system, rep.depth}, rho_sys, sim.grid, ho);
            sim.heom = std::move(rep);
        }
        for (const auto& r : sim.heom->trajectory.rho) {
            Eigen::MatrixXcd rp = pm.to_pointer(r);
            sim.populations.push_back(rp.diagonal().real());
            if (with_density) sim.density.push_back(std::move(rp));
        }
        for (const auto& w : sim.heom->trajectory.warnings) sim.notes.push_back(w);
        return sim;
    }

    kernels::KernelContext ctx(pm, bath::lineshape(cfg.system.bath, q));
    if (cfg.method == Method::forster) {
        if (!pm.simple) throw ConfigError("method forster needs one-dimensional pointer blocks; use block_secular");
        const auto rates = generators::forster_rates(ctx, q);
        const Eigen::VectorXd p0 = rho0.diagonal().real();
        const auto pops = dynamics::evolve_pauli(rates, p0, sim.grid, cfg.propagate_options());
        sim.populations = pops.p;
        if (with_density) {
            coherences::TrajectoryOptions to;
            to.noneq = cfg.term_noneq;
            to.decoh = cfg.term_decoh;
            to.cohcoh = cfg.term_cohcoh;
            to.quad = q;
            sim.coherence = coherences::coherence_trajectory(ctx, rho0, pops, to);
            for (std::size_t s = 0; s < sim.grid.size(); ++s) sim.density.push_back(sim.coherence->density(s));
        }
        return sim;
    }

    const auto gen = generators::block_generator(ctx, cfg.generator_options());
    for (const auto& n : gen.notes) sim.notes.push_back(n);
    const Eigen::MatrixXcd rho_d = block_diagonal_part(pm, rho0);
    if ((rho0 - rho_d).cwiseAbs().maxCoeff() > 1e-12)
        sim.notes.push_back("initial off-block coherences dropped: block dynamics starts from the block-diagonal part");
    const auto tr = dynamics::evolve_blocks(gen, rho_d, sim.grid, cfg.propagate_options());
    for (std::size_t s = 0; s < sim.grid.size(); ++s) {
        sim.populations.push_back(tr.rho[s].diagonal().real());
        if (with_density) {
            Eigen::MatrixXcd r = tr.rho[s];
            if (pm.offblock_coupling_norm <= 1e-10) r += coherences::coherence_blocks_general(ctx, tr.rho[s], sim.grid.nodes[s], q);
            sim.density.push_back(std::move(r));
        }
    }
    if (with_density && pm.offblock_coupling_norm > 1e-10)
        sim.notes.push_back("off-block coherences omitted: coupling operators have off-diagonal blocks");
    return sim;
}

std::string file_header(const RunConfig& cfg, const std::string& extra) {
    std::ostringstream os;
    os << "# strongdecoh " << STRONGDECOH_VERSION << '\n';
    os << "# config=" << cfg.source << " config_hash=" << cfg.hash_hex() << '\n';
    os << "# units: time fs, energy cm^-1, rates 1/ps, hbar=1\n";
    os << "# kB_cm_per_K=" << fmt(cfg.kB_cm_per_K) << " temperature_K=" << fmt(cfg.temperature_K)
       << " beta_fs=" << fmt(cfg.system.bath.beta) << " high_temperature=" << (cfg.system.bath.high_temperature ? 1 : 0)
       << '\n';
    os << "# method=" << config::to_string(cfg.method);
    if (!extra.empty()) os << ' ' << extra;
    os << '\n';
    return os.str();
}

model::Verdict validity_verdict(const RunConfig& cfg) {
    const auto pm = build_model(cfg);
    if (!pm.simple) return model::Verdict::pass;
    kernels::KernelContext ctx(pm, bath::lineshape(cfg.system.bath, cfg.quadrature()));
    const auto rates = generators::forster_rates(ctx, cfg.quadrature());
    return model::validity_report(pm, rates.gamma, coherences::decoherence_rates(ctx)).overall;
}

std::string rates_report(const RunConfig& cfg) {
    const auto q = cfg.quadrature();
    const auto pm = build_model(cfg);
    kernels::KernelContext ctx(pm, bath::lineshape(cfg.system.bath, q));
    const double to_cm = 1.0 / units::kCmToRadPerFs;

    json j = header_json(cfg);
    json m;
    m["dimension"] = pm.size();
    m["blocks"] = pm.blocks();
    m["block_sizes"] = pm.block_size;
    m["simple"] = pm.simple;
    m["eps_cm"] = vector_json(pm.eps, to_cm);
    m["eps_bar_cm"] = vector_json(pm.eps_bar, to_cm);
    m["delta_eps_cm"] = vector_json(pm.delta_eps, to_cm);
    m["theta"] = real_matrix_json(pm.theta);
    m["reorganization_cm"] = complex_matrix_json(pm.reorganization, to_cm);
    m["decoherence_rates_per_ps"] = real_matrix_json(coherences::decoherence_rates(ctx), 1e3);
    j["model"] = m;

    if (pm.simple) {
        const auto rates = generators::forster_rates(ctx, q);
        json r;
        r["gamma_cm"] = real_matrix_json(rates.rates(), to_cm);
        r["gamma_per_ps"] = real_matrix_json(rates.rates(), 1e3);
        r["relaxation_time_ps"] = finite_or_null(dynamics::characteristic_time(rates) * 1e-3);
        r["grid_time_estimate_ps"] = finite_or_null(dynamics::relaxation_time(rates) * 1e-3);
        const double db = generators::detailed_balance_residual(rates, pm.eps_bar, pm.beta);
        r["detailed_balance"] = {{"residual", db}, {"tolerance", 1e-4}, {"pass", db <= 1e-4}};
        const auto erg = dynamics::ergodicity(rates);
        r["ergodicity"] = {{"ergodic", erg.ergodic}, {"components", erg.components}, {"closed_classes", erg.closed_classes},
                           {"component", erg.component}};
        if (erg.ergodic) {
            const auto ss = dynamics::steady_populations(pm, rates);
            r["steady_state"] = {{"gibbs", vector_json(ss.closed_form)},
                                 {"null_space", vector_json(ss.null_space)},
                                 {"discrepancy", ss.discrepancy}};
        } else {
            r["steady_state"] = nullptr;
        }
        const auto vr = model::validity_report(pm, rates.gamma, coherences::decoherence_rates(ctx));
        json pairs = json::array();
        for (const auto& p : vr.pairs)
            pairs.push_back({{"n", p.n},
                             {"m", p.m},
                             {"transition_rate_per_ps", p.transition_rate * 1e3},
                             {"decoherence_rate_per_ps", p.decoherence_rate * 1e3},
                             {"ratio_decoherence", finite_or_null(p.ratio_decoherence)},
                             {"ratio_bath", finite_or_null(p.ratio_bath)},
                             {"verdict", model::to_string(p.verdict)}});
        r["validity"] = {{"overall", model::to_string(vr.overall)},
                         {"bath_relaxation_rate_cm", vr.bath_relaxation_rate * to_cm},
                         {"pairs", pairs}};
        j["forster"] = r;
    } else {
        j["forster"] = nullptr;
    }

    if (cfg.method == Method::block_secular || cfg.method == Method::block_nonsecular) {
        const auto gen = generators::block_generator(ctx, cfg.generator_options());
        json g;
        g["secular"] = gen.secular;
        json terms = json::array();
        for (const auto& t : gen.terms)
            terms.push_back({{"kind", t.kind == generators::TermKind::redfield ? "redfield" : "transition"},
                             {"n", t.n},
                             {"m", t.m},
                             {"a", t.a},
                             {"b", t.b},
                             {"w_cm", t.w * to_cm},
                             {"wp_cm", t.wp * to_cm},
                             {"gamma_cm", complex_json(t.gamma, to_cm)},
                             {"shift_cm", complex_json(t.shift, to_cm)}});
        g["terms"] = terms;
        if (gen.secular) {
            g["lamb_shift_cm"] = complex_matrix_json(gen.lamb_shift(), to_cm);
            g["min_gamma_eigenvalue_cm"] = generators::min_gamma_eigenvalue(generators::secular_gamma_matrices(ctx, gen, q)) * to_cm;
            g["detailed_balance_residual"] = generators::detailed_balance_residual(gen);
            g["stationarity_residual"] = dynamics::stationarity_residual(gen, dynamics::mean_force_gibbs_limit(pm));
        }
        g["relaxation_time_ps"] = finite_or_null(dynamics::characteristic_time(gen) * 1e-3);
        g["grid_time_estimate_ps"] = finite_or_null(dynamics::relaxation_time(gen) * 1e-3);
        g["notes"] = gen.notes;
        j["generator"] = g;
    }
    return j.dump(2) + "\n";
}

std::string compare_report(const Simulation& a, const Simulation& b, const std::string& la, const std::string& lb) {
    if (a.grid.size() != b.grid.size())
        throw ConfigError("compare: time grids differ (" + std::to_string(a.grid.size()) + " vs " + std::to_string(b.grid.size()) + " nodes)");
    for (std::size_t s = 0; s < a.grid.size(); ++s)
        if (std::abs(a.grid.nodes[s] - b.grid.nodes[s]) > 1e-9 * std::max(1.0, std::abs(a.grid.nodes[s])))
            throw ConfigError("compare: time grids differ");
    if (a.model.size() != b.model.size()) throw ConfigError("compare: models have different dimensions");
    if ((a.model.basis - b.model.basis).cwiseAbs().maxCoeff() > 1e-8)
        throw ConfigError("compare: pointer bases differ");
    const auto& t = a.grid.nodes;
    const std::size_t S = t.size();
    const int N = a.model.size();

    json j;
    j["version"] = STRONGDECOH_VERSION;
    j["a"] = {{"label", la}, {"method", config::to_string(a.method)}};
    j["b"] = {{"label", lb}, {"method", config::to_string(b.method)}};
    j["t_end_fs"] = t.back();
    json obs;
    double pmax = 0.0;
    for (int k = 0; k < N; ++k) {
        const auto d = deviation(S, [&](std::size_t s) { return std::abs(a.populations[s](k) - b.populations[s](k)); }, t);
        pmax = std::max(pmax, d.max_abs);
        obs["p_" + std::to_string(k)] = deviation_json(d);
    }
    j["max_population_deviation"] = pmax;

    if (!a.density.empty() && !b.density.empty()) {
        for (int n = 0; n < N; ++n)
            for (int m = n + 1; m < N; ++m) {
                const std::string key = "rho_" + std::to_string(n) + std::to_string(m);
                auto diff = [&](std::size_t s) { return std::abs(a.density[s](n, m) - b.density[s](n, m)); };
                json c = deviation_json(deviation(S, diff, t));
                c["before_1ps"] = deviation_json(deviation(S, diff, t, -1.0, 1000.0));
                c["after_1ps"] = deviation_json(deviation(S, diff, t, 1000.0));
                c["final_abs"] = diff(S - 1);
                obs[key] = c;
                // partial sums of the coherence formula against the reference
                if (a.coherence) {
                    const auto& T = a.coherence->terms;
                    auto partial = [&](const char* name, auto&& value) {
                        auto dd = [&](std::size_t s) { return std::abs(value(s) - b.density[s](n, m)); };
                        json p = deviation_json(deviation(S, dd, t));
                        p["before_1ps"] = deviation_json(deviation(S, dd, t, -1.0, 1000.0));
                        p["after_1ps"] = deviation_json(deviation(S, dd, t, 1000.0));
                        p["final_abs"] = dd(S - 1);
                        obs[key + "_" + name] = p;
                    };
                    partial("eq", [&](std::size_t s) { return T[s].eq(n, m); });
                    partial("eq_noneq", [&](std::size_t s) { return T[s].eq(n, m) + T[s].noneq(n, m); });
                }
            }
        const auto da = trace_distances(a), db = trace_distances(b);
        obs["dist_diag0"] = deviation_json(deviation(S, [&](std::size_t s) { return std::abs(da[s].first - db[s].first); }, t));
        obs["dist_diagt"] = deviation_json(deviation(S, [&](std::size_t s) { return std::abs(da[s].second - db[s].second); }, t));
    }
    j["observables"] = obs;
    return j.dump(2) + "\n";
}

int run(const std::string& command, const Options& opts, std::ostream& out, std::ostream& err) {
    try {
        if (opts.config.empty()) throw ConfigError("--config is required");
        RunConfig cfg = config::load_config(opts.config);
        if (opts.breakdown) cfg.output.breakdown = true;
        const std::string& pre = cfg.output.prefix;

        if (command == "rates") {
            const fs::path dir = output_dir(cfg, opts);
            const auto p = dir / (pre + "_rates.json");
            const std::string text = rates_report(cfg);
            write_file(p, text);
            out << text;
            return exit_for_verdict(cfg, opts, err);
        }
        if (command == "evolve" || command == "heom") {
            if (command == "heom") cfg.method = Method::heom;
            const bool blocks = cfg.method == Method::block_secular || cfg.method == Method::block_nonsecular;
            const auto sim = simulate(cfg, blocks);
            const fs::path dir = output_dir(cfg, opts);
            write_file(dir / (pre + "_populations.csv"), populations_csv(cfg, sim));
            out << "wrote " << (dir / (pre + "_populations.csv")).string() << '\n';
            if (blocks) {
                write_file(dir / (pre + "_blocks.csv"), blocks_csv(cfg, sim));
                out << "wrote " << (dir / (pre + "_blocks.csv")).string() << '\n';
            }
            if (sim.heom) {
                write_file(dir / (pre + "_heom.json"), heom_json(cfg, *sim.heom).dump(2) + "\n");
                out << "wrote " << (dir / (pre + "_heom.json")).string() << " (depth " << sim.heom->depth
                    << (sim.heom->converged ? ", converged" : ", not converged") << ")\n";
            }
            for (const auto& n : sim.notes) err << "note: " << n << '\n';
            return exit_for_verdict(cfg, opts, err);
        }
        if (command == "coherences" || command == "tracedist") {
            const auto sim = simulate(cfg, true);
            const fs::path dir = output_dir(cfg, opts);
            const bool coh = command == "coherences";
            const auto p = dir / (pre + (coh ? "_coherences.csv" : "_tracedist.csv"));
            write_file(p, coh ? coherences_csv(cfg, sim, cfg.output.breakdown) : tracedist_csv(cfg, sim));
            out << "wrote " << p.string() << '\n';
            for (const auto& n : sim.notes) err << "note: " << n << '\n';
            return exit_for_verdict(cfg, opts, err);
        }
        if (command == "compare") {
            if (opts.against.empty()) throw ConfigError("compare needs --against <config>");
            const RunConfig other = config::load_config(opts.against);
            const auto a = simulate(cfg, true);
            const auto b = simulate(other, true);
            const std::string text = compare_report(a, b, opts.config, opts.against);
            const fs::path dir = output_dir(cfg, opts);
            write_file(dir / (pre + "_vs_" + other.output.prefix + ".json"), text);
            out << text;
            return exit_for_verdict(cfg, opts, err);
        }
        throw ConfigError("unknown command '" + command + "'");
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const ModelError& e) {
        err << "model error: " << e.what() << '\n';
        return config_error;
    } catch (const UnsupportedModeError& e) {
        err << "unsupported: " << e.what() << '\n';
        return config_error;
    } catch (const DomainError& e) {
        err << "invalid input: " << e.what() << '\n';
        return config_error;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return numerical_failure;
    }
}

} // namespace strongdecoh::commands
