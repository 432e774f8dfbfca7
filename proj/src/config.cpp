// config.cpp — TOML run configuration, named presets and CSV readers

#include "strongdecoh/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "strongdecoh/errors.hpp"
#include "strongdecoh/units.hpp"

namespace strongdecoh::config {

namespace fs = std::filesystem;
using cplx = std::complex<double>;

namespace {

std::string where(const toml::node& n) {
    const auto& s = n.source();
    return " (line " + std::to_string(s.begin.line) + ")";
}

void check_keys(const toml::table& t, std::initializer_list<std::string_view> allowed, const std::string& section) {
    const std::set<std::string_view> ok(allowed);
    for (const auto& [k, v] : t)
        if (!ok.count(k.str())) throw ConfigError("unknown key '" + std::string(k.str()) + "' in [" + section + "]" + where(v));
}

double number(const toml::node& n, const std::string& what) {
    if (auto v = n.value<double>()) return *v;
    throw ConfigError(what + " must be a number" + where(n));
}

template <class T>
T get(const toml::table& t, std::string_view key, T fallback, const std::string& section) {
    const toml::node* n = t.get(key);
    if (!n) return fallback;
    if constexpr (std::is_same_v<T, bool>) {
        if (auto v = n->value<bool>()) return *v;
        throw ConfigError(section + "." + std::string(key) + " must be a boolean" + where(*n));
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (auto v = n->value<std::string>()) return *v;
        throw ConfigError(section + "." + std::string(key) + " must be a string" + where(*n));
    } else if constexpr (std::is_same_v<T, int>) {
        if (n->is_integer()) return static_cast<int>(n->as_integer()->get());
        throw ConfigError(section + "." + std::string(key) + " must be an integer" + where(*n));
    } else {
        return number(*n, section + "." + std::string(key));
    }
}

// number, or [re, im]
cplx complex_entry(const toml::node& n, const std::string& what) {
    if (const auto* a = n.as_array()) {
        if (a->size() != 2) throw ConfigError(what + ": complex entries are [re, im]" + where(n));
        return {number(*a->get(0), what), number(*a->get(1), what)};
    }
    return {number(n, what), 0.0};
}

std::string resolve(const std::string& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? p : (fs::path(base) / path).string();
}

Eigen::MatrixXcd matrix_node(const toml::node& n, const std::string& base, const std::string& what) {
    if (const auto* t = n.as_table()) {
        check_keys(*t, {"file"}, what);
        return read_matrix_csv(resolve(base, get<std::string>(*t, "file", "", what)));
    }
    const auto* rows = n.as_array();
    if (!rows || rows->empty()) throw ConfigError(what + " must be a non-empty nested array or {file = ...}" + where(n));
    const auto R = static_cast<Eigen::Index>(rows->size());
    Eigen::MatrixXcd M;
    for (Eigen::Index i = 0; i < R; ++i) {
        const auto* row = rows->get(static_cast<std::size_t>(i))->as_array();
        if (!row) throw ConfigError(what + ": row " + std::to_string(i) + " is not an array" + where(n));
        if (i == 0) M.resize(R, static_cast<Eigen::Index>(row->size()));
        if (static_cast<Eigen::Index>(row->size()) != M.cols())
            throw ConfigError(what + ": ragged rows" + where(*row));
        for (Eigen::Index j = 0; j < M.cols(); ++j) M(i, j) = complex_entry(*row->get(static_cast<std::size_t>(j)), what);
    }
    return M;
}

Eigen::VectorXcd vector_node(const toml::node& n, const std::string& what) {
    const auto* a = n.as_array();
    if (!a || a->empty()) throw ConfigError(what + " must be a non-empty array" + where(n));
    Eigen::VectorXcd v(static_cast<Eigen::Index>(a->size()));
    for (std::size_t i = 0; i < a->size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_entry(*a->get(i), what);
    return v;
}

std::vector<double> split_numbers(const std::string& line, const std::string& path, int lineno) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r\"");
        const auto e = cell.find_last_not_of(" \t\r\"");
        if (b == std::string::npos) throw ConfigError(path + ":" + std::to_string(lineno) + ": empty cell");
        try {
            std::size_t used = 0;
            const std::string s = cell.substr(b, e - b + 1);
            out.push_back(std::stod(s, &used));
            if (used != s.size()) throw std::invalid_argument(s);
        } catch (const std::exception&) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
        }
    }
    return out;
}

std::vector<std::vector<double>> read_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos || line[b] == '#') continue;
        // tolerate one textual header row
        if (rows.empty() && (std::isalpha(static_cast<unsigned char>(line[b])) != 0)) continue;
        rows.push_back(split_numbers(line, path, lineno));
    }
    if (rows.empty()) throw ConfigError(path + ": no data rows");
    return rows;
}

bath::SpectralForm spectral_entry(const toml::table& t, const std::string& base, int& a, int& b) {
    const std::string sec = "bath.spectral";
    check_keys(t, {"channel", "channels", "form", "eta_cm", "cutoff_fs", "cutoff_cm", "exponent", "file"}, sec);
    if (t.contains("channels")) {
        const auto* arr = t.get("channels")->as_array();
        if (!arr || arr->size() != 2) throw ConfigError("bath.spectral.channels must be [a, b]");
        a = static_cast<int>(number(*arr->get(0), sec));
        b = static_cast<int>(number(*arr->get(1), sec));
    } else {
        a = b = get<int>(t, "channel", 0, sec);
    }
    const std::string form = get<std::string>(t, "form", "drude_lorentz", sec);
    if (form == "zero") return bath::Zero{};
    if (form == "tabulated") return read_spectral_csv(resolve(base, get<std::string>(t, "file", "", sec)));
    const double eta = units::cm_to_rad_fs(get<double>(t, "eta_cm", 0.0, sec));
    double cutoff = 0.0;
    if (t.contains("cutoff_fs") == t.contains("cutoff_cm"))
        throw ConfigError("bath.spectral needs exactly one of cutoff_fs, cutoff_cm");
    if (t.contains("cutoff_fs")) {
        const double tau = get<double>(t, "cutoff_fs", 0.0, sec);
        if (!(tau > 0.0)) throw ConfigError("bath.spectral.cutoff_fs must be > 0");
        cutoff = 1.0 / tau;
    } else {
        cutoff = units::cm_to_rad_fs(get<double>(t, "cutoff_cm", 0.0, sec));
    }
    if (form == "drude_lorentz") return bath::DrudeLorentz{eta, cutoff};
    if (form == "ohmic_exp") return bath::OhmicExp{eta, cutoff};
    if (form == "super_ohmic") return bath::SuperOhmic{get<double>(t, "exponent", 3.0, sec), eta, cutoff};
    throw ConfigError("unknown spectral form '" + form + "'");
}

Eigen::MatrixXcd sigma_x() {
    Eigen::MatrixXcd X = Eigen::MatrixXcd::Zero(2, 2);
    X(0, 1) = X(1, 0) = 1.0;
    return X;
}

void set_beta(RunConfig& c) {
    if (!(c.temperature_K > 0.0)) throw ConfigError("bath.temperature_K must be > 0");
    if (!(c.kB_cm_per_K > 0.0)) throw ConfigError("bath.kB_cm_per_K must be > 0");
    c.system.bath.beta = units::beta_from_temperature(c.temperature_K, c.kB_cm_per_K);
}

RunConfig spin_boson(double eps_cm) {
    RunConfig c;
    c.preset = "spin_boson_paper";
    const double e = units::cm_to_rad_fs(eps_cm);
    c.system.hamiltonian = Eigen::MatrixXcd::Zero(2, 2);
    c.system.hamiltonian(0, 0) = e;
    c.system.hamiltonian(1, 1) = -e;
    c.system.couplings = {sigma_x()};
    c.system.bath.high_temperature = true;
    c.system.bath.spectral = bath::SpectralDensityMatrix::diagonal({bath::DrudeLorentz{units::cm_to_rad_fs(100.0), 0.01}});
    c.temperature_K = 300.0;
    c.kB_cm_per_K = units::kBoltzmannPaperCmPerK;
    set_beta(c);
    c.depths = {24, 32, 40};
    return c;
}

RunConfig chain(int sites, const std::vector<double>& energies_cm, double coupling_cm) {
    if (sites < 2) throw ConfigError("eet_chain needs at least 2 sites");
    if (static_cast<int>(energies_cm.size()) != sites) throw ConfigError("eet_chain: site_energies_cm needs one entry per site");
    RunConfig c;
    c.preset = "eet_chain";
    c.system.hamiltonian = Eigen::MatrixXcd::Zero(sites, sites);
    std::vector<bath::SpectralForm> forms;
    for (int n = 0; n < sites; ++n) {
        c.system.hamiltonian(n, n) = units::cm_to_rad_fs(energies_cm[static_cast<std::size_t>(n)]);
        if (n + 1 < sites) c.system.hamiltonian(n, n + 1) = c.system.hamiltonian(n + 1, n) = units::cm_to_rad_fs(coupling_cm);
        Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(sites, sites);
        A(n, n) = 1.0;
        c.system.couplings.push_back(A);
        forms.emplace_back(bath::DrudeLorentz{units::cm_to_rad_fs(100.0), 0.01});
    }
    c.system.bath.spectral = bath::SpectralDensityMatrix::diagonal(forms);
    c.temperature_K = 300.0;
    c.kB_cm_per_K = units::kBoltzmannCmPerK;
    set_beta(c);
    c.initial.kind = InitialConfig::Kind::pointer_state;
    c.initial.pointer = 0;
    return c;
}

std::vector<double> default_chain_energies(int sites) {
    std::vector<double> e;
    for (int n = 0; n < sites; ++n) e.push_back(100.0 * (sites - 1 - n));
    return e;
}

void parse_model(const toml::table& t, const std::string& base, RunConfig& c) {
    const std::string sec = "model";
    check_keys(t, {"preset", "epsilon_cm", "sites", "site_energies_cm", "coupling_cm", "hamiltonian_cm", "couplings",
                   "counter_term", "partition", "cluster_threshold", "projectors"},
               sec);
    const std::string preset = get<std::string>(t, "preset", "", sec);
    if (preset == "spin_boson_paper") {
        c = spin_boson(get<double>(t, "epsilon_cm", 10.0, sec));
    } else if (preset == "eet_chain") {
        const int sites = get<int>(t, "sites", 3, sec);
        std::vector<double> e = default_chain_energies(sites);
        if (const auto* n = t.get("site_energies_cm")) {
            const auto* a = n->as_array();
            if (!a) throw ConfigError("model.site_energies_cm must be an array");
            e.clear();
            for (const auto& x : *a) e.push_back(number(x, "model.site_energies_cm"));
        }
        c = chain(sites, e, get<double>(t, "coupling_cm", 50.0, sec));
    } else if (!preset.empty()) {
        throw ConfigError("unknown preset '" + preset + "' (spin_boson_paper, eet_chain)");
    } else {
        if (!t.contains("hamiltonian_cm") || !t.contains("couplings"))
            throw ConfigError("[model] needs a preset or hamiltonian_cm and couplings");
        c.system.hamiltonian = units::kCmToRadPerFs * matrix_node(*t.get("hamiltonian_cm"), base, "model.hamiltonian_cm");
        const auto* arr = t.get("couplings")->as_array();
        if (!arr || arr->empty()) throw ConfigError("model.couplings must be a non-empty array of matrices");
        c.system.couplings.clear();
        for (const auto& m : *arr) c.system.couplings.push_back(matrix_node(m, base, "model.couplings"));
        c.kB_cm_per_K = units::kBoltzmannCmPerK;
    }
    c.system.counter_term = get<bool>(t, "counter_term", c.system.counter_term, sec);
    const std::string part = get<std::string>(t, "partition", "simple", sec);
    if (part == "simple") c.partition = PartitionKind::simple;
    else if (part == "auto") c.partition = PartitionKind::automatic;
    else if (part == "explicit") c.partition = PartitionKind::explicit_projectors;
    else throw ConfigError("model.partition must be simple, auto or explicit");
    c.cluster_threshold = get<double>(t, "cluster_threshold", c.cluster_threshold, sec);
    if (c.partition == PartitionKind::explicit_projectors) {
        const auto* arr = t.contains("projectors") ? t.get("projectors")->as_array() : nullptr;
        if (!arr || arr->empty()) throw ConfigError("partition = \"explicit\" needs model.projectors");
        for (const auto& m : *arr) c.projectors.push_back(matrix_node(m, base, "model.projectors"));
    }
}

void parse_bath(const toml::table& t, const std::string& base, RunConfig& c) {
    const std::string sec = "bath";
    check_keys(t, {"temperature_K", "kB_cm_per_K", "high_temperature", "spectral"}, sec);
    c.temperature_K = get<double>(t, "temperature_K", c.temperature_K, sec);
    c.kB_cm_per_K = get<double>(t, "kB_cm_per_K", c.kB_cm_per_K, sec);
    c.system.bath.high_temperature = get<bool>(t, "high_temperature", c.system.bath.high_temperature, sec);
    if (const auto* n = t.get("spectral")) {
        const auto* arr = n->as_array();
        if (!arr) throw ConfigError("bath.spectral must be an array of tables ([[bath.spectral]])");
        bath::SpectralDensityMatrix J(c.system.channels());
        for (const auto& e : *arr) {
            const auto* et = e.as_table();
            if (!et) throw ConfigError("bath.spectral entries must be tables" + where(e));
            int a = 0, b = 0;
            auto f = spectral_entry(*et, base, a, b);
            if (a < 0 || b < 0 || a >= J.size() || b >= J.size())
                throw ConfigError("bath.spectral channel out of range" + where(e));
            J.set(a, b, std::move(f));
        }
        c.system.bath.spectral = std::move(J);
    }
}

void parse_method(const toml::table& t, RunConfig& c) {
    const std::string sec = "method";
    check_keys(t, {"kind", "depth", "depths", "redfield", "transitions", "noneq", "decoh", "cohcoh"}, sec);
    c.method = method_from_string(get<std::string>(t, "kind", to_string(c.method), sec));
    if (t.contains("depth") && t.contains("depths")) throw ConfigError("method: give depth or depths, not both");
    if (t.contains("depth")) c.depths = {get<int>(t, "depth", 0, sec)};
    if (const auto* n = t.get("depths")) {
        const auto* a = n->as_array();
        if (!a || a->empty()) throw ConfigError("method.depths must be a non-empty array");
        c.depths.clear();
        for (const auto& x : *a) c.depths.push_back(static_cast<int>(number(x, "method.depths")));
    }
    for (std::size_t i = 0; i < c.depths.size(); ++i) {
        if (c.depths[i] < 1) throw ConfigError("method depths must be >= 1");
        if (i && c.depths[i] <= c.depths[i - 1]) throw ConfigError("method.depths must be strictly increasing");
    }
    c.redfield = get<bool>(t, "redfield", c.redfield, sec);
    c.transitions = get<bool>(t, "transitions", c.transitions, sec);
    c.term_noneq = get<bool>(t, "noneq", c.term_noneq, sec);
    c.term_decoh = get<bool>(t, "decoh", c.term_decoh, sec);
    c.term_cohcoh = get<bool>(t, "cohcoh", c.term_cohcoh, sec);
}

void parse_initial(const toml::table& t, const std::string& base, RunConfig& c) {
    const std::string sec = "initial";
    check_keys(t, {"pointer", "populations", "vector", "density"}, sec);
    if (t.size() != 1) throw ConfigError("[initial] needs exactly one of pointer, populations, vector, density");
    auto& in = c.initial;
    if (t.contains("pointer")) {
        in.kind = InitialConfig::Kind::pointer_state;
        in.pointer = get<int>(t, "pointer", 0, sec);
    } else if (t.contains("populations")) {
        in.kind = InitialConfig::Kind::pointer_populations;
        in.populations = vector_node(*t.get("populations"), "initial.populations").real();
    } else if (t.contains("vector")) {
        in.kind = InitialConfig::Kind::system_vector;
        in.vector = vector_node(*t.get("vector"), "initial.vector");
    } else {
        in.kind = InitialConfig::Kind::system_density;
        in.density = matrix_node(*t.get("density"), base, "initial.density");
    }
}

} // namespace

std::string to_string(Method m) {
    switch (m) {
    case Method::forster: return "forster";
    case Method::block_secular: return "block_secular";
    case Method::block_nonsecular: return "block_nonsecular";
    case Method::heom: return "heom";
    }
    return "?";
}

Method method_from_string(std::string_view s) {
    if (s == "forster") return Method::forster;
    if (s == "block_secular") return Method::block_secular;
    if (s == "block_nonsecular") return Method::block_nonsecular;
    if (s == "heom") return Method::heom;
    throw ConfigError("unknown method '" + std::string(s) + "' (forster, block_secular, block_nonsecular, heom)");
}

numerics::QuadratureSpec RunConfig::quadrature() const {
    numerics::QuadratureSpec q;
    q.rel_tol = tolerances.quad_rel;
    q.abs_tol = tolerances.quad_abs;
    q.decay_threshold = tolerances.decay_threshold;
    return q;
}

generators::GeneratorOptions RunConfig::generator_options() const {
    generators::GeneratorOptions o;
    o.secular = method != Method::block_nonsecular;
    o.redfield = redfield;
    o.transitions = transitions;
    o.quad = quadrature();
    return o;
}

numerics::PropagateOptions RunConfig::propagate_options() const {
    numerics::PropagateOptions o;
    o.tolerance = tolerances.ode_tolerance;
    o.max_step = tolerances.max_step_fs;
    return o;
}

std::string RunConfig::hash_hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

RunConfig spin_boson_paper() {
    return spin_boson(10.0);
}

RunConfig eet_chain(int sites) {
    return chain(sites, default_chain_energies(sites), 50.0);
}

RunConfig parse_config(std::string_view text, const std::string& base_dir, const std::string& source) {
    toml::table root;
    try {
        root = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << "TOML parse error in " << source << " (line " << e.source().begin.line << "): " << e.description();
        throw ConfigError(os.str());
    }
    check_keys(root, {"model", "bath", "method", "grid", "initial", "output", "tolerances"}, "top level");
    auto section = [&](const char* name) -> const toml::table* {
        const toml::node* n = root.get(name);
        if (!n) return nullptr;
        if (!n->is_table()) throw ConfigError(std::string("[") + name + "] must be a table");
        return n->as_table();
    };

    RunConfig c;
    const auto* model = section("model");
    if (!model) throw ConfigError("missing [model] section");
    parse_model(*model, base_dir, c);
    if (const auto* b = section("bath")) parse_bath(*b, base_dir, c);
    else if (c.preset.empty()) throw ConfigError("missing [bath] section");
    if (c.system.bath.spectral.size() == 0) throw ConfigError("[bath] needs [[bath.spectral]] entries");
    set_beta(c);
    if (const auto* m = section("method")) parse_method(*m, c);
    if (const auto* g = section("grid")) {
        check_keys(*g, {"start_fs", "end_fs", "step_fs"}, "grid");
        c.grid.start_fs = get<double>(*g, "start_fs", c.grid.start_fs, "grid");
        c.grid.end_fs = get<double>(*g, "end_fs", c.grid.end_fs, "grid");
        c.grid.step_fs = get<double>(*g, "step_fs", c.grid.step_fs, "grid");
        if (c.grid.start_fs != 0.0) throw ConfigError("grid.start_fs must be 0 (the initial state is prepared at t = 0)");
        (void)c.grid.grid();
    }
    if (const auto* i = section("initial")) parse_initial(*i, base_dir, c);
    if (const auto* o = section("output")) {
        check_keys(*o, {"dir", "prefix", "breakdown"}, "output");
        c.output.dir = get<std::string>(*o, "dir", c.output.dir, "output");
        c.output.prefix = get<std::string>(*o, "prefix", c.output.prefix, "output");
        c.output.breakdown = get<bool>(*o, "breakdown", c.output.breakdown, "output");
    }
    if (const auto* t = section("tolerances")) {
        const std::string sec = "tolerances";
        check_keys(*t, {"quad_rel", "quad_abs", "decay_threshold", "ode_tolerance", "max_step_fs", "heom_convergence"}, sec);
        auto& tol = c.tolerances;
        tol.quad_rel = get<double>(*t, "quad_rel", tol.quad_rel, sec);
        tol.quad_abs = get<double>(*t, "quad_abs", tol.quad_abs, sec);
        tol.decay_threshold = get<double>(*t, "decay_threshold", tol.decay_threshold, sec);
        tol.ode_tolerance = get<double>(*t, "ode_tolerance", tol.ode_tolerance, sec);
        tol.max_step_fs = get<double>(*t, "max_step_fs", tol.max_step_fs, sec);
        tol.heom_convergence = get<double>(*t, "heom_convergence", tol.heom_convergence, sec);
        c.quadrature().validate();
        if (!(tol.ode_tolerance > 0.0) || !(tol.max_step_fs > 0.0) || !(tol.heom_convergence > 0.0))
            throw ConfigError("tolerances must be > 0");
    }
    c.system.validate();
    c.source = source;
    c.hash = fnv1a(text);
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto parent = fs::path(path).parent_path();
    return parse_config(ss.str(), parent.empty() ? "." : parent.string(), path);
}

Eigen::MatrixXcd read_matrix_csv(const std::string& path) {
    const auto rows = read_rows(path);
    const auto R = static_cast<Eigen::Index>(rows.size());
    const auto width = rows.front().size();
    bool pairs;
    if (width == rows.size()) pairs = false;
    else if (width == 2 * rows.size()) pairs = true;
    else throw ConfigError(path + ": rows must hold N reals or N re,im pairs for an N x N matrix");
    Eigen::MatrixXcd M(R, R);
    for (Eigen::Index i = 0; i < R; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        if (r.size() != width) throw ConfigError(path + ": ragged rows");
        for (Eigen::Index j = 0; j < R; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            M(i, j) = pairs ? cplx(r[2 * uj], r[2 * uj + 1]) : cplx(r[uj], 0.0);
        }
    }
    return M;
}

bath::Tabulated read_spectral_csv(const std::string& path) {
    const auto rows = read_rows(path);
    bath::Tabulated t;
    for (const auto& r : rows) {
        if (r.size() != 2 && r.size() != 3) throw ConfigError(path + ": spectral rows need 2 or 3 columns");
        t.omega.push_back(units::cm_to_rad_fs(r[0]));
        t.values.emplace_back(units::cm_to_rad_fs(r[1]), r.size() == 3 ? units::cm_to_rad_fs(r[2]) : 0.0);
    }
    return t;
}

} // namespace strongdecoh::config
