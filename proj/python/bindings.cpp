// bindings.cpp — pybind11 module: configs, rates, kernels, trajectories and the CLI dispatcher

#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "strongdecoh/commands.hpp"
#include "strongdecoh/dynamics.hpp"
#include "strongdecoh/errors.hpp"
#include "strongdecoh/units.hpp"

namespace py = pybind11;
using namespace strongdecoh;

namespace {

py::dict simulation_dict(const commands::Simulation& sim) {
    const auto S = static_cast<py::ssize_t>(sim.grid.size());
    const auto N = static_cast<py::ssize_t>(sim.model.size());
    py::array_t<double> t(S), p({S, N});
    auto tv = t.mutable_unchecked<1>();
    auto pv = p.mutable_unchecked<2>();
    for (py::ssize_t s = 0; s < S; ++s) {
        tv(s) = sim.grid.nodes[static_cast<std::size_t>(s)];
        for (py::ssize_t k = 0; k < N; ++k) pv(s, k) = sim.populations[static_cast<std::size_t>(s)](k);
    }
    py::dict d;
    d["t_fs"] = t;
    d["populations"] = p;
    if (!sim.density.empty()) {
        py::array_t<std::complex<double>> rho({S, N, N});
        auto rv = rho.mutable_unchecked<3>();
        for (py::ssize_t s = 0; s < S; ++s)
            for (py::ssize_t i = 0; i < N; ++i)
                for (py::ssize_t j = 0; j < N; ++j) rv(s, i, j) = sim.density[static_cast<std::size_t>(s)](i, j);
        d["density"] = rho;
    }
    d["basis"] = sim.model.basis;
    d["method"] = config::to_string(sim.method);
    d["notes"] = sim.notes;
    if (sim.heom) {
        d["heom_depth"] = sim.heom->depth;
        d["heom_converged"] = sim.heom->converged;
    }
    return d;
}

kernels::KernelContext make_context(const config::RunConfig& cfg) {
    auto pm = commands::build_model(cfg);
    return kernels::KernelContext(pm, bath::lineshape(cfg.system.bath, cfg.quadrature()));
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Strong-decoherence master equations: kernels, rates, coherences and HEOM reference runs";
    m.attr("__version__") = STRONGDECOH_VERSION;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    m.attr("CM_TO_RAD_PER_FS") = units::kCmToRadPerFs;
    m.def("cm_to_rad_fs", &units::cm_to_rad_fs);
    m.def("rad_fs_to_cm", &units::rad_fs_to_cm);
    m.def("beta_from_temperature", &units::beta_from_temperature, py::arg("T"),
          py::arg("kB_cm_per_K") = units::kBoltzmannCmPerK);

    py::class_<config::RunConfig>(m, "RunConfig")
        .def_property(
            "method", [](const config::RunConfig& c) { return config::to_string(c.method); },
            [](config::RunConfig& c, const std::string& s) { c.method = config::method_from_string(s); })
        .def_readonly("preset", &config::RunConfig::preset)
        .def_readonly("temperature_K", &config::RunConfig::temperature_K)
        .def_readonly("kB_cm_per_K", &config::RunConfig::kB_cm_per_K)
        .def_property_readonly("beta_fs", [](const config::RunConfig& c) { return c.system.bath.beta; })
        .def_property_readonly("hamiltonian", [](const config::RunConfig& c) { return c.system.hamiltonian; })
        .def_property_readonly("couplings", [](const config::RunConfig& c) { return c.system.couplings; })
        .def_readwrite("depths", &config::RunConfig::depths)
        .def_property(
            "grid", [](const config::RunConfig& c) { return py::make_tuple(c.grid.end_fs, c.grid.step_fs); },
            [](config::RunConfig& c, std::pair<double, double> g) {
                c.grid.end_fs = g.first;
                c.grid.step_fs = g.second;
            })
        .def("set_initial_pointer",
             [](config::RunConfig& c, int k) {
                 c.initial.kind = config::InitialConfig::Kind::pointer_state;
                 c.initial.pointer = k;
             })
        .def("set_initial_vector",
             [](config::RunConfig& c, const Eigen::VectorXcd& v) {
                 c.initial.kind = config::InitialConfig::Kind::system_vector;
                 c.initial.vector = v;
             })
        .def_property_readonly("hash", &config::RunConfig::hash_hex);

    m.def("load_config", &config::load_config, py::arg("path"));
    m.def("parse_config", &config::parse_config, py::arg("text"), py::arg("base_dir") = ".",
          py::arg("source") = "<string>");
    m.def("spin_boson_paper", &config::spin_boson_paper);
    m.def("eet_chain", &config::eet_chain, py::arg("sites") = 3);

    m.def("rates_report", &commands::rates_report, py::arg("config"), "JSON text of the rates command");
    m.def(
        "simulate",
        [](const config::RunConfig& c, bool with_density) {
            commands::Simulation sim;
            {
                py::gil_scoped_release nogil;
                sim = commands::simulate(c, with_density);
            }
            return simulation_dict(sim);
        },
        py::arg("config"), py::arg("with_density") = false);
    m.def(
        "run",
        [](const std::string& command, const std::string& config, const std::string& out_dir, bool strict,
           bool breakdown, const std::string& against) {
            commands::Options o{config, against, out_dir, strict, breakdown};
            std::ostringstream out, err;
            const int rc = commands::run(command, o, out, err);
            return py::make_tuple(rc, out.str(), err.str());
        },
        py::arg("command"), py::arg("config"), py::arg("out_dir") = "", py::arg("strict") = false,
        py::arg("breakdown") = false, py::arg("against") = "", "run a CLI command; returns (exit code, stdout, stderr)");

    py::class_<kernels::KernelContext>(m, "KernelContext")
        .def(py::init(&make_context), py::arg("config"))
        .def("zeta", &kernels::zeta, py::arg("n"), py::arg("m"), py::arg("t"))
        .def("zeta3", &kernels::zeta3, py::arg("m"), py::arg("n"), py::arg("l"), py::arg("t"), py::arg("tau"))
        .def("G", &kernels::KernelContext::G)
        .def("Lambda", &kernels::KernelContext::Lambda)
        .def("decoherence_rate", &kernels::KernelContext::decoherence_rate)
        .def_property_readonly("eps_bar", [](const kernels::KernelContext& k) { return k.model().eps_bar; })
        .def_property_readonly("delta_eps", [](const kernels::KernelContext& k) { return k.model().delta_eps; })
        .def_property_readonly("theta", [](const kernels::KernelContext& k) { return k.model().theta; })
        .def_property_readonly("basis", [](const kernels::KernelContext& k) { return k.model().basis; })
        .def("forster_rates", [](const kernels::KernelContext& k) { return generators::forster_rates(k).gamma; })
        .def("steady_coherences", [](const kernels::KernelContext& k) { return coherences::coherence_steady(k); });

    m.def(
        "heom_evolve",
        [](const config::RunConfig& c, int depth, const Eigen::MatrixXcd& rho0, const std::vector<double>& times) {
            heom::HeomResult r;
            {
                py::gil_scoped_release nogil;
                r = heom::heom_evolve({c.system, depth}, rho0, numerics::TimeGrid::from_nodes(times));
            }
            return r.rho;
        },
        py::arg("config"), py::arg("depth"), py::arg("rho0"), py::arg("times"),
        "system-basis density matrices at the requested times");
    m.def("trace_distance", &coherences::trace_distance);
}
