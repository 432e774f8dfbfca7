// test_config.cpp — TOML parsing, presets, CSV inputs and error reporting

#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "strongdecoh/config.hpp"
#include "strongdecoh/errors.hpp"

using namespace strongdecoh;
using namespace strongdecoh::config;
using strongdecoh::testing::cplx;

namespace {

const char* kExplicit = R"(
[model]
hamiltonian_cm = [[50, [10, 5]], [[10, -5], -50]]
couplings = [[[1, 0], [0, -1]]]

[bath]
temperature_K = 200

[[bath.spectral]]
channel = 0
form = "ohmic_exp"
eta_cm = 80
cutoff_fs = 50

[method]
kind = "block_secular"

[grid]
end_fs = 100
step_fs = 10

[initial]
populations = [0.25, 0.75]
)";

} // namespace

TEST_SUITE("config") {

TEST_CASE("spin-boson preset") {
    const auto c = spin_boson_paper();
    CHECK(c.preset == "spin_boson_paper");
    CHECK(c.kB_cm_per_K == 0.734);
    CHECK(c.system.bath.high_temperature);
    CHECK(c.system.bath.beta * 0.01 == doctest::Approx(0.241).epsilon(1e-3));
    CHECK(std::abs(c.system.hamiltonian(0, 0).real() - units::cm_to_rad_fs(10.0)) < 1e-15);
    CHECK(c.system.couplings[0](0, 1) == cplx(1.0));
    const auto p = parse_config("[model]\npreset = \"spin_boson_paper\"\nepsilon_cm = 20\n");
    CHECK(std::abs(p.system.hamiltonian(1, 1).real() + units::cm_to_rad_fs(20.0)) < 1e-15);
    CHECK(p.method == Method::forster);
}

TEST_CASE("chain preset") {
    const auto c = eet_chain(4);
    CHECK(c.system.dimension() == 4);
    CHECK(c.system.channels() == 4);
    CHECK(c.kB_cm_per_K == units::kBoltzmannCmPerK);
    CHECK(std::abs(c.system.hamiltonian(0, 0).real() - units::cm_to_rad_fs(300.0)) < 1e-15);
    CHECK(std::abs(c.system.hamiltonian(2, 3).real() - units::cm_to_rad_fs(50.0)) < 1e-15);
    CHECK(c.system.hamiltonian(0, 2) == cplx(0.0));
    const auto p = parse_config("[model]\npreset = \"eet_chain\"\nsites = 2\nsite_energies_cm = [0, 40]\n");
    CHECK(std::abs(p.system.hamiltonian(1, 1).real() - units::cm_to_rad_fs(40.0)) < 1e-15);
    CHECK_THROWS_AS(eet_chain(1), ConfigError);
}

TEST_CASE("explicit model with complex entries") {
    const auto c = parse_config(kExplicit);
    CHECK(c.preset.empty());
    CHECK(c.method == Method::block_secular);
    CHECK(c.kB_cm_per_K == units::kBoltzmannCmPerK);
    CHECK(c.system.bath.beta == doctest::Approx(units::beta_from_temperature(200.0)));
    CHECK(std::abs(c.system.hamiltonian(0, 1) - units::cm_to_rad_fs(1.0) * cplx(10.0, 5.0)) < 1e-15);
    CHECK(std::abs(c.system.hamiltonian(1, 0) - units::cm_to_rad_fs(1.0) * cplx(10.0, -5.0)) < 1e-15);
    CHECK(c.grid.grid().size() == 11);
    CHECK(c.initial.kind == InitialConfig::Kind::pointer_populations);
    CHECK(c.initial.populations(1) == 0.75);
    const auto& f = c.system.bath.spectral.form(0, 0);
    REQUIRE(std::holds_alternative<bath::OhmicExp>(f));
    CHECK(std::get<bath::OhmicExp>(f).cutoff == doctest::Approx(0.02));
}

TEST_CASE("hash is deterministic and sensitive to the text") {
    const auto a = parse_config(kExplicit), b = parse_config(kExplicit);
    CHECK(a.hash == b.hash);
    CHECK(a.hash_hex().size() == 16);
    CHECK(parse_config(std::string(kExplicit) + "\n# comment\n").hash != a.hash);
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("matrices and spectral densities from CSV files") {
    const testing::TempDir dir("config");
    dir.write("h.csv", "# Hamiltonian\nre0,im0,re1,im1\n10,0,3,1\n3,-1,-10,0\n");
    dir.write("j.csv", "w_cm,J_cm\n0,0\n50,20\n100,10\n");
    const auto path = dir.write("run.toml", R"(
[model]
hamiltonian_cm = {file = "h.csv"}
couplings = [[[2, 0], [0, -1]]]
[bath]
[[bath.spectral]]
form = "tabulated"
file = "j.csv"
)");
    const auto c = load_config(path);
    CHECK(c.source == path);
    CHECK(std::abs(c.system.hamiltonian(0, 1) - units::cm_to_rad_fs(1.0) * cplx(3.0, 1.0)) < 1e-15);
    const auto& t = std::get<bath::Tabulated>(c.system.bath.spectral.form(0, 0));
    REQUIRE(t.omega.size() == 3);
    CHECK(t.omega[1] == doctest::Approx(units::cm_to_rad_fs(50.0)));
    CHECK(t.values[1].real() == doctest::Approx(units::cm_to_rad_fs(20.0)));

    dir.write("bad.csv", "1,2\n3\n");
    CHECK_THROWS_AS(read_matrix_csv((dir.path / "bad.csv").string()), ConfigError);
    dir.write("nan.csv", "1,x\n3,4\n");
    CHECK_THROWS_AS(read_matrix_csv((dir.path / "nan.csv").string()), ConfigError);
    CHECK_THROWS_AS(read_matrix_csv((dir.path / "missing.csv").string()), ConfigError);
    CHECK_THROWS_AS(load_config((dir.path / "missing.toml").string()), ConfigError);
}

TEST_CASE("configuration errors are reported") {
    auto bad = [](const std::string& text) { CHECK_THROWS_AS(parse_config(text), ConfigError); };
    bad("[model]\npreset = \"spin_boson_paper\"\ncolour = 3\n");
    bad("[model]\npreset = \"nope\"\n");
    bad("[model]\npreset = \"spin_boson_paper\"\n[method]\nkind = \"magic\"\n");
    bad("[model]\npreset = \"spin_boson_paper\"\n[method]\ndepths = [8, 4]\n");
    bad("[model]\npreset = \"spin_boson_paper\"\n[method]\ndepth = 4\ndepths = [4, 8]\n");
    bad("[model]\npreset = \"spin_boson_paper\"\n[grid]\nstart_fs = 5\n");
    bad("[model]\npreset = \"spin_boson_paper\"\n[grid]\nstep_fs = 0\n");
    bad("[model]\npreset = \"spin_boson_paper\"\n[initial]\npointer = 0\npopulations = [1, 0]\n");
    bad("[model]\npreset = \"spin_boson_paper\"\n[bath]\ntemperature_K = -3\n");
    bad("[model]\npreset = \"spin_boson_paper\"\n[tolerances]\nquad_rel = 0\n");
    bad("[model]\nhamiltonian_cm = [[1, 0], [0, 1]]\n");
    bad("[model]\nhamiltonian_cm = [[1, 2], [0, 1]]\ncouplings = [[[1, 0], [0, -1]]]\n[bath]\n"
        "[[bath.spectral]]\neta_cm = 1\ncutoff_fs = 10\n");
    bad("[model]\nhamiltonian_cm = [[1, 0], [0, 1]]\ncouplings = [[[1, 0], [0, -1]]]\n[bath]\n"
        "[[bath.spectral]]\neta_cm = 1\ncutoff_fs = 10\ncutoff_cm = 3\n");
    bad("[model]\nhamiltonian_cm = [[1, 0], [0, 1]]\ncouplings = [[[1, 0], [0, -1]]]\n[bath]\n"
        "[[bath.spectral]]\nchannel = 3\neta_cm = 1\ncutoff_fs = 10\n");
    bad("[model\n");
    try {
        parse_config("[model]\npreset = \"spin_boson_paper\"\n\n[method]\nkind = 7\n");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line") != std::string::npos);
    }
}

TEST_CASE("method names round-trip") {
    for (auto m : {Method::forster, Method::block_secular, Method::block_nonsecular, Method::heom})
        CHECK(method_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(method_from_string("redfield"), ConfigError);
}

TEST_CASE("derived solver options follow the tolerances") {
    auto c = parse_config("[model]\npreset = \"spin_boson_paper\"\n[method]\nkind = \"block_nonsecular\"\n"
                          "[tolerances]\nquad_rel = 1e-8\nmax_step_fs = 0.5\n");
    CHECK(c.quadrature().rel_tol == 1e-8);
    CHECK(c.propagate_options().max_step == 0.5);
    CHECK_FALSE(c.generator_options().secular);
}

}
