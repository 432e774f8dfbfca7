// config.hpp — Run configuration: TOML parsing, presets, boundary unit conversion

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "strongdecoh/generators.hpp"
#include "strongdecoh/model.hpp"

namespace strongdecoh::config {

enum class Method { forster, block_secular, block_nonsecular, heom };
std::string to_string(Method m);
Method method_from_string(std::string_view s);

enum class PartitionKind { simple, automatic, explicit_projectors };

struct GridConfig {
    double start_fs{0.0};
    double end_fs{2000.0};
    double step_fs{10.0};
    numerics::TimeGrid grid() const { return numerics::TimeGrid::uniform(start_fs, end_fs, step_fs); }
};

// exactly one source; pointer-basis entries refer to the pointer ordering of the built model
struct InitialConfig {
    enum class Kind { pointer_state, pointer_populations, system_vector, system_density };
    Kind kind{Kind::pointer_state};
    int pointer{0};
    Eigen::VectorXd populations;
    Eigen::VectorXcd vector;
    Eigen::MatrixXcd density;
};

struct OutputConfig {
    std::string dir{"."};
    std::string prefix{"run"};
    bool breakdown{false};
};

struct Tolerances {
    double quad_rel{1e-10};
    double quad_abs{1e-14};
    double decay_threshold{1e-13};
    double ode_tolerance{1e-9};
    double max_step_fs{1.0};
    double heom_convergence{1e-4};
};

struct RunConfig {
    std::string source;      // file path or "<string>"
    std::uint64_t hash{0};   // FNV-1a of the config text
    std::string preset;      // empty for explicit models

    model::SystemSpec system; // rad/fs
    PartitionKind partition{PartitionKind::simple};
    double cluster_threshold{0.05};
    std::vector<Eigen::MatrixXcd> projectors; // system basis

    double temperature_K{300.0};
    double kB_cm_per_K{0.0};

    Method method{Method::forster};
    std::vector<int> depths{16, 24, 32};
    bool redfield{true};
    bool transitions{true};
    // coherence terms kept by the coherences command
    bool term_noneq{true}, term_decoh{true}, term_cohcoh{true};

    GridConfig grid;
    InitialConfig initial;
    OutputConfig output;
    Tolerances tolerances;

    numerics::QuadratureSpec quadrature() const;
    generators::GeneratorOptions generator_options() const;
    numerics::PropagateOptions propagate_options() const;
    std::string hash_hex() const;
};

RunConfig parse_config(std::string_view text, const std::string& base_dir = ".", const std::string& source = "<string>");
RunConfig load_config(const std::string& path);

// named models; the returned config can be modified before running
RunConfig spin_boson_paper();
RunConfig eet_chain(int sites = 3);

std::uint64_t fnv1a(std::string_view text);

// matrix from CSV: row-major, each row either N reals or N "re,im" pairs
Eigen::MatrixXcd read_matrix_csv(const std::string& path);
// two- or three-column tabulated spectral density (w cm^-1, Re J, Im J cm^-1), converted to rad/fs
bath::Tabulated read_spectral_csv(const std::string& path);

} // namespace strongdecoh::config
