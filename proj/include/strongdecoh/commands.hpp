// commands.hpp — CLI subcommands: rates, evolve, coherences, tracedist, compare, heom

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "strongdecoh/coherences.hpp"
#include "strongdecoh/config.hpp"
#include "strongdecoh/heom.hpp"

namespace strongdecoh::commands {

enum ExitCode : int { ok = 0, config_error = 2, numerical_failure = 3, validity_failure = 4 };

struct Options {
    std::string config;
    std::string against;  // compare only
    std::string out_dir;  // overrides [output] dir when non-empty
    bool strict{false};
    bool breakdown{false};
};

// everything a command may write, pointer basis, Schroedinger picture
struct Simulation {
    config::Method method{config::Method::forster};
    model::PointerModel model;
    numerics::TimeGrid grid;
    std::vector<Eigen::VectorXd> populations;
    std::vector<Eigen::MatrixXcd> density;                     // empty if coherences were not requested
    std::optional<coherences::CoherenceTrajectory> coherence; // forster runs: per-term breakdown
    std::optional<heom::ConvergenceReport> heom;
    std::vector<std::string> notes;
};

model::PointerModel build_model(const config::RunConfig& cfg);
// initial system state in the pointer basis
Eigen::MatrixXcd initial_state(const config::RunConfig& cfg, const model::PointerModel& model);

Simulation simulate(const config::RunConfig& cfg, bool with_density);

// block-diagonal part (diagonal for one-dimensional blocks)
Eigen::MatrixXcd block_diagonal_part(const model::PointerModel& model, const Eigen::MatrixXcd& rho);

// JSON documents (stable key order)
std::string rates_report(const config::RunConfig& cfg);
std::string compare_report(const Simulation& a, const Simulation& b, const std::string& label_a,
                           const std::string& label_b);

// validity verdict for simple models (pass when no Förster rates can be formed)
model::Verdict validity_verdict(const config::RunConfig& cfg);

// header comment lines shared by every output file
std::string file_header(const config::RunConfig& cfg, const std::string& extra = "");

// dispatch; writes files below the output directory and a summary to `out`
int run(const std::string& command, const Options& opts, std::ostream& out, std::ostream& err);

} // namespace strongdecoh::commands
