// strongdecoh.cpp — Command-line entry point

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "strongdecoh/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Strong-decoherence master equations, kernels and HEOM reference runs"};
    app.set_version_flag("--version", std::string(STRONGDECOH_VERSION));
    app.require_subcommand(1);

    strongdecoh::commands::Options opts;
    std::string command;
    auto add = [&](const char* name, const char* help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opts.config, "TOML run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opts.out_dir, "output directory (overrides [output] dir)");
        sub->add_flag("--strict", opts.strict, "exit with code 4 unless every validity verdict passes");
        sub->add_flag("--breakdown", opts.breakdown, "write per-term coherence rows");
        sub->callback([&command, name] { command = name; });
        return sub;
    };
    add("rates", "transition rates, detailed balance and validity report (JSON)");
    add("evolve", "population trajectory (CSV)");
    add("coherences", "coherence trajectory (CSV)");
    add("tracedist", "trace distance to the diagonal part (CSV)");
    add("heom", "hierarchy reference run with depth sweep");
    add("compare", "difference report between two runs (JSON)")
        ->add_option("--against", opts.against, "second configuration")
        ->required()
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : strongdecoh::commands::config_error;
    }
    return strongdecoh::commands::run(command, opts, std::cout, std::cerr);
}
