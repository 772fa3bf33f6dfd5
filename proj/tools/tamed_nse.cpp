#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tamed/experiments.hpp"

using namespace tamed;

int main(int argc, char** argv) {
    CLI::App app{"Spectral Galerkin laboratory for the stochastic tamed Navier-Stokes equation on T^3"};
    app.require_subcommand(1);

    std::string run_path, validate_path, out_root;
    auto* run = app.add_subcommand("run", "run an experiment spec and write its outputs");
    run->add_option("spec", run_path, "spec file")->required();
    run->add_option("--output-root", out_root, "output root (default: $TAMED_NSE_OUTPUT_ROOT or the working directory)");
    auto* list = app.add_subcommand("list", "list experiment kinds");
    auto* validate = app.add_subcommand("validate", "parse a spec and check resolution and coefficient hypotheses");
    validate->add_option("spec", validate_path, "spec file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*list) {
            for (const auto& k : experiment_catalog())
                std::cout << k.name << "\t" << k.description << "\t[" << k.anchor << "]\n";
            return exit_ok;
        }
        if (*validate) {
            const ExperimentSpec spec = load_spec(validate_path);
            validate_spec(spec);
            std::cout << "OK " << spec.kind << " (K_max = " << spec.sim.k_max << ", noise = " << to_string(spec.sim.noise)
                      << ")\n";
            return exit_ok;
        }
        const ExperimentSpec spec = load_spec(run_path);
        const auto root = out_root.empty() ? output_root() : std::filesystem::path(out_root);
        const RunResult r = run_experiment(spec, root, std::cout);
        std::cout << "outputs: " << r.directory.string() << "\n";
        return r.passed() ? exit_ok : exit_assertion;
    } catch (...) {
        return report_exception(std::cerr);
    }
}
