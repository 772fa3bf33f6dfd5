#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tamed/config.hpp"
#include "tamed/integrator.hpp"

namespace tamed {

struct KindInfo {
    std::string name;
    std::string description;
    std::string anchor;  ///< the mathematical statement the experiment probes
};

/// The nine experiment kinds, in a fixed order.
const std::vector<KindInfo>& experiment_catalog();

/// Initial velocity. kind: zero, random (random_field on the Galerkin space
/// with the given decay, normalized in homogeneous H^1) or mode (basis field
/// `mode` scaled to homogeneous H^1 norm `h1`).
struct InitialCondition {
    std::string kind = "zero";
    double h1 = 1.0;
    double decay = 2.0;
    std::size_t mode = 0;
};

/// Kind-specific parameters. Only the keys of the selected kind are read;
/// the rest keep their defaults.
struct KindParams {
    std::vector<double> twin_delta{1e-2, 1e-3, 1e-4};
    std::vector<double> jac_eps{1e-2, 5e-3, 2.5e-3, 1.25e-3};
    std::vector<double> decay_m{12, 36};
    double decay_q = 1.0;
    bool decay_noise = true;
    std::size_t decay_ensemble = 16;
    double decay_fit_start = 2.0;
    std::string probe_observable = "bump";
    std::size_t probe_ensemble = 16;
    double probe_eps = 1e-4;
    std::size_t probe_mode = 0;
    double kb_T_avg = 10.0;
    double kb_T_burn = -1.0;
    std::size_t kb_batches = 16;
    int kb_sample_every = 1;
    double kb_alt_h1 = 1.0;
    std::size_t audit_ensemble = 64;
    double audit_fit_from = 5.0;
    double audit_fit_to = 20.0;
    double audit_min_r2 = 0.95;
    double exp_eta = 1e-3;
    std::vector<double> exp_T{2, 4, 6, 8, 10};
    std::size_t exp_ensemble = 32;
    double exp_min_r2 = 0.9;
    double support_r2 = 0.1;
    double support_eps = 1e-3;
    double support_amplitude = 0.0;
    double support_omega = 1.0;
    std::size_t support_mode = 0;
    double support_T_max = 10.0;
};

/// One stored experiment. Round-trips through to_config()/parse_spec().
struct ExperimentSpec {
    std::string kind;
    std::string output;  ///< output directory, relative to the output root
    SimConfig sim;
    InitialCondition u0;
    KindParams params;
};

/// Throws ConfigError with source:line context on unknown kinds, bad values
/// and unrecognized keys.
ExperimentSpec parse_spec(const FlatConfig& cfg);
ExperimentSpec load_spec(const std::string& path);
/// Canonical text of a spec, covering every key that affects the run.
FlatConfig to_config(const ExperimentSpec& spec);

/// Builds the mode set and simulator, checks the grid floor and runs the
/// coefficient validators (throws AssumptionViolation / ResolutionError).
void validate_spec(const ExperimentSpec& spec);

SpectralField make_initial(const ExperimentSpec& spec, const Simulator& sim);

struct Assertion {
    std::string name;
    bool passed = true;
    std::string detail;
};

struct RunResult {
    std::filesystem::path directory;
    std::vector<std::string> files;  ///< relative to directory, manifest excluded
    std::vector<Assertion> assertions;
    std::vector<std::string> warnings;

    bool passed() const;
};

/// Output root: $TAMED_NSE_OUTPUT_ROOT when set, else the working directory.
std::filesystem::path output_root();

/// Runs the experiment, writes its outputs and manifest.json under
/// root / spec.output and prints one PASS/FAIL line per assertion to `log`.
RunResult run_experiment(const ExperimentSpec& spec, const std::filesystem::path& root, std::ostream& log);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// Exit codes of the command-line tool.
enum ExitCode : int {
    exit_ok = 0,
    exit_assertion = 1,
    exit_usage = 2,
    exit_config = 3,
    exit_assumption = 4,
    exit_resolution = 5,
    exit_blowup = 6,
    exit_io = 7,
    exit_other = 8,
};

/// Maps the active exception to an exit code and prints its message.
int report_exception(std::ostream& err);

}  // namespace tamed
