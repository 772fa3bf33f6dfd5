#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tamed/errors.hpp"
#include "tamed/experiments.hpp"

using namespace tamed;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("tamed_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string config_error(const std::string& text) {
    try {
        parse_spec(FlatConfig::parse(text, "spec.cfg"));
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("catalog lists nine kinds with anchors") {
    const auto& c = experiment_catalog();
    CHECK(c.size() == 9);
    std::set<std::string> names;
    for (const auto& k : c) {
        names.insert(k.name);
        CHECK_FALSE(k.description.empty());
        CHECK_FALSE(k.anchor.empty());
    }
    CHECK(names == std::set<std::string>{"simulate", "twin", "jacobian_check", "control_decay", "gradient_probe",
                                         "kb_invariant", "moment_audit", "exp_moment", "support_probe"});
    CHECK(&experiment_catalog() == &c);
}

TEST_CASE("config errors carry file and line context") {
    CHECK(config_error("kind = simulate\nfoo = 1\n").find("spec.cfg:2") != std::string::npos);
    CHECK(config_error("kind = simulate\nfoo = 1\n").find("foo") != std::string::npos);
    CHECK(config_error("kind = simulate\n\ndt = fast\n").find("spec.cfg:3") != std::string::npos);
    CHECK(config_error("kind = nope\n").find("support_probe") != std::string::npos);
    CHECK(config_error("kind = simulate\nT = 1\nT = 2\n").find("spec.cfg:3") != std::string::npos);
    CHECK(config_error("kind = simulate\nscheme = rk4\n") != "");
    CHECK(config_error("kind = moment_audit\nu0 = random\n").find("u0 = 0") != std::string::npos);
    CHECK(config_error("kind = gradient_probe\n").find("additive") != std::string::npos);
    CHECK(config_error("kind = simulate\nm = 2\nq = 1, 2, 3\n").find("m = 2") != std::string::npos);
    // keys of other kinds are rejected too
    CHECK(config_error("kind = simulate\ntwin.delta = 0.1\n").find("twin.delta") != std::string::npos);
}

TEST_CASE("stored specs round-trip through their canonical text") {
    for (const auto& entry : fs::directory_iterator(TAMED_SPEC_DIR)) {
        if (entry.path().extension() != ".cfg") continue;
        CAPTURE(entry.path().string());
        const ExperimentSpec a = load_spec(entry.path().string());
        const std::string text = to_config(a).to_string();
        const ExperimentSpec b = parse_spec(FlatConfig::parse(text));
        CHECK(to_config(b).to_string() == text);
    }
}

TEST_CASE("smoke run writes a complete manifest and reruns byte-identically") {
    const fs::path root = scratch("smoke");
    const ExperimentSpec spec = load_spec(std::string(TAMED_SPEC_DIR) + "/smoke.cfg");
    std::ostringstream log;
    const RunResult r = run_experiment(spec, root, log);
    CHECK(r.passed());
    CHECK(log.str().find("PASS simulate.divergence_free") != std::string::npos);
    const auto manifest = nlohmann::json::parse(slurp(r.directory / "manifest.json"));
    CHECK(manifest["kind"] == "simulate");
    CHECK(manifest["seed"] == 1);
    CHECK(manifest["spec_sha256"] == sha256_hex(slurp(r.directory / "spec.cfg")));
    std::set<std::string> listed;
    for (const auto& f : manifest["files"]) {
        listed.insert(f["name"].get<std::string>());
        CHECK(f["sha256"] == sha256_hex(slurp(r.directory / f["name"].get<std::string>())));
    }
    std::set<std::string> on_disk;
    for (const auto& e : fs::directory_iterator(r.directory))
        if (e.path().filename() != "manifest.json") on_disk.insert(e.path().filename().string());
    CHECK(listed == on_disk);
    const std::string csv = slurp(r.directory / "trajectory.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);  // header + initial state

    const std::string first_manifest = slurp(r.directory / "manifest.json");
    run_experiment(spec, root, log);
    CHECK(slurp(r.directory / "trajectory.csv") == csv);
    CHECK(slurp(r.directory / "manifest.json") == first_manifest);
    fs::remove_all(root);
}

TEST_CASE("stored spec re-runs to identical outputs") {
    const fs::path root = scratch("rerun");
    ExperimentSpec spec = load_spec(std::string(TAMED_SPEC_DIR) + "/simulate.cfg");
    spec.sim.horizon = 0.05;
    std::ostringstream log;
    const RunResult a = run_experiment(spec, root, log);
    const std::string first = slurp(a.directory / "trajectory.csv");
    // re-run from the stored canonical spec
    const ExperimentSpec stored = load_spec((a.directory / "spec.cfg").string());
    const RunResult b = run_experiment(stored, root, log);
    CHECK(slurp(b.directory / "trajectory.csv") == first);
    fs::remove_all(root);
}

TEST_CASE("exceptions map to distinct exit codes") {
    auto code = [](auto thrower) {
        std::ostringstream err;
        try {
            thrower();
        } catch (...) {
            return report_exception(err);
        }
        return -1;
    };
    CHECK(code([] { throw ConfigError("x"); }) == exit_config);
    CHECK(code([] { throw AssumptionViolation("sigma-bound", "x"); }) == exit_assumption);
    CHECK(code([] { throw ResolutionError("x"); }) == exit_resolution);
    CHECK(code([] { throw BlowUpError(1.0, 1.0, 1.0, "x"); }) == exit_blowup);
    CHECK(code([] { throw IoError("x"); }) == exit_io);
    CHECK(code([] { throw std::runtime_error("x"); }) == exit_other);
}

TEST_CASE("sha256 and output root") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    setenv("TAMED_NSE_OUTPUT_ROOT", "/tmp/somewhere", 1);
    CHECK(output_root() == fs::path("/tmp/somewhere"));
    unsetenv("TAMED_NSE_OUTPUT_ROOT");
    CHECK(output_root() == fs::current_path());
}

TEST_CASE("validation rejects out-of-range settings") {
    ExperimentSpec s = load_spec(std::string(TAMED_SPEC_DIR) + "/smoke.cfg");
    s.sim.grid = 6;
    CHECK_THROWS_AS(validate_spec(s), ResolutionError);
    s.sim.grid = 0;
    s.sim.noise = NoiseKind::multiplicative;
    s.sim.model.sigma = {0.5, 0.5};
    s.sim.model.k_noise = 2;
    CHECK_THROWS_AS(validate_spec(s), AssumptionViolation);
}
