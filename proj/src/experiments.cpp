#include "tamed/experiments.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "tamed/ergodicity.hpp"
#include "tamed/errors.hpp"
#include "tamed/observables.hpp"
#include "tamed/sensitivity.hpp"
#include "tamed/trajectory_io.hpp"

#ifndef TAMED_VERSION
#define TAMED_VERSION "unknown"
#endif

namespace tamed {
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr std::uint32_t kInitialLane = 0xA55A0010u;
constexpr std::uint32_t kDirectionLane = 0xA55A0011u;
constexpr double kStructureTol = 1e-12;

const std::vector<std::string>& kind_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& k : experiment_catalog()) out.push_back(k.name);
        return out;
    }();
    return names;
}

std::size_t to_size(const FlatConfig& cfg, const std::string& key, long long fallback, long long min_value) {
    const long long v = cfg.get_int(key, fallback);
    if (v < min_value)
        throw ConfigError(cfg.source() + ":" + std::to_string(cfg.line_of(key)) + ": key '" + key + "': must be >= " +
                          std::to_string(min_value));
    return static_cast<std::size_t>(v);
}

void require(bool ok, const FlatConfig& cfg, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(cfg.source() + ":" + std::to_string(cfg.line_of(key)) + ": key '" + key + "': " + what);
}

std::string join(const std::vector<std::string>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + xs[i];
    return out;
}

/// Small CSV writer with shortest round-trip numbers.
class Table {
public:
    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

    void row(const std::vector<std::string>& cells) { rows_.push_back(cells); }
    void row(const std::vector<double>& cells) {
        std::vector<std::string> s;
        for (double x : cells) s.push_back(format_double(x));
        rows_.push_back(std::move(s));
    }

    std::string str() const {
        std::string out;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
            out += '\n';
        };
        line(header_);
        for (const auto& r : rows_) line(r);
        return out;
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

class Outputs {
public:
    Outputs(fs::path dir, RunResult& result) : dir_(std::move(dir)), result_(result) {}

    void write(const std::string& name, const std::string& bytes) {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) throw IoError("cannot write '" + (dir_ / name).string() + "'");
        out << bytes;
        if (!out) throw IoError("write failed for '" + (dir_ / name).string() + "'");
        result_.files.push_back(name);
    }

    void trajectory(const std::string& name, const TrajectoryRecord& rec) {
        std::ostringstream s;
        write_csv(s, rec);
        write(name, s.str());
    }

    void snapshots(const std::string& name, const TrajectoryRecord& rec) {
        std::ostringstream s(std::ios::binary);
        write_snapshots(s, rec);
        write(name, s.str());
    }

    void check(const std::string& name, bool passed, const std::string& detail) {
        result_.assertions.push_back({name, passed, detail});
    }

    void warn(const std::string& what) { result_.warnings.push_back(what); }

private:
    fs::path dir_;
    RunResult& result_;
};

void check_structure(Outputs& out, const std::vector<const TrajectoryRecord*>& records) {
    double div = 0.0, imag = 0.0;
    for (const auto* r : records)
        for (const auto& row : r->rows) {
            div = std::max(div, row.div_residual);
            imag = std::max(imag, row.imag_residual);
        }
    out.check("divergence_free", div < kStructureTol, "max |k.u|/||u|| = " + format_double(div));
    out.check("real_valued", imag < kStructureTol, "max grid imaginary residue = " + format_double(imag));
}

SpectralField random_direction(const Simulator& sim, std::uint64_t seed) {
    CounterStream rng(seed, kDirectionLane);
    return random_field(sim.modes(), sim.galerkin_dim(), rng, 2.0, 1.0, 1, NormConvention::full);
}

std::vector<TrajectoryRecord> ensemble(const Simulator& sim, const SpectralField& u0, std::size_t count) {
    return parallel_map(count, [&](std::size_t p) { return sim.simulate(u0, static_cast<std::uint32_t>(p)); });
}

// ---- kinds -----------------------------------------------------------------

void run_simulate(const ExperimentSpec& spec, Outputs& out) {
    const Simulator sim(spec.sim);
    const SpectralField u0 = make_initial(spec, sim);
    const TrajectoryRecord rec = sim.simulate(u0, 0);
    out.trajectory("trajectory.csv", rec);
    if (spec.sim.snapshots) out.snapshots("snapshots.bin", rec);
    check_structure(out, {&rec});
}

void run_twin(const ExperimentSpec& spec, Outputs& out) {
    const Simulator sim(spec.sim);
    const SpectralField u0 = make_initial(spec, sim);
    const TwinRecord same = sim.twin_simulate(u0, u0, 0);
    bool identical = same.first.rows.size() == same.second.rows.size();
    for (std::size_t i = 0; identical && i < same.first.rows.size(); ++i) {
        const RecordRow& a = same.first.rows[i];
        const RecordRow& b = same.second.rows[i];
        identical = a.h0 == b.h0 && a.h1_full == b.h1_full && a.h2_full == b.h2_full && a.cn == b.cn;
    }
    for (double d : same.dist_h0) identical = identical && d == 0.0;
    out.check("identical_twins", identical, "same initial data and seed give bitwise equal paths");

    const SpectralField w = random_direction(sim, spec.sim.seed);
    std::vector<TwinRecord> twins;
    for (double delta : spec.params.twin_delta) twins.push_back(sim.twin_simulate(u0, u0 + delta * w, 0));

    std::vector<std::string> header{"t"};
    for (std::size_t i = 0; i < twins.size(); ++i) header.push_back("dist_h1_" + std::to_string(i));
    Table curves(header);
    for (std::size_t r = 0; r < same.t.size(); ++r) {
        std::vector<double> row{same.t[r]};
        for (const auto& tw : twins) row.push_back(tw.dist_h1[r]);
        curves.row(row);
    }
    out.write("twin.csv", curves.str());

    Table ratios({"delta", "sup_dist_h1_sq_over_delta_sq"});
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = 0; i < twins.size(); ++i) {
        const double delta = spec.params.twin_delta[i];
        double sup = 0.0;
        for (double d : twins[i].dist_h1) sup = std::max(sup, d * d / (delta * delta));
        ratios.row(std::vector<double>{delta, sup});
        lo = std::min(lo, sup);
        hi = std::max(hi, sup);
    }
    out.write("twin_ratios.csv", ratios.str());
    if (!twins.empty())
        out.check("continuity", hi < 10.0 * lo,
                  "sup ||u - u'||^2_{H^1} / delta^2 ranges over [" + format_double(lo) + ", " + format_double(hi) + "]");
    check_structure(out, {&same.first});
}

void run_jacobian(const ExperimentSpec& spec, Outputs& out) {
    const Simulator sim(spec.sim);
    const SpectralField u0 = make_initial(spec, sim);
    const SpectralField v0 = random_direction(sim, spec.sim.seed);
    const JacobianCheck jc = jacobian_check(spec.sim, u0, v0, spec.params.jac_eps, 0);
    Table t({"eps", "error_h1", "ratio_to_next"});
    for (std::size_t i = 0; i < jc.eps.size(); ++i)
        t.row(std::vector<double>{jc.eps[i], jc.error[i],
                                  i < jc.ratio.size() ? jc.ratio[i] : std::numeric_limits<double>::quiet_NaN()});
    out.write("jacobian.csv", t.str());
    for (std::size_t i = 0; i < jc.ratio.size(); ++i) {
        const double eps_ratio = jc.eps[i] / jc.eps[i + 1];
        // consecutive halvings expect a ratio near 2; other spacings scale accordingly
        const bool ok = jc.ratio[i] >= 0.8 * eps_ratio && jc.ratio[i] <= 1.2 * eps_ratio;
        out.check("linear_in_eps_" + std::to_string(i), ok,
                  "error ratio " + format_double(jc.ratio[i]) + " for eps ratio " + format_double(eps_ratio));
    }
}

void run_control_decay(const ExperimentSpec& spec, Outputs& out) {
    DecaySettings st;
    st.base = spec.sim;
    for (double m : spec.params.decay_m) st.m_values.push_back(static_cast<std::size_t>(m));
    st.q = spec.params.decay_q;
    st.noise = spec.params.decay_noise;
    st.ensemble = spec.params.decay_ensemble;
    st.fit_start = spec.params.decay_fit_start;
    const auto points = highmode_decay_experiment(st);

    Table summary({"m", "lambda_next", "rate", "rate_std_error", "fit_r_squared", "cost"});
    Table curves({"m", "t", "mean_high_h1_sq", "mean_v_h1_sq", "mean_cost"});
    for (const auto& p : points) {
        summary.row(std::vector<double>{double(p.m), p.lambda_next, p.rate, p.rate_std_error, p.fit_r_squared, p.cost});
        for (std::size_t i = 0; i < p.t.size(); ++i)
            curves.row(std::vector<double>{double(p.m), p.t[i], p.mean_high_sq[i], p.mean_v_sq[i], p.mean_cost[i]});
    }
    out.write("decay.csv", summary.str());
    out.write("decay_curves.csv", curves.str());

    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        const std::string tag = "_m" + std::to_string(p.m);
        out.check("decays" + tag, p.rate < 0.0, "rate " + format_double(p.rate));
        out.check("cost_finite" + tag, std::isfinite(p.cost), "E int |vdot|^2 = " + format_double(p.cost));
        if (!st.noise) {
            const double rel = std::abs(p.rate / -p.lambda_next - 1.0);
            out.check("heat_rate" + tag, rel < 0.02,
                      "rate " + format_double(p.rate) + " vs -lambda_{m+1} = " + format_double(-p.lambda_next));
        }
        if (i > 0 && points[i - 1].m < p.m)
            out.check("faster_for_larger_m" + tag, p.rate < points[i - 1].rate,
                      format_double(p.rate) + " < " + format_double(points[i - 1].rate));
    }
}

void run_gradient_probe(const ExperimentSpec& spec, Outputs& out) {
    const Simulator sim(spec.sim);
    const SpectralField u0 = make_initial(spec, sim);
    const Observable phi = find_observable(observable_catalog(), spec.params.probe_observable);
    const SpectralField v0 = basis_field(sim.modes(), spec.params.probe_mode, BasisScale::H1_homog);
    const GradientProbeReport r =
        gradient_probe(spec.sim, phi, u0, v0, spec.params.probe_ensemble, spec.params.probe_eps);
    json j;
    j["observable"] = phi.name;
    j["paths"] = r.paths;
    j["fd_estimate"] = r.fd_estimate;
    j["fd_std_error"] = r.fd_std_error;
    j["cost_term"] = r.cost_term;
    j["flow_term"] = r.flow_term;
    j["bound"] = r.bound;
    j["mean_v_h1"] = r.mean_v_h1;
    out.write("gradient.json", j.dump(2) + "\n");
    out.check("gradient_bound", std::abs(r.fd_estimate) <= r.bound + 3.0 * r.fd_std_error,
              "|" + format_double(r.fd_estimate) + "| <= " + format_double(r.bound) + " + 3 * " +
                  format_double(r.fd_std_error));
}

void run_kb(const ExperimentSpec& spec, Outputs& out) {
    const Simulator sim(spec.sim);
    const SpectralField u0 = make_initial(spec, sim);
    CounterStream rng(spec.sim.seed, kInitialLane + 1);
    const SpectralField alt = random_field(sim.modes(), sim.galerkin_dim(), rng, 2.0, spec.params.kb_alt_h1, 1,
                                           NormConvention::homogeneous);
    const auto catalog = observable_catalog();
    KbSettings st;
    st.average = spec.params.kb_T_avg;
    st.burn_in = spec.params.kb_T_burn;
    st.batches = spec.params.kb_batches;
    st.sample_every = spec.params.kb_sample_every;
    const auto reports = parallel_map(2, [&](std::size_t i) {
        KbSettings s = st;
        s.path = static_cast<std::uint32_t>(i);
        return kb_average(spec.sim, i == 0 ? u0 : alt, catalog, s);
    });
    Table t({"observable", "mean_a", "std_error_a", "mean_b", "std_error_b", "z"});
    for (std::size_t o = 0; o < catalog.size(); ++o) {
        const BatchMeans& a = reports[0].estimates[o].stats;
        const BatchMeans& b = reports[1].estimates[o].stats;
        const double se = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
        const double diff = std::abs(a.mean - b.mean);
        const double z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        t.row({catalog[o].name, format_double(a.mean), format_double(a.std_error), format_double(b.mean),
               format_double(b.std_error), format_double(z)});
        out.check("agree_" + catalog[o].name, z <= 3.0, "|difference| / combined standard error = " + format_double(z));
    }
    out.write("kb.csv", t.str());
}

void run_moment_audit(const ExperimentSpec& spec, Outputs& out) {
    const Simulator sim(spec.sim);
    const SpectralField u0 = make_initial(spec, sim);
    const auto records = ensemble(sim, u0, spec.params.audit_ensemble);
    const MomentAudit a = moment_audit(records, spec.params.audit_fit_from, spec.params.audit_fit_to);
    Table t({"t", "mean_h0_sq", "int_h1_sq", "int_l4_pow4", "composite"});
    for (std::size_t i = 0; i < a.t.size(); ++i)
        t.row(std::vector<double>{a.t[i], a.mean_h0_sq[i], a.int_h1_sq[i], a.int_l4[i], a.composite[i]});
    out.write("audit.csv", t.str());
    json j;
    j["paths"] = records.size();
    j["slope"] = a.fit.slope;
    j["intercept"] = a.fit.intercept;
    j["r_squared"] = a.fit.r_squared;
    out.write("audit.json", j.dump(2) + "\n");
    out.check("components_nonnegative", a.components_nonnegative, "");
    out.check("integrals_nondecreasing", a.integrals_nondecreasing, "");
    out.check("linear_growth", a.fit.r_squared > spec.params.audit_min_r2,
              "slope " + format_double(a.fit.slope) + ", R^2 " + format_double(a.fit.r_squared));
    std::vector<const TrajectoryRecord*> ptrs;
    for (const auto& r : records) ptrs.push_back(&r);
    check_structure(out, ptrs);
}

void run_exp_moment(const ExperimentSpec& spec, Outputs& out) {
    const Simulator sim(spec.sim);
    const SpectralField u0 = make_initial(spec, sim);
    const auto records = ensemble(sim, u0, spec.params.exp_ensemble);
    const ExpMomentReport r = exp_moment_probe(records, spec.params.exp_eta, spec.params.exp_T);
    Table t({"T", "estimate", "log_estimate", "relative_variance", "terminal_estimate", "saturated"});
    for (const auto& p : r.points) {
        t.row(std::vector<double>{p.T, p.estimate, p.log_estimate, p.relative_variance, p.terminal_estimate,
                                  double(p.saturated)});
        if (p.heavy_tail) out.warn("relative variance " + format_double(p.relative_variance) + " at T = " + format_double(p.T));
        if (p.saturated) out.warn(std::to_string(p.saturated) + " exponents capped at T = " + format_double(p.T));
    }
    out.write("exp_moment.csv", t.str());
    if (r.points.size() >= 3)
        out.check("log_linear_growth", r.fit.r_squared > spec.params.exp_min_r2,
                  "slope " + format_double(r.fit.slope) + ", R^2 " + format_double(r.fit.r_squared));
}

void run_support(const ExperimentSpec& spec, Outputs& out) {
    const Simulator sim(spec.sim);
    const SpectralField u0 = make_initial(spec, sim);
    const SmallPath w{spec.params.support_amplitude, spec.params.support_omega, spec.params.support_mode};
    const SupportReport r = support_probe(spec.sim, u0, w, spec.params.support_r2, spec.params.support_T_max);
    Table t({"t", "h1_homog", "h0"});
    for (std::size_t i = 0; i < r.t.size(); ++i) t.row(std::vector<double>{r.t[i], r.h1[i], r.h0[i]});
    out.write("support.csv", t.str());
    out.check("reaches_target", r.found,
              r.found ? "||u(T)||_{H^1} <= " + format_double(spec.params.support_r2) + " at T = " + format_double(r.hit_time)
                      : "no hit before T = " + format_double(spec.params.support_T_max) + ", final " +
                            format_double(r.h1.back()));
    out.check("small_path", r.path_h6_sup < spec.params.support_eps,
              "sup ||w||_{H^6} = " + format_double(r.path_h6_sup));
    if (w.amplitude == 0.0 && !spec.sim.model.has_forcing() && spec.sim.model.a_f == 0.0) {
        bool monotone = true;
        for (std::size_t i = 1; i < r.h0.size(); ++i) monotone = monotone && r.h0[i] <= r.h0[i - 1];
        out.check("energy_decreasing", monotone, "||u(t)||_{H^0} nonincreasing along the unforced path");
    }
}


}  // namespace

const std::vector<KindInfo>& experiment_catalog() {
    static const std::vector<KindInfo> kinds{
        {"simulate", "one Galerkin path with norm and structure diagnostics",
         "Galerkin SDE with tamed drift: well-posed, divergence-free, real"},
        {"twin", "shared-noise twin paths from equal and nearby initial data",
         "pathwise uniqueness and Feller continuity in the initial datum"},
        {"jacobian_check", "finite differences of the flow against the derivative flow",
         "derivative flow solves the linearized equation along the path"},
        {"control_decay", "low/high-mode control and decay of the high-mode part",
         "high modes of the controlled tangent decay at rate set by lambda_{m+1}"},
        {"gradient_probe", "finite-difference gradient of the semigroup against the control bound",
         "asymptotic gradient estimate: |grad T_t phi| <= sup|phi| cost + sup|grad phi| E||v(t)||"},
        {"kb_invariant", "time averages of bounded observables from two initial conditions",
         "Krylov-Bogoliubov averages converge to the unique invariant measure"},
        {"moment_audit", "ensemble moments E||u||^2 plus time integrals of H^1 and L^4 moments",
         "E||u(t)||^2 + int E||u||^2_{H^1} + int E||u||^4_{L^4} grows at most linearly"},
        {"exp_moment", "Monte Carlo exponential moments of the integrated enstrophy functional",
         "E exp(eta int N(u)) <= exp(C ||u0||^2_{H^1} + C t)"},
        {"support_probe", "deterministic path with a small prescribed noise path",
         "from any H^1 ball the small-noise path enters any smaller ball"},
    };
    return kinds;
}

ExperimentSpec parse_spec(const FlatConfig& cfg) {
    ExperimentSpec s;
    s.kind = cfg.get_string("kind");
    const auto& names = kind_names();
    require(std::find(names.begin(), names.end(), s.kind) != names.end(), cfg, "kind",
            "unknown experiment kind '" + s.kind + "' (expected one of " + join(names) + ")");
    s.output = cfg.get_string("output", s.kind);
    require(!s.output.empty() && fs::path(s.output).is_relative(), cfg, "output", "must be a relative path");

    SimConfig& sim = s.sim;
    sim.seed = cfg.get_u64("seed", 0);
    sim.k_max = static_cast<int>(cfg.get_int("K_max", 2));
    require(sim.k_max >= 1 && sim.k_max <= 8, cfg, "K_max", "must be in [1, 8]");
    sim.n = to_size(cfg, "n", 0, 0);
    sim.dt = cfg.get_double("dt", 1e-3);
    require(sim.dt > 0.0 && std::isfinite(sim.dt), cfg, "dt", "must be positive");
    sim.horizon = cfg.get_double("T", 1.0);
    require(sim.horizon >= 0.0 && std::isfinite(sim.horizon), cfg, "T", "must be nonnegative");
    sim.grid = static_cast<int>(cfg.get_int("grid", 0));
    require(sim.grid >= 0, cfg, "grid", "must be nonnegative (0 selects the dealias floor)");
    try {
        sim.scheme = parse_scheme(cfg.get_string("scheme", "semi_implicit_em"));
        sim.noise = parse_noise_kind(cfg.get_string("noise", "none"));
    } catch (const ConfigError& e) {
        throw ConfigError(cfg.source() + ": " + e.what());
    }
    sim.record_stride = static_cast<int>(cfg.get_int("record_stride", 1));
    require(sim.record_stride >= 1, cfg, "record_stride", "must be at least 1");
    sim.snapshots = cfg.get_bool("snapshots", false);
    sim.blowup_threshold = cfg.get_double("blowup_threshold", 1e12);
    require(sim.blowup_threshold > 0.0, cfg, "blowup_threshold", "must be positive");
    sim.options.advection = cfg.get_bool("advection", true);
    sim.options.taming = cfg.get_bool("taming", true);
    sim.model = read_model(cfg);
    sim.taming = read_taming(cfg);
    sim.additive = read_additive(cfg);

    s.u0.kind = cfg.get_string("u0", "zero");
    require(s.u0.kind == "zero" || s.u0.kind == "random" || s.u0.kind == "mode", cfg, "u0",
            "expected zero, random or mode");
    if (s.u0.kind != "zero") {
        s.u0.h1 = cfg.get_double("u0.h1", 1.0);
        require(s.u0.h1 >= 0.0, cfg, "u0.h1", "must be nonnegative");
    }
    if (s.u0.kind == "random") s.u0.decay = cfg.get_double("u0.decay", 2.0);
    if (s.u0.kind == "mode") s.u0.mode = to_size(cfg, "u0.mode", 0, 0);

    KindParams& p = s.params;
    const std::string& k = s.kind;
    auto list = [&](const std::string& key, std::vector<double>& dst) {
        if (cfg.has(key)) dst = cfg.get_doubles(key);
        require(!dst.empty(), cfg, key, "must not be empty");
    };
    if (k == "twin") {
        list("twin.delta", p.twin_delta);
        for (double d : p.twin_delta) require(d > 0.0, cfg, "twin.delta", "entries must be positive");
    } else if (k == "jacobian_check") {
        list("jac.eps", p.jac_eps);
        for (double e : p.jac_eps) require(e > 0.0, cfg, "jac.eps", "entries must be positive");
    } else if (k == "control_decay") {
        list("decay.m", p.decay_m);
        for (double m : p.decay_m) require(m >= 1.0 && m == std::floor(m), cfg, "decay.m", "entries must be positive integers");
        p.decay_q = cfg.get_double("decay.q", p.decay_q);
        require(p.decay_q > 0.0, cfg, "decay.q", "must be positive");
        p.decay_noise = cfg.get_bool("decay.noise", p.decay_noise);
        p.decay_ensemble = to_size(cfg, "decay.ensemble", 16, 1);
        p.decay_fit_start = cfg.get_double("decay.fit_start", p.decay_fit_start);
    } else if (k == "gradient_probe") {
        p.probe_observable = cfg.get_string("probe.observable", p.probe_observable);
        p.probe_ensemble = to_size(cfg, "probe.ensemble", 16, 1);
        p.probe_eps = cfg.get_double("probe.eps", p.probe_eps);
        require(p.probe_eps > 0.0, cfg, "probe.eps", "must be positive");
        p.probe_mode = to_size(cfg, "probe.mode", 0, 0);
        require(sim.noise == NoiseKind::additive, cfg, "noise", "gradient_probe requires additive noise");
    } else if (k == "kb_invariant") {
        p.kb_T_avg = cfg.get_double("kb.T_avg", p.kb_T_avg);
        require(p.kb_T_avg > 0.0, cfg, "kb.T_avg", "must be positive");
        p.kb_T_burn = cfg.get_double("kb.T_burn", p.kb_T_burn);
        p.kb_batches = to_size(cfg, "kb.batches", 16, 8);
        p.kb_sample_every = static_cast<int>(to_size(cfg, "kb.sample_every", 1, 1));
        p.kb_alt_h1 = cfg.get_double("kb.alt_h1", p.kb_alt_h1);
        require(p.kb_alt_h1 >= 0.0, cfg, "kb.alt_h1", "must be nonnegative");
    } else if (k == "moment_audit") {
        p.audit_ensemble = to_size(cfg, "audit.ensemble", 64, 1);
        p.audit_fit_from = cfg.get_double("audit.fit_from", p.audit_fit_from);
        p.audit_fit_to = cfg.get_double("audit.fit_to", p.audit_fit_to);
        require(p.audit_fit_to > p.audit_fit_from, cfg, "audit.fit_to", "must exceed audit.fit_from");
        p.audit_min_r2 = cfg.get_double("audit.min_r2", p.audit_min_r2);
        require(s.u0.kind == "zero", cfg, "u0", "moment_audit starts from u0 = 0");
    } else if (k == "exp_moment") {
        p.exp_eta = cfg.get_double("exp.eta", p.exp_eta);
        require(p.exp_eta >= 0.0, cfg, "exp.eta", "must be nonnegative");
        list("exp.T", p.exp_T);
        for (double T : p.exp_T) require(T <= sim.horizon + 1e-12, cfg, "exp.T", "entries must not exceed T");
        p.exp_ensemble = to_size(cfg, "exp.ensemble", 32, 1);
        p.exp_min_r2 = cfg.get_double("exp.min_r2", p.exp_min_r2);
    } else if (k == "support_probe") {
        p.support_r2 = cfg.get_double("support.r2", p.support_r2);
        require(p.support_r2 > 0.0, cfg, "support.r2", "must be positive");
        p.support_eps = cfg.get_double("support.eps", p.support_eps);
        require(p.support_eps > 0.0, cfg, "support.eps", "must be positive");
        p.support_amplitude = cfg.get_double("support.amplitude", p.support_amplitude);
        p.support_omega = cfg.get_double("support.omega", p.support_omega);
        p.support_mode = to_size(cfg, "support.mode", 0, 0);
        p.support_T_max = cfg.get_double("support.T_max", p.support_T_max);
        require(p.support_T_max > 0.0, cfg, "support.T_max", "must be positive");
    }
    cfg.reject_unused();
    return s;
}

ExperimentSpec load_spec(const std::string& path) { return parse_spec(FlatConfig::load(path)); }

FlatConfig to_config(const ExperimentSpec& s) {
    FlatConfig c;
    const SimConfig& sim = s.sim;
    c.set("kind", s.kind);
    c.set("output", s.output);
    c.set("seed", std::to_string(sim.seed));
    c.set("K_max", std::to_string(sim.k_max));
    c.set("n", std::to_string(sim.n));
    c.set("dt", format_double(sim.dt));
    c.set("T", format_double(sim.horizon));
    c.set("grid", std::to_string(sim.grid));
    c.set("scheme", to_string(sim.scheme));
    c.set("noise", to_string(sim.noise));
    c.set("record_stride", std::to_string(sim.record_stride));
    c.set("snapshots", sim.snapshots ? "true" : "false");
    c.set("blowup_threshold", format_double(sim.blowup_threshold));
    c.set("advection", sim.options.advection ? "true" : "false");
    c.set("taming", sim.options.taming ? "true" : "false");
    write_taming(c, sim.taming);
    write_model(c, sim.model);
    write_additive(c, sim.additive);
    c.set("u0", s.u0.kind);
    if (s.u0.kind != "zero") c.set("u0.h1", format_double(s.u0.h1));
    if (s.u0.kind == "random") c.set("u0.decay", format_double(s.u0.decay));
    if (s.u0.kind == "mode") c.set("u0.mode", std::to_string(s.u0.mode));

    const KindParams& p = s.params;
    const std::string& k = s.kind;
    auto b = [](bool x) { return std::string(x ? "true" : "false"); };
    if (k == "twin") {
        c.set("twin.delta", format_doubles(p.twin_delta));
    } else if (k == "jacobian_check") {
        c.set("jac.eps", format_doubles(p.jac_eps));
    } else if (k == "control_decay") {
        c.set("decay.m", format_doubles(p.decay_m));
        c.set("decay.q", format_double(p.decay_q));
        c.set("decay.noise", b(p.decay_noise));
        c.set("decay.ensemble", std::to_string(p.decay_ensemble));
        c.set("decay.fit_start", format_double(p.decay_fit_start));
    } else if (k == "gradient_probe") {
        c.set("probe.observable", p.probe_observable);
        c.set("probe.ensemble", std::to_string(p.probe_ensemble));
        c.set("probe.eps", format_double(p.probe_eps));
        c.set("probe.mode", std::to_string(p.probe_mode));
    } else if (k == "kb_invariant") {
        c.set("kb.T_avg", format_double(p.kb_T_avg));
        c.set("kb.T_burn", format_double(p.kb_T_burn));
        c.set("kb.batches", std::to_string(p.kb_batches));
        c.set("kb.sample_every", std::to_string(p.kb_sample_every));
        c.set("kb.alt_h1", format_double(p.kb_alt_h1));
    } else if (k == "moment_audit") {
        c.set("audit.ensemble", std::to_string(p.audit_ensemble));
        c.set("audit.fit_from", format_double(p.audit_fit_from));
        c.set("audit.fit_to", format_double(p.audit_fit_to));
        c.set("audit.min_r2", format_double(p.audit_min_r2));
    } else if (k == "exp_moment") {
        c.set("exp.eta", format_double(p.exp_eta));
        c.set("exp.T", format_doubles(p.exp_T));
        c.set("exp.ensemble", std::to_string(p.exp_ensemble));
        c.set("exp.min_r2", format_double(p.exp_min_r2));
    } else if (k == "support_probe") {
        c.set("support.r2", format_double(p.support_r2));
        c.set("support.eps", format_double(p.support_eps));
        c.set("support.amplitude", format_double(p.support_amplitude));
        c.set("support.omega", format_double(p.support_omega));
        c.set("support.mode", std::to_string(p.support_mode));
        c.set("support.T_max", format_double(p.support_T_max));
    }
    return c;
}

void validate_spec(const ExperimentSpec& spec) {
    const Simulator sim(spec.sim);
    try {
        check_shape(spec.sim.additive, *sim.modes());
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("additive noise: ") + e.what());
    }
    if (spec.sim.additive.m() > sim.galerkin_dim())
        throw ConfigError("additive noise forces modes beyond the Galerkin dimension n");
    const CoefficientModel& m = spec.sim.model;
    if (spec.sim.noise == NoiseKind::multiplicative || m.has_forcing() || m.a_f != 0.0)
        validate_assumptions(m, sim.modes(), 10000, spec.sim.seed);
    if (spec.u0.kind == "mode" && spec.u0.mode >= sim.galerkin_dim())
        throw ConfigError("u0.mode lies outside the Galerkin space");
    if (spec.kind == "support_probe" && spec.params.support_mode >= sim.galerkin_dim())
        throw ConfigError("support.mode lies outside the Galerkin space");
    if (spec.kind == "gradient_probe" && spec.params.probe_mode >= sim.galerkin_dim())
        throw ConfigError("probe.mode lies outside the Galerkin space");
    if (spec.kind == "control_decay")
        for (double mv : spec.params.decay_m) {
            const auto mm = static_cast<std::size_t>(mv);
            if (mm >= sim.galerkin_dim() || !sim.modes()->is_closed_prefix(mm))
                throw ConfigError("decay.m = " + std::to_string(mm) +
                                  " must be a conjugate-closed prefix below the Galerkin dimension");
        }
}

SpectralField make_initial(const ExperimentSpec& spec, const Simulator& sim) {
    const ModeSetPtr& modes = sim.modes();
    if (spec.u0.kind == "zero") return SpectralField(modes);
    if (spec.u0.kind == "mode") {
        if (spec.u0.mode >= sim.galerkin_dim()) throw ConfigError("u0.mode lies outside the Galerkin space");
        return spec.u0.h1 * basis_field(modes, spec.u0.mode, BasisScale::H1_homog);
    }
    CounterStream rng(spec.sim.seed, kInitialLane);
    return random_field(modes, sim.galerkin_dim(), rng, spec.u0.decay, spec.u0.h1, 1, NormConvention::homogeneous);
}

bool RunResult::passed() const {
    return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.passed; });
}

fs::path output_root() {
    if (const char* env = std::getenv("TAMED_NSE_OUTPUT_ROOT"); env && *env) return fs::path(env);
    return fs::current_path();
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

RunResult run_experiment(const ExperimentSpec& spec, const fs::path& root, std::ostream& log) {
    validate_spec(spec);
    RunResult result;
    result.directory = root / spec.output;
    std::error_code ec;
    fs::create_directories(result.directory, ec);
    if (ec) throw IoError("cannot create '" + result.directory.string() + "': " + ec.message());
    Outputs out(result.directory, result);
    const std::string canonical = to_config(spec).to_string();
    out.write("spec.cfg", canonical);

    const std::string& k = spec.kind;
    if (k == "simulate") run_simulate(spec, out);
    else if (k == "twin") run_twin(spec, out);
    else if (k == "jacobian_check") run_jacobian(spec, out);
    else if (k == "control_decay") run_control_decay(spec, out);
    else if (k == "gradient_probe") run_gradient_probe(spec, out);
    else if (k == "kb_invariant") run_kb(spec, out);
    else if (k == "moment_audit") run_moment_audit(spec, out);
    else if (k == "exp_moment") run_exp_moment(spec, out);
    else if (k == "support_probe") run_support(spec, out);

    json m;
    m["kind"] = spec.kind;
    m["code_version"] = TAMED_VERSION;
    m["seed"] = spec.sim.seed;
    m["spec_sha256"] = sha256_hex(canonical);
    json files = json::array();
    for (const auto& name : result.files) {
        std::ifstream in(result.directory / name, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        const std::string bytes = ss.str();
        files.push_back({{"name", name}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
    }
    m["files"] = files;
    json asserts = json::array();
    for (const auto& a : result.assertions)
        asserts.push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
    m["assertions"] = asserts;
    m["warnings"] = result.warnings;
    m["passed"] = result.passed();
    {
        std::ofstream f(result.directory / "manifest.json", std::ios::binary);
        if (!f) throw IoError("cannot write manifest in '" + result.directory.string() + "'");
        f << m.dump(2) << '\n';
    }

    for (const auto& w : result.warnings) log << "WARN " << spec.kind << ": " << w << '\n';
    for (const auto& a : result.assertions)
        log << (a.passed ? "PASS " : "FAIL ") << spec.kind << "." << a.name << (a.detail.empty() ? "" : ": ")
            << a.detail << '\n';
    return result;
}

int report_exception(std::ostream& err) {
    try {
        throw;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const AssumptionViolation& e) {
        err << "assumption violated [" << e.clause() << "]: " << e.what() << '\n';
        return exit_assumption;
    } catch (const ResolutionError& e) {
        err << "resolution error: " << e.what() << '\n';
        return exit_resolution;
    } catch (const BlowUpError& e) {
        err << "blow-up: " << e.what() << '\n';
        return exit_blowup;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return exit_io;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_other;
    } catch (...) {
        err << "unknown error\n";
        return exit_other;
    }
}

}  // namespace tamed
