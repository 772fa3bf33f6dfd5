#include "tamed/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "tamed/errors.hpp"
#include "tamed/stats.hpp"

namespace tamed {
namespace {

void require_additive(const Simulator& sim, const char* what) {
    if (sim.config().noise == NoiseKind::multiplicative)
        throw ConfigError(std::string(what) + " requires additive noise (or none); Q is undefined for multiplicative noise");
}

void require_states(const Simulator& sim, std::span<const SpectralField> states) {
    if (states.size() != sim.step_count() + 1)
        throw InvalidArgument("base path must hold the state at every step (" + std::to_string(sim.step_count() + 1) +
                              " states, got " + std::to_string(states.size()) + ")");
}

SpectralField high_part(const SpectralField& v, std::size_t m) { return v - truncate(v, m); }

}  // namespace

TangentSeries derivative_flow(const Simulator& sim, std::span<const SpectralField> states, std::uint32_t path,
                              const SpectralField& v0) {
    require_states(sim, states);
    sim.check_in_galerkin_space(v0);
    const Dynamics& dyn = sim.dynamics();
    const bool mult = sim.config().noise == NoiseKind::multiplicative;
    const double dt = sim.config().dt;
    TangentSeries out;
    out.t.push_back(0.0);
    out.v.emplace_back(sim.modes(), std::vector<Complex>(v0.amplitudes().begin(), v0.amplitudes().end()));
    for (std::size_t n = 0; n + 1 < states.size(); ++n) {
        const PhysicalState s = dyn.physical(states[n]);
        const std::vector<double> dw = mult ? sim.increments(path, n) : std::vector<double>{};
        const SpectralField& v = out.v.back();
        SpectralField next = dyn.tangent_increment(s, v, dt, dw);
        next += v;
        sim.apply_linear(next, v);
        out.v.push_back(std::move(next));
        out.t.push_back(double(n + 1) * dt);
    }
    return out;
}

TangentSeries derivative_flow(const Simulator& sim, const TrajectoryRecord& rec, const SpectralField& v0) {
    if (rec.snapshots.size() != rec.steps + 1 || rec.rows.size() != rec.steps + 1)
        throw InvalidArgument("derivative_flow needs a snapshot at every step (record stride 1 with snapshots)");
    return derivative_flow(sim, rec.snapshots, rec.path, v0);
}

TangentSeries malliavin_derivative(const Simulator& sim, std::span<const SpectralField> states,
                                   const std::vector<std::vector<double>>& vdot) {
    require_additive(sim, "malliavin_derivative");
    require_states(sim, states);
    if (vdot.size() < states.size() - 1) throw InvalidArgument("control rate shorter than the base path");
    const Dynamics& dyn = sim.dynamics();
    const AdditiveNoiseMap& map = sim.config().additive;
    const double dt = sim.config().dt;
    TangentSeries out;
    out.t.push_back(0.0);
    out.v.emplace_back(sim.modes());
    for (std::size_t n = 0; n + 1 < states.size(); ++n) {
        const PhysicalState s = dyn.physical(states[n]);
        const SpectralField& a = out.v.back();
        SpectralField next = dyn.tangent_increment(s, a, dt, {});
        next.axpy(dt, apply_Q(sim.modes(), map, vdot[n]));
        next += a;
        sim.apply_linear(next, a);
        out.v.push_back(std::move(next));
        out.t.push_back(double(n + 1) * dt);
    }
    return out;
}

ControlSeries build_control(const Simulator& sim, std::span<const SpectralField> states, const SpectralField& v0,
                            const AdditiveNoiseMap& map, ControlOptions options) {
    require_additive(sim, "build_control");
    require_states(sim, states);
    sim.check_in_galerkin_space(v0);
    const ModeSetPtr& modes = sim.modes();
    check_shape(map, *modes);
    const std::size_t m = map.m();
    if (m >= sim.galerkin_dim()) throw InvalidArgument("control needs at least one high mode (m < n)");
    const Dynamics& dyn = sim.dynamics();
    const double dt = sim.config().dt;

    const SpectralField v0_low = truncate(v0, m);
    const double low_norm = sobolev_norm(v0_low, 1, NormConvention::homogeneous);
    const bool ramp = low_norm >= 1e-14;

    ControlSeries out;
    out.ramp_end = ramp ? 2.0 * low_norm : 0.0;
    SpectralField v_high = high_part(v0, m);
    std::optional<SpectralField> jac, mal;
    if (options.residual) {
        jac.emplace(v0);
        mal.emplace(modes);
    }
    auto low_at = [&](double t) {
        if (!ramp) return SpectralField(modes);
        return std::max(0.0, 1.0 - t / out.ramp_end) * v0_low;
    };
    double cost = 0.0;
    auto record = [&](double t, const SpectralField& v_low) {
        out.t.push_back(t);
        out.cost.push_back(cost);
        const double hi = sobolev_norm_sq(v_high, 1, NormConvention::homogeneous);
        const double lo = sobolev_norm_sq(v_low, 1, NormConvention::homogeneous);
        out.high_h1_sq.push_back(hi);
        out.low_h1_sq.push_back(lo);
        out.v_h1_sq.push_back(hi + lo);
        if (options.residual)
            out.residual_h1.push_back(sobolev_norm(v_low + v_high - (*jac - *mal), 1, NormConvention::homogeneous));
        if (options.keep_fields) {
            out.v_low.push_back(v_low);
            out.v_high.push_back(v_high);
        }
    };
    SpectralField v_low = low_at(0.0);
    record(0.0, v_low);
    for (std::size_t n = 0; n + 1 < states.size(); ++n) {
        const double t = double(n) * dt;
        const PhysicalState s = dyn.physical(states[n]);
        const SpectralField v = v_low + v_high;
        const SpectralField kv = dyn.tangent_increment(s, v, 1.0, {});
        const SpectralField kv_low = truncate(kv, m);

        SpectralField rhs = stokes(v_low) + kv_low;
        if (ramp && t < out.ramp_end) rhs.axpy(1.0 / out.ramp_end, v0_low);
        std::vector<double> vdot = apply_Q_inverse(map, rhs);
        double speed = 0.0;
        for (double x : vdot) speed += x * x;
        cost += speed * dt;

        SpectralField next_high = v_high;
        next_high.axpy(dt, kv - kv_low);
        sim.apply_linear(next_high, v_high);
        v_high = std::move(next_high);

        if (options.residual) {
            SpectralField nj = dyn.tangent_increment(s, *jac, dt, {});
            nj += *jac;
            sim.apply_linear(nj, *jac);
            SpectralField na = dyn.tangent_increment(s, *mal, dt, {});
            na.axpy(dt, apply_Q(modes, map, vdot));
            na += *mal;
            sim.apply_linear(na, *mal);
            jac = std::move(nj);
            mal = std::move(na);
        }
        out.vdot.push_back(std::move(vdot));
        v_low = low_at(double(n + 1) * dt);
        record(double(n + 1) * dt, v_low);
    }
    return out;
}

SpectralGapReport spectral_gap_check(const ModeSetPtr& modes, std::size_t m, std::size_t fields, std::uint64_t seed) {
    if (m >= modes->size() || !modes->is_closed_prefix(m)) throw InvalidArgument("m must be a closed prefix below n");
    const double lambda_next = (*modes)[m].lambda;
    CounterStream rng(seed, 0xA55A0002u);
    SpectralGapReport rep;
    rep.fields = fields;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < fields; ++f) {
        const double decay = 4.0 * rng.uniform();
        const SpectralField u = random_field(modes, modes->size(), rng, decay, 1.0, 0, NormConvention::full);
        const SpectralField h = high_part(u, m);
        const double lhs = sobolev_norm_sq(h, 2, NormConvention::homogeneous);
        const double rhs = lambda_next * sobolev_norm_sq(h, 1, NormConvention::homogeneous);
        if (lhs < rhs * (1.0 - 1e-13)) ++rep.violations;
        if (rhs > 0.0) rep.worst_margin = std::min(rep.worst_margin, lhs / rhs - 1.0);
    }
    return rep;
}

std::vector<DecayPoint> highmode_decay_experiment(const DecaySettings& st) {
    std::vector<DecayPoint> out;
    for (std::size_t m : st.m_values) {
        SimConfig cfg = st.base;
        AdditiveNoiseMap map{std::vector<double>(m, st.q)};
        cfg.noise = st.noise ? NoiseKind::additive : NoiseKind::none;
        cfg.additive = map;
        const Simulator sim(cfg);
        const ModeSetPtr& modes = sim.modes();
        if (m >= sim.galerkin_dim()) throw InvalidArgument("m must leave at least one high mode");
        SpectralField v0 = basis_field(modes, 0, BasisScale::H1_homog) + basis_field(modes, m, BasisScale::H1_homog);
        v0 *= 1.0 / sobolev_norm(v0, 1, NormConvention::homogeneous);
        const SpectralField u0(modes);

        struct PathResult {
            std::vector<double> high, v, cost;
            std::vector<double> t;
        };
        const auto results = parallel_map(st.ensemble, [&](std::size_t p) {
            const auto states = sim.trace(u0, static_cast<std::uint32_t>(p));
            ControlSeries c = build_control(sim, states, v0, map);
            return PathResult{std::move(c.high_h1_sq), std::move(c.v_h1_sq), std::move(c.cost), std::move(c.t)};
        });
        DecayPoint pt;
        pt.m = m;
        pt.lambda_next = (*modes)[m].lambda;
        pt.t = results.front().t;
        std::vector<std::vector<double>> hi, vv, cc;
        for (const auto& r : results) {
            hi.push_back(r.high);
            vv.push_back(r.v);
            cc.push_back(r.cost);
        }
        pt.mean_high_sq = ensemble_mean(hi);
        pt.mean_v_sq = ensemble_mean(vv);
        pt.mean_cost = ensemble_mean(cc);
        pt.cost = pt.mean_cost.back();
        std::vector<double> x, y;
        for (std::size_t i = 0; i < pt.t.size(); ++i) {
            if (pt.t[i] + 1e-12 < st.fit_start || !(pt.mean_high_sq[i] > 0.0)) continue;
            x.push_back(pt.t[i]);
            y.push_back(std::log(pt.mean_high_sq[i]));
        }
        if (x.size() < 3) throw InvalidArgument("decay fit window holds fewer than three points");
        const LinearFit fit = linear_fit(x, y);
        pt.rate = 0.5 * fit.slope;
        pt.rate_std_error = 0.5 * fit.slope_std_error;
        pt.fit_r_squared = fit.r_squared;
        out.push_back(std::move(pt));
    }
    return out;
}

GradientProbeReport gradient_probe(const SimConfig& cfg, const Observable& phi, const SpectralField& u0,
                                   const SpectralField& v0_in, std::size_t ensemble, double eps) {
    if (cfg.noise != NoiseKind::additive) throw ConfigError("gradient_probe requires additive noise");
    if (!(eps > 0.0)) throw InvalidArgument("finite-difference step must be positive");
    const Simulator sim(cfg);
    const double norm = sobolev_norm(v0_in, 1, NormConvention::homogeneous);
    if (!(norm > 0.0)) throw InvalidArgument("gradient direction must be nonzero");
    const SpectralField v0 = (1.0 / norm) * v0_in;
    const SpectralField u0_shift = u0 + eps * v0;

    struct PathResult {
        double fd, cost, vnorm;
    };
    const auto results = parallel_map(ensemble, [&](std::size_t p) {
        const auto path = static_cast<std::uint32_t>(p);
        const auto states = sim.trace(u0, path);
        const auto shifted = sim.trace(u0_shift, path);
        const double fd = (phi.eval(shifted.back(), sim.dynamics()) - phi.eval(states.back(), sim.dynamics())) / eps;
        const ControlSeries c = build_control(sim, states, v0, cfg.additive);
        return PathResult{fd, c.cost.back(), std::sqrt(c.v_h1_sq.back())};
    });
    GradientProbeReport rep;
    rep.paths = ensemble;
    std::vector<double> fd, cost, vn;
    for (const auto& r : results) {
        fd.push_back(r.fd);
        cost.push_back(r.cost);
        vn.push_back(r.vnorm);
    }
    rep.fd_estimate = mean(fd);
    rep.fd_std_error = ensemble > 1 ? std::sqrt(variance(fd) / double(ensemble)) : 0.0;
    rep.mean_v_h1 = mean(vn);
    rep.cost_term = phi.sup * std::sqrt(mean(cost));
    rep.flow_term = std::isfinite(phi.grad_sup) ? phi.grad_sup * rep.mean_v_h1
                                                : std::numeric_limits<double>::infinity();
    rep.bound = rep.cost_term + rep.flow_term;
    return rep;
}

JacobianCheck jacobian_check(const SimConfig& cfg, const SpectralField& u0, const SpectralField& v0_in,
                             const std::vector<double>& eps, std::uint32_t path) {
    const Simulator sim(cfg);
    const double norm = sobolev_norm(v0_in, 1, NormConvention::full);
    if (!(norm > 0.0)) throw InvalidArgument("Jacobian direction must be nonzero");
    const SpectralField v0 = (1.0 / norm) * v0_in;
    const auto base = sim.trace(u0, path);
    const TangentSeries tangent = derivative_flow(sim, base, path, v0);
    JacobianCheck out;
    out.eps = eps;
    for (double e : eps) {
        if (!(e > 0.0)) throw InvalidArgument("finite-difference step must be positive");
        const auto shifted = sim.trace(u0 + e * v0, path);
        double worst = 0.0;
        for (std::size_t n = 0; n < base.size(); ++n) {
            SpectralField d = shifted[n] - base[n];
            d *= 1.0 / e;
            d -= tangent.v[n];
            worst = std::max(worst, sobolev_norm(d, 1, NormConvention::full));
        }
        out.error.push_back(worst);
    }
    for (std::size_t i = 0; i + 1 < out.error.size(); ++i)
        out.ratio.push_back(out.error[i + 1] > 0.0 ? out.error[i] / out.error[i + 1]
                                                   : std::numeric_limits<double>::infinity());
    return out;
}

}  // namespace tamed
