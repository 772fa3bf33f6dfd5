#include "tamed/ergodicity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tamed/errors.hpp"

namespace tamed {

KbReport kb_average(const SimConfig& cfg_in, const SpectralField& u0, const std::vector<Observable>& observables,
                    const KbSettings& st) {
    if (!(st.average > 0.0)) throw InvalidArgument("T_avg must be positive");
    if (st.sample_every < 1) throw InvalidArgument("sample_every must be at least 1");
    KbReport rep;
    rep.burn_in = st.burn_in < 0.0 ? 0.5 * st.average : st.burn_in;
    SimConfig cfg = cfg_in;
    cfg.horizon = rep.burn_in + st.average;
    const Simulator sim(cfg);
    sim.check_in_galerkin_space(u0);
    const auto burn_steps = static_cast<std::uint64_t>(std::ceil(rep.burn_in / cfg.dt - 1e-9));
    const std::uint64_t steps = sim.step_count();
    std::vector<std::vector<double>> samples(observables.size());
    SpectralField u(sim.modes(), std::vector<Complex>(u0.amplitudes().begin(), u0.amplitudes().end()));
    for (std::uint64_t n = 0; n < steps; ++n) {
        u = sim.step(u, sim.increments(st.path, n));
        sim.check_finite(u, double(n + 1) * cfg.dt);
        const std::uint64_t k = n + 1;
        if (k <= burn_steps || (k - burn_steps) % static_cast<std::uint64_t>(st.sample_every) != 0) continue;
        for (std::size_t o = 0; o < observables.size(); ++o)
            samples[o].push_back(observables[o].eval(u, sim.dynamics()));
    }
    rep.samples = observables.empty() ? 0 : samples.front().size();
    for (std::size_t o = 0; o < observables.size(); ++o)
        rep.estimates.push_back({observables[o].name, batch_means(samples[o], st.batches)});
    return rep;
}

MomentAudit moment_audit(const std::vector<TrajectoryRecord>& records, double fit_from, double fit_to) {
    if (records.empty()) throw InvalidArgument("moment audit needs at least one record");
    MomentAudit a;
    const std::size_t rows = records.front().rows.size();
    for (const auto& r : records)
        if (r.rows.size() != rows) throw InvalidArgument("ensemble records have different lengths");
    std::vector<double> h0(rows, 0.0), h1(rows, 0.0), l4(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        a.t.push_back(records.front().rows[i].t);
        for (const auto& r : records) {
            const RecordRow& row = r.rows[i];
            h0[i] += row.h0 * row.h0;
            h1[i] += row.h1_full * row.h1_full;
            l4[i] += row.l4_pow4;
        }
        h0[i] /= double(records.size());
        h1[i] /= double(records.size());
        l4[i] /= double(records.size());
    }
    a.mean_h0_sq = h0;
    a.int_h1_sq = cumulative_trapezoid(a.t, h1);
    a.int_l4 = cumulative_trapezoid(a.t, l4);
    for (std::size_t i = 0; i < rows; ++i) {
        a.composite.push_back(a.mean_h0_sq[i] + a.int_h1_sq[i] + a.int_l4[i]);
        if (a.mean_h0_sq[i] < 0.0 || a.int_h1_sq[i] < 0.0 || a.int_l4[i] < 0.0) a.components_nonnegative = false;
        if (i > 0 && (a.int_h1_sq[i] < a.int_h1_sq[i - 1] || a.int_l4[i] < a.int_l4[i - 1]))
            a.integrals_nondecreasing = false;
    }
    std::vector<double> x, y;
    for (std::size_t i = 0; i < rows; ++i) {
        if (a.t[i] < fit_from - 1e-9 || a.t[i] > fit_to + 1e-9) continue;
        x.push_back(a.t[i]);
        y.push_back(a.composite[i]);
    }
    if (x.size() >= 2) a.fit = linear_fit(x, y);
    return a;
}

ExpMomentReport exp_moment_probe(const std::vector<TrajectoryRecord>& records, double eta,
                                 const std::vector<double>& horizons) {
    if (records.empty()) throw InvalidArgument("exp moment probe needs records");
    if (eta < 0.0) throw InvalidArgument("eta must be nonnegative");
    constexpr double cap = 700.0;
    ExpMomentReport rep;
    std::vector<std::vector<double>> integral;
    std::vector<double> t;
    for (const auto& row : records.front().rows) t.push_back(row.t);
    for (const auto& r : records) {
        std::vector<double> cn;
        for (const auto& row : r.rows) cn.push_back(row.cn);
        if (cn.size() != t.size()) throw InvalidArgument("ensemble records have different lengths");
        integral.push_back(cumulative_trapezoid(t, cn));
    }
    for (double T : horizons) {
        const auto it = std::find_if(t.begin(), t.end(), [&](double s) { return std::abs(s - T) < 1e-9 * (1.0 + T); });
        if (it == t.end()) throw InvalidArgument("horizon " + format_double(T) + " is not a record time");
        const auto idx = static_cast<std::size_t>(it - t.begin());
        ExpMomentPoint pt;
        pt.T = T;
        std::vector<double> e, term;
        for (std::size_t p = 0; p < records.size(); ++p) {
            double x = eta * integral[p][idx];
            if (x > cap) {
                x = cap;
                ++pt.saturated;
            }
            e.push_back(std::exp(x));
            const double h1 = records[p].rows[idx].h1_homog;
            term.push_back(std::exp(std::min(cap, eta * h1 * h1)));
        }
        pt.estimate = mean(e);
        pt.log_estimate = std::log(pt.estimate);
        pt.relative_variance = pt.estimate > 0.0 ? variance(e) / (pt.estimate * pt.estimate) : 0.0;
        pt.heavy_tail = pt.relative_variance > 1.0;
        pt.terminal_estimate = mean(term);
        rep.points.push_back(pt);
    }
    if (rep.points.size() >= 2) {
        std::vector<double> x, y;
        for (const auto& p : rep.points) {
            x.push_back(p.T);
            y.push_back(p.log_estimate);
        }
        rep.fit = linear_fit(x, y);
    }
    return rep;
}

SupportReport support_probe(const SimConfig& cfg_in, const SpectralField& u0, const SmallPath& w, double r2,
                            double t_max) {
    if (!(r2 > 0.0)) throw InvalidArgument("target radius must be positive");
    SimConfig cfg = cfg_in;
    cfg.noise = NoiseKind::none;
    cfg.horizon = t_max;
    const Simulator sim(cfg);
    sim.check_in_galerkin_space(u0);
    const ModeSetPtr& modes = sim.modes();
    if (w.mode >= sim.galerkin_dim()) throw InvalidArgument("small path mode outside the Galerkin space");
    SpectralField e = basis_field(modes, w.mode, BasisScale::H0);
    e *= 1.0 / sobolev_norm(e, 6, NormConvention::full);
    auto w_at = [&](double t) { return (w.amplitude * std::sin(w.omega * t)) * e; };

    SupportReport rep;
    rep.path_h6_sup = std::abs(w.amplitude);
    SpectralField v = u0 - w_at(0.0);
    const double dt = cfg.dt;
    auto record = [&](double t, const SpectralField& u) {
        rep.t.push_back(t);
        rep.h1.push_back(sobolev_norm(u, 1, NormConvention::homogeneous));
        rep.h0.push_back(sobolev_norm(u, 0, NormConvention::full));
    };
    record(0.0, u0);
    if (rep.h1.back() <= r2) {
        rep.found = true;
        return rep;
    }
    const std::uint64_t steps = sim.step_count();
    for (std::uint64_t n = 0; n < steps; ++n) {
        const double t = double(n) * dt;
        const SpectralField wt = w_at(t);
        const SpectralField x = v + wt;
        SpectralField next = sim.dynamics().increment(x, sim.dynamics().physical(x), dt, {});
        next.axpy(dt, stokes(wt));
        next += v;
        sim.apply_linear(next, v);
        v = std::move(next);
        sim.check_finite(v, t + dt);
        const SpectralField u = v + w_at(t + dt);
        record(t + dt, u);
        if (rep.h1.back() <= r2) {
            rep.found = true;
            rep.hit_time = t + dt;
            break;
        }
    }
    return rep;
}

ComparisonBound comparison_bound(double r0, double c0, double c1, double c2, double c3, double p, double T,
                                 double eps) {
    if (!(p > 1.0)) throw InvalidArgument("comparison bound needs p > 1");
    if (!(c0 > 0.0) || c1 < 0.0 || c2 < 0.0 || c3 < 0.0 || r0 < 0.0 || T < 0.0)
        throw InvalidArgument("comparison bound constants must be nonnegative (C0 > 0)");
    const double c4 = (c2 * eps + c3) / c0;
    const double grow = std::expm1(c0 * T);
    const double base = r0 + c4 * grow;
    ComparisonBound out;
    if (!(base > 0.0)) {
        // phi stays at zero only in the degenerate all-zero case
        out.value = 0.0;
        return out;
    }
    const double bracket = std::pow(base, 1.0 - p) + c1 * (1.0 - p) * eps * T;
    if (!(bracket > 0.0)) {
        out.valid = false;
        out.value = std::numeric_limits<double>::infinity();
        return out;
    }
    out.value = std::exp(-c0 * T) * std::pow(bracket, 1.0 / (1.0 - p));
    return out;
}

}  // namespace tamed
