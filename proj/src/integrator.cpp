#include "tamed/integrator.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "tamed/errors.hpp"

namespace tamed {

const char* to_string(Scheme s) { return s == Scheme::explicit_em ? "explicit_em" : "semi_implicit_em"; }

const char* to_string(NoiseKind k) {
    switch (k) {
    case NoiseKind::none: return "none";
    case NoiseKind::multiplicative: return "multiplicative";
    case NoiseKind::additive: return "additive";
    }
    return "none";
}

Scheme parse_scheme(const std::string& s) {
    if (s == "explicit_em") return Scheme::explicit_em;
    if (s == "semi_implicit_em") return Scheme::semi_implicit_em;
    throw ConfigError("unknown scheme '" + s + "' (expected explicit_em or semi_implicit_em)");
}

NoiseKind parse_noise_kind(const std::string& s) {
    if (s == "none") return NoiseKind::none;
    if (s == "multiplicative") return NoiseKind::multiplicative;
    if (s == "additive") return NoiseKind::additive;
    throw ConfigError("unknown noise kind '" + s + "' (expected none, multiplicative or additive)");
}

namespace {

ModeSetPtr checked_modes(const SimConfig& c) {
    if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw InvalidArgument("dt must be positive");
    if (!(c.horizon >= 0.0) || !std::isfinite(c.horizon)) throw InvalidArgument("horizon T must be nonnegative");
    if (c.record_stride < 1) throw InvalidArgument("record stride must be at least 1");
    return build_mode_set(c.k_max);
}

CoefficientModel model_for(const SimConfig& c) {
    CoefficientModel m = c.model;
    if (c.noise != NoiseKind::multiplicative) {
        m.sigma.clear();
        m.h_b.clear();
        m.h_c.clear();
        m.k_noise = 0;
    }
    return m;
}

}  // namespace

Simulator::Simulator(SimConfig cfg)
    : cfg_(std::move(cfg)),
      modes_(checked_modes(cfg_)),
      dyn_(modes_, cfg_.grid == 0 ? dealias_floor(*modes_) : cfg_.grid, cfg_.taming, model_for(cfg_), cfg_.options),
      n_(cfg_.n == 0 ? modes_->size() : cfg_.n) {
    if (n_ > modes_->size()) throw InvalidArgument("Galerkin dimension exceeds the mode set");
    if (!modes_->is_closed_prefix(n_))
        throw InvalidArgument("Galerkin dimension " + std::to_string(n_) + " splits a conjugate pair");
    if (cfg_.noise == NoiseKind::additive) {
        check_shape(cfg_.additive, *modes_);
        if (cfg_.additive.m() > n_) throw InvalidArgument("additive noise forces modes outside the Galerkin space");
    }
    implicit_.resize(modes_->size());
    for (std::size_t i = 0; i < implicit_.size(); ++i) implicit_[i] = 1.0 / (1.0 + (*modes_)[i].lambda * cfg_.dt);
}

std::size_t Simulator::noise_count() const noexcept {
    switch (cfg_.noise) {
    case NoiseKind::multiplicative: return static_cast<std::size_t>(dyn_.noise_directions());
    case NoiseKind::additive: return cfg_.additive.m();
    case NoiseKind::none: return 0;
    }
    return 0;
}

std::uint64_t Simulator::step_count() const noexcept {
    if (cfg_.horizon <= 0.0) return 0;
    return static_cast<std::uint64_t>(std::ceil(cfg_.horizon / cfg_.dt - 1e-9));
}

std::vector<double> Simulator::increments(std::uint32_t path, std::uint64_t step) const {
    return brownian_increments(RngKey{cfg_.seed, path}, step, cfg_.dt, noise_count());
}

void Simulator::apply_linear(SpectralField& rhs, const SpectralField& u) const {
    if (cfg_.scheme == Scheme::semi_implicit_em) {
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] *= implicit_[i];
    } else {
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= cfg_.dt * (*modes_)[i].lambda * u[i];
    }
    truncate_in_place(rhs, n_);
}

SpectralField Simulator::step(const SpectralField& u, std::span<const double> dw, const PhysicalState* state) const {
    if (dw.size() != noise_count()) throw InvalidArgument("wrong number of Brownian increments for this step");
    std::optional<PhysicalState> own;
    if (!state) {
        own.emplace(dyn_.physical(u));
        state = &*own;
    }
    const bool mult = cfg_.noise == NoiseKind::multiplicative;
    SpectralField next = dyn_.increment(u, *state, cfg_.dt, mult ? dw : std::span<const double>{});
    if (cfg_.noise == NoiseKind::additive) next += apply_Q(modes_, cfg_.additive, dw);
    next += u;
    apply_linear(next, u);
    return next;
}

void Simulator::check_finite(const SpectralField& u, double t) const {
    bool bad = false;
    for (const Complex& a : u.amplitudes())
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) bad = true;
    const double h0 = sobolev_norm(u, 0, NormConvention::full);
    const double h1 = sobolev_norm(u, 1, NormConvention::full);
    if (bad || !std::isfinite(h1) || h1 > cfg_.blowup_threshold)
        throw BlowUpError(t, h0, h1,
                          "blow-up at t = " + format_double(t) + ": ||u||_H0 = " + format_double(h0) +
                              ", ||u||_H1 = " + format_double(h1));
}

void Simulator::check_in_galerkin_space(const SpectralField& u) const {
    if (u.mode_set_ptr() != modes_ && u.modes().k_max() != modes_->k_max())
        throw ModeSetMismatch("initial state built on a different mode set");
    for (std::size_t i = n_; i < u.size(); ++i)
        if (u[i] != Complex{}) throw InvalidArgument("initial state has energy beyond the Galerkin dimension");
}

RecordRow Simulator::diagnostics(const SpectralField& u, std::uint64_t step) const {
    RecordRow r;
    r.step = step;
    r.t = double(step) * cfg_.dt;
    const PhysicalState s = dyn_.physical(u);
    r.h0 = sobolev_norm(u, 0, NormConvention::full);
    r.h1_full = sobolev_norm(u, 1, NormConvention::full);
    r.h1_homog = sobolev_norm(u, 1, NormConvention::homogeneous);
    r.h2_full = sobolev_norm(u, 2, NormConvention::full);
    r.h2_homog = sobolev_norm(u, 2, NormConvention::homogeneous);
    r.l4_pow4 = lp_integral(s.u, 4.0);
    r.au_u = pairing(dyn_.drift_A(u), u, PairingSpace::H0);
    r.taming_fraction = dyn_.taming_fraction(s);
    r.cn = dyn_.cN(u, s);
    r.div_residual = r.h0 > 0.0 ? divergence_residual(u) / r.h0 : 0.0;
    r.imag_residual = dyn_.grid().imaginary_residue(u);
    return r;
}

TrajectoryRecord Simulator::run(const SpectralField& u0, std::uint32_t path,
                                const std::vector<std::vector<double>>* replay) const {
    check_in_galerkin_space(u0);
    TrajectoryRecord rec;
    rec.modes = modes_;
    rec.path = path;
    rec.dt = cfg_.dt;
    rec.steps = step_count();
    if (replay && replay->size() < rec.steps) throw InvalidArgument("replay stream shorter than the run");
    SpectralField u(modes_, std::vector<Complex>(u0.amplitudes().begin(), u0.amplitudes().end()));
    auto record = [&](std::uint64_t n) {
        rec.rows.push_back(diagnostics(u, n));
        if (cfg_.snapshots) rec.snapshots.push_back(u);
    };
    record(0);
    for (std::uint64_t n = 0; n < rec.steps; ++n) {
        std::vector<double> dw = replay ? (*replay)[n] : increments(path, n);
        u = step(u, dw);
        check_finite(u, double(n + 1) * cfg_.dt);
        if (cfg_.keep_increments) rec.increments.push_back(std::move(dw));
        if ((n + 1) % static_cast<std::uint64_t>(cfg_.record_stride) == 0 || n + 1 == rec.steps) record(n + 1);
    }
    rec.final_state = u;
    return rec;
}

TrajectoryRecord Simulator::simulate(const SpectralField& u0, std::uint32_t path) const {
    return run(u0, path, nullptr);
}

TrajectoryRecord Simulator::replay(const SpectralField& u0, const std::vector<std::vector<double>>& incs) const {
    return run(u0, 0, &incs);
}

std::vector<SpectralField> Simulator::trace(const SpectralField& u0, std::uint32_t path) const {
    check_in_galerkin_space(u0);
    std::vector<SpectralField> out;
    const std::uint64_t steps = step_count();
    out.reserve(steps + 1);
    out.emplace_back(modes_, std::vector<Complex>(u0.amplitudes().begin(), u0.amplitudes().end()));
    for (std::uint64_t n = 0; n < steps; ++n) {
        out.push_back(step(out.back(), increments(path, n)));
        check_finite(out.back(), double(n + 1) * cfg_.dt);
    }
    return out;
}

TwinRecord Simulator::twin_simulate(const SpectralField& u0, const SpectralField& u0_alt, std::uint32_t path) const {
    check_in_galerkin_space(u0);
    check_in_galerkin_space(u0_alt);
    TwinRecord out;
    for (TrajectoryRecord* r : {&out.first, &out.second}) {
        r->modes = modes_;
        r->path = path;
        r->dt = cfg_.dt;
        r->steps = step_count();
    }
    SpectralField a = u0, b = u0_alt;
    auto record = [&](std::uint64_t n) {
        out.first.rows.push_back(diagnostics(a, n));
        out.second.rows.push_back(diagnostics(b, n));
        if (cfg_.snapshots) {
            out.first.snapshots.push_back(a);
            out.second.snapshots.push_back(b);
        }
        const SpectralField d = a - b;
        out.t.push_back(double(n) * cfg_.dt);
        out.dist_h0.push_back(sobolev_norm(d, 0, NormConvention::full));
        out.dist_h1.push_back(sobolev_norm(d, 1, NormConvention::full));
    };
    record(0);
    const std::uint64_t steps = step_count();
    for (std::uint64_t n = 0; n < steps; ++n) {
        const std::vector<double> dw = increments(path, n);
        a = step(a, dw);
        b = step(b, dw);
        check_finite(a, double(n + 1) * cfg_.dt);
        check_finite(b, double(n + 1) * cfg_.dt);
        if (cfg_.keep_increments) {
            out.first.increments.push_back(dw);
            out.second.increments.push_back(dw);
        }
        if ((n + 1) % static_cast<std::uint64_t>(cfg_.record_stride) == 0 || n + 1 == steps) record(n + 1);
    }
    out.first.final_state = a;
    out.second.final_state = b;
    return out;
}

unsigned ensemble_threads() {
    if (const char* env = std::getenv("TAMED_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

}  // namespace tamed
