#include "tamed/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tamed/errors.hpp"
#include "tamed/rng.hpp"

namespace tamed {
namespace {

// Lipschitz bound for the Jacobian columns of psi (sampled maximum is about 0.85).
constexpr double kPsiSecondBound = 2.0;

struct PointValue {
    Vec3 value{};
    std::array<Vec3, 3> grad{};  // grad[j] = d/dx_j
};

// Unit-amplitude real basis field i evaluated at x: eps cos(2 pi k.x) on
// canonical modes, eps sin(2 pi k.x) (k canonical) on partners.
PointValue unit_basis_at(const ModeSet& ms, std::size_t i, const Vec3& x) {
    const bool canon = ms.is_canonical(i);
    const std::size_t ci = canon ? i : ms.partner(i);
    const Wavevector& k = ms[ci].k;
    const Vec3& e = ms.polarization_vector(ci);
    const double th = kTwoPi * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
    const double s = canon ? std::cos(th) : std::sin(th);
    const double ds = canon ? -std::sin(th) : std::cos(th);
    PointValue out;
    for (int c = 0; c < 3; ++c) out.value[c] = e[c] * s;
    for (int j = 0; j < 3; ++j)
        for (int c = 0; c < 3; ++c) out.grad[j][c] = e[c] * ds * kTwoPi * k[j];
    return out;
}

double sq(const Vec3& v) { return v[0] * v[0] + v[1] * v[1] + v[2] * v[2]; }

// Column j of D psi(u).
Vec3 dpsi_col(const Vec3& u, int j) {
    const double a = 1.0 / std::sqrt(1.0 + sq(u));
    Vec3 out;
    for (int c = 0; c < 3; ++c) out[c] = (c == j ? a : 0.0) - u[c] * u[j] * a * a * a;
    return out;
}

double sum_sq(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

void require_finite(const std::vector<double>& v, const char* name) {
    for (double x : v)
        if (!std::isfinite(x)) throw InvalidArgument(std::string("non-finite entry in ") + name);
}

}  // namespace

Vec3 psi(const Vec3& u) {
    const double a = 1.0 / std::sqrt(1.0 + sq(u));
    return {u[0] * a, u[1] * a, u[2] * a};
}

bool CoefficientModel::has_forcing() const {
    if (a_f != 0.0) return true;
    return std::any_of(forcing.begin(), forcing.end(), [](double x) { return x != 0.0; });
}

double AdditiveNoiseMap::e0(const ModeSet& modes) const {
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) s += q[i] * q[i] / modes[i].lambda;
    return s;
}

double AdditiveNoiseMap::e1() const { return sum_sq(q); }

std::size_t noise_profile_mode(const ModeSet& modes, int k) {
    int seen = 0;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (!modes.is_canonical(i)) continue;
        if (seen == k) return i;
        ++seen;
    }
    throw InvalidArgument("noise direction " + std::to_string(k) + " exceeds the " + std::to_string(seen) +
                          " canonical modes of the mode set");
}

void check_shape(const CoefficientModel& m) {
    if (m.k_noise < 0) throw InvalidArgument("K_noise must be nonnegative");
    if (!(m.a_f >= 0.0) || !std::isfinite(m.a_f)) throw InvalidArgument("a_f must be finite and nonnegative");
    for (const auto* v : {&m.sigma, &m.h_b, &m.h_c})
        if (int(v->size()) > m.k_noise)
            throw InvalidArgument("coefficient list longer than K_noise = " + std::to_string(m.k_noise));
    require_finite(m.forcing, "F");
    require_finite(m.sigma, "s_k");
    require_finite(m.h_b, "b_k");
    require_finite(m.h_c, "c_k");
}

void check_shape(const AdditiveNoiseMap& map, const ModeSet& modes) {
    if (map.m() > modes.size()) throw InvalidArgument("additive noise forces more modes than the mode set holds");
    if (!modes.is_closed_prefix(map.m()))
        throw InvalidArgument("additive noise mode count m = " + std::to_string(map.m()) + " splits a conjugate pair");
    for (double q : map.q)
        if (!(q > 0.0) || !std::isfinite(q)) throw InvalidArgument("additive noise amplitudes q_i must be positive");
}

bool AssumptionReport::passed() const {
    return std::all_of(clauses.begin(), clauses.end(), [](const ClauseResult& c) { return c.passed; });
}

AssumptionReport assess_assumptions(const CoefficientModel& model, const ModeSetPtr& modes, std::size_t samples,
                                    std::uint64_t seed) {
    check_shape(model);
    const ModeSet& ms = *modes;
    if (model.forcing.size() > ms.size()) throw InvalidArgument("F has more coordinates than the mode set");
    AssumptionReport rep;
    rep.samples = samples;

    // closed-form constants
    const double sum_b2 = sum_sq(model.h_b);
    const double sum_s2 = sum_sq(model.sigma);
    rep.c_f = std::max(2.0 * model.a_f * model.a_f, model.a_f);
    {
        double f0 = 0.0, f1 = 0.0;
        for (std::size_t i = 0; i < model.forcing.size(); ++i) {
            // unit-amplitude basis fields have ||e||^2 = 1/2 and ||grad e||^2 = lambda/2
            f0 += 0.5 * model.forcing[i] * model.forcing[i];
            f1 += 0.5 * ms[i].lambda * model.forcing[i] * model.forcing[i];
        }
        rep.h_f_l1 = 2.0 * f0 + f1;
    }
    std::vector<std::size_t> profile(model.k_noise);
    for (int k = 0; k < model.k_noise; ++k) profile[k] = noise_profile_mode(ms, k);
    rep.sigma_sup = sum_s2;
    {
        double cs = 0.0;
        for (int j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (int k = 0; k < model.k_noise; ++k) {
                const double kj = ms[profile[k]].k[j];
                acc += model.s(k) * model.s(k) * kTwoPi * kTwoPi * kj * kj;
            }
            cs = std::max(cs, std::sqrt(acc));
        }
        rep.c_sigma = cs;
    }
    rep.dh_du_sq = sum_b2;
    rep.c_h = std::max(2.0 * sum_b2, std::sqrt(sum_b2) * std::max(1.0, kPsiSecondBound));
    for (int k = 0; k < model.k_noise; ++k) rep.h_h_l1 += model.c(k) * model.c(k) * (1.0 + ms[profile[k]].lambda);
    rep.lp1_constant = 4.0 * sum_b2;

    ClauseResult sigma_bound{"sigma-bound", sum_s2 <= 0.25, sum_s2 / 0.25,
                             "sup_x ||sigma(x)||^2 = " + format_double(sum_s2) + " (must be <= 1/4)"};
    ClauseResult h1{"forcing-growth", true, 0.0, "f growth and u-derivative bounds"};
    ClauseResult h2{"transport-gradient", true, 0.0, "sigma x-derivative bound"};
    ClauseResult h3{"noise-growth", true, 0.0, "h growth, u-derivative and Lipschitz bounds"};

    CounterStream rng(seed, 0xA55A0001u);
    auto ratio = [](double lhs, double rhs) {
        if (lhs <= 0.0) return 0.0;
        return rhs > 0.0 ? lhs / rhs : std::numeric_limits<double>::infinity();
    };
    const double tol = 1.0 + 1e-12;
    for (std::size_t n = 0; n < samples; ++n) {
        const Vec3 x{rng.uniform(), rng.uniform(), rng.uniform()};
        const double scale = std::pow(10.0, -2.0 + 4.0 * rng.uniform());
        const Vec3 u{scale * rng.normal(), scale * rng.normal(), scale * rng.normal()};
        const double dscale = std::pow(10.0, -6.0 + 6.0 * rng.uniform());
        const Vec3 v{u[0] + dscale * rng.normal(), u[1] + dscale * rng.normal(), u[2] + dscale * rng.normal()};
        const Vec3 du{u[0] - v[0], u[1] - v[1], u[2] - v[2]};
        const double u2 = sq(u);

        // forcing
        Vec3 F{};
        std::array<Vec3, 3> gF{};
        for (std::size_t i = 0; i < model.forcing.size(); ++i) {
            if (model.forcing[i] == 0.0) continue;
            const PointValue pv = unit_basis_at(ms, i, x);
            for (int c = 0; c < 3; ++c) {
                F[c] += model.forcing[i] * pv.value[c];
                for (int j = 0; j < 3; ++j) gF[j][c] += model.forcing[i] * pv.grad[j][c];
            }
        }
        const Vec3 ps = psi(u);
        Vec3 f{};
        for (int c = 0; c < 3; ++c) f[c] = model.a_f * ps[c] + F[c];
        const double hf = 2.0 * sq(F) + sq(gF[0]) + sq(gF[1]) + sq(gF[2]);
        for (int j = 0; j < 3; ++j) {
            h1.worst_ratio = std::max(h1.worst_ratio, ratio(sq(gF[j]) + sq(f), rep.c_f * u2 + hf));
            h1.worst_ratio = std::max(h1.worst_ratio, ratio(model.a_f * std::sqrt(sq(dpsi_col(u, j))), rep.c_f));
        }

        // transport profiles
        double sig2 = 0.0;
        std::array<double, 3> dsig2{};
        double hsum = 0.0;
        std::array<double, 3> dh2{};
        double hh = 0.0;
        for (int k = 0; k < model.k_noise; ++k) {
            const PointValue phi = unit_basis_at(ms, profile[k], x);
            const PointValue sine = unit_basis_at(ms, ms.partner(profile[k]), x);
            sig2 += model.s(k) * model.s(k) * sq(phi.value);
            for (int j = 0; j < 3; ++j) dsig2[j] += model.s(k) * model.s(k) * sq(phi.grad[j]);
            Vec3 hk;
            for (int c = 0; c < 3; ++c) hk[c] = model.b(k) * ps[c] + model.c(k) * sine.value[c];
            hsum += sq(hk);
            for (int j = 0; j < 3; ++j) dh2[j] += model.c(k) * model.c(k) * sq(sine.grad[j]);
            hh += 2.0 * model.c(k) * model.c(k) *
                  (sq(sine.value) + sq(sine.grad[0]) + sq(sine.grad[1]) + sq(sine.grad[2]));
        }
        sigma_bound.worst_ratio = std::max(sigma_bound.worst_ratio, sig2 / 0.25);
        if (sig2 > 0.25 * tol) sigma_bound.passed = false;
        for (int j = 0; j < 3; ++j) {
            h2.worst_ratio = std::max(h2.worst_ratio, ratio(std::sqrt(dsig2[j]), rep.c_sigma));
            h3.worst_ratio = std::max(h3.worst_ratio, ratio(dh2[j] + hsum, rep.c_h * u2 + hh));
            const Vec3 cu = dpsi_col(u, j);
            const Vec3 cv = dpsi_col(v, j);
            h3.worst_ratio = std::max(h3.worst_ratio, ratio(std::sqrt(sum_b2 * sq(cu)), rep.c_h));
            const Vec3 dd{cu[0] - cv[0], cu[1] - cv[1], cu[2] - cv[2]};
            h3.worst_ratio = std::max(h3.worst_ratio, ratio(std::sqrt(sum_b2 * sq(dd)), rep.c_h * std::sqrt(sq(du))));
        }
    }
    for (ClauseResult* c : {&h1, &h2, &h3}) c->passed = c->worst_ratio <= tol;
    rep.clauses = {sigma_bound, h1, h2, h3};
    return rep;
}

AssumptionReport validate_assumptions(const CoefficientModel& model, const ModeSetPtr& modes, std::size_t samples,
                                      std::uint64_t seed) {
    AssumptionReport rep = assess_assumptions(model, modes, samples, seed);
    for (const ClauseResult& c : rep.clauses) {
        if (c.passed) continue;
        if (c.clause == "sigma-bound")
            throw AssumptionViolation(c.clause, "transport noise too strong: " + c.detail);
        throw AssumptionViolation(c.clause, "hypothesis " + c.clause + " fails on sampled points (worst ratio " +
                                                format_double(c.worst_ratio) + "): " + c.detail);
    }
    return rep;
}

void write_model(FlatConfig& cfg, const CoefficientModel& m) {
    cfg.set("a_f", format_double(m.a_f));
    cfg.set("F", format_doubles(m.forcing));
    cfg.set("K_noise", std::to_string(m.k_noise));
    cfg.set("s_k", format_doubles(m.sigma));
    cfg.set("b_k", format_doubles(m.h_b));
    cfg.set("c_k", format_doubles(m.h_c));
}

CoefficientModel read_model(const FlatConfig& cfg) {
    CoefficientModel m;
    m.a_f = cfg.get_double("a_f", 0.0);
    m.forcing = cfg.get_doubles("F");
    m.sigma = cfg.get_doubles("s_k");
    m.h_b = cfg.get_doubles("b_k");
    m.h_c = cfg.get_doubles("c_k");
    const auto longest = std::max({m.sigma.size(), m.h_b.size(), m.h_c.size()});
    m.k_noise = static_cast<int>(cfg.get_int("K_noise", static_cast<long long>(longest)));
    try {
        check_shape(m);
    } catch (const InvalidArgument& e) {
        throw ConfigError(cfg.source() + ": coefficient model: " + e.what());
    }
    return m;
}

void write_taming(FlatConfig& cfg, const TamingConfig& t) { cfg.set("N", format_double(t.threshold)); }

TamingConfig read_taming(const FlatConfig& cfg) {
    TamingConfig t{cfg.get_double("N", 1.0)};
    if (!(t.threshold > 0.0) || !std::isfinite(t.threshold))
        throw ConfigError(cfg.source() + ":" + std::to_string(cfg.line_of("N")) + ": key 'N': must be positive");
    return t;
}

void write_additive(FlatConfig& cfg, const AdditiveNoiseMap& map) {
    cfg.set("m", std::to_string(map.m()));
    cfg.set("q", format_doubles(map.q));
}

AdditiveNoiseMap read_additive(const FlatConfig& cfg) {
    AdditiveNoiseMap map;
    map.q = cfg.get_doubles("q");
    if (cfg.has("m")) {
        const long long m = cfg.get_int("m");
        if (m < 0) throw ConfigError(cfg.source() + ": key 'm' must be nonnegative");
        if (map.q.size() == 1 && m > 1) map.q.assign(static_cast<std::size_t>(m), map.q.front());
        if (map.q.size() != static_cast<std::size_t>(m))
            throw ConfigError(cfg.source() + ":" + std::to_string(cfg.line_of("q")) + ": key 'q' has " +
                              std::to_string(map.q.size()) + " entries but m = " + std::to_string(m));
    }
    return map;
}

}  // namespace tamed
