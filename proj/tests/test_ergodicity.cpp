#include <doctest.h>

#include <boost/numeric/odeint.hpp>
#include <cmath>

#include "support.hpp"
#include "tamed/ergodicity.hpp"
#include "tamed/errors.hpp"

using namespace tamed;
using namespace tamed::test;

namespace {

struct BoundCase {
    double r0, c0, c1, c2, c3, p, eps;
};

/// phi' = -C0 phi + C1 eps phi^p + C2 eps + C3 by adaptive Dormand-Prince.
double integrate_phi(const BoundCase& c, double T) {
    using namespace boost::numeric::odeint;
    std::vector<double> x{c.r0};
    auto rhs = [&](const std::vector<double>& y, std::vector<double>& dy, double) {
        dy[0] = -c.c0 * y[0] + c.c1 * c.eps * std::pow(std::max(y[0], 0.0), c.p) + c.c2 * c.eps + c.c3;
    };
    integrate_adaptive(make_controlled(1e-13, 1e-13, runge_kutta_dopri5<std::vector<double>>()), rhs, x, 0.0, T, 1e-4);
    return x[0];
}

SimConfig small_additive(double dt) {
    SimConfig cfg;
    cfg.k_max = 1;
    cfg.dt = dt;
    cfg.noise = NoiseKind::additive;
    cfg.additive.q = std::vector<double>(12, 1.0);
    cfg.seed = 8;
    return cfg;
}

}  // namespace

TEST_CASE("comparison bound dominates the ODE solution") {
    const std::vector<BoundCase> cases{
        {1.0, 1.0, 1.0, 0.0, 0.0, 2.0, 0.01},  {2.0, 0.5, 1.0, 1.0, 0.0, 2.0, 0.05},
        {0.5, 2.0, 3.0, 0.5, 0.1, 3.0, 0.1},   {1.0, 1.0, 0.5, 2.0, 0.5, 1.5, 0.2},
        {5.0, 3.0, 0.1, 0.0, 1.0, 2.5, 0.01},  {0.1, 0.2, 2.0, 1.0, 0.2, 2.0, 0.02},
        {3.0, 1.5, 0.2, 0.3, 0.0, 4.0, 0.001}, {1.0, 0.8, 1.0, 1.0, 1.0, 2.0, 0.03},
        {0.0, 1.0, 1.0, 1.0, 0.5, 2.0, 0.1},   {2.0, 4.0, 0.5, 0.5, 2.0, 1.2, 0.5},
    };
    int valid = 0;
    for (const auto& c : cases)
        for (double T : {0.25, 1.0, 3.0}) {
            const auto b = comparison_bound(c.r0, c.c0, c.c1, c.c2, c.c3, c.p, T, c.eps);
            if (!b.valid) {
                CHECK(std::isinf(b.value));
                continue;
            }
            ++valid;
            CHECK(integrate_phi(c, T) <= b.value + 1e-9);
        }
    CHECK(valid >= 25);
}

TEST_CASE("comparison bound limits and breakdown") {
    // eps -> 0 with C3 = 0: pure exponential decay
    const auto b = comparison_bound(2.0, 1.5, 1.0, 1.0, 0.0, 2.0, 3.0, 1e-12);
    CHECK(b.value == doctest::Approx(2.0 * std::exp(-4.5)).epsilon(1e-9));
    // decreasing in T for small eps and C3 = 0
    double prev = 1e300;
    for (int i = 0; i <= 20; ++i) {
        const double v = comparison_bound(1.0, 1.0, 1.0, 1.0, 0.0, 2.0, 0.25 * i, 1e-3).value;
        CHECK(v < prev);
        prev = v;
    }
    // finite-time breakdown of the bound is reported, not thrown
    const auto bad = comparison_bound(10.0, 0.1, 10.0, 0.0, 0.0, 2.0, 5.0, 0.5);
    CHECK_FALSE(bad.valid);
    CHECK_THROWS_AS(comparison_bound(1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.1), InvalidArgument);
}

TEST_CASE("small eps keeps the bound below 2R + 2 C3 / C0") {
    const double R = 3.0, c0 = 1.0, c1 = 2.0, c2 = 1.0, c3 = 0.5, p = 2.0, T = 10.0;
    // eps small enough for this horizon
    const double eps = 1e-7;
    for (double r0 : {0.0, 1.0, R})
        for (int i = 0; i <= 100; ++i) {
            const auto b = comparison_bound(r0, c0, c1, c2, c3, p, T * i / 100.0, eps);
            REQUIRE(b.valid);
            CHECK(b.value <= 2.0 * R + 2.0 * c3 / c0);
        }
}

TEST_CASE("deterministic unforced averages equal the observable at zero") {
    SimConfig cfg = small_additive(0.01);
    cfg.noise = NoiseKind::none;
    const Simulator sim(cfg);
    KbSettings st;
    st.average = 1.0;
    const auto rep = kb_average(cfg, SpectralField(sim.modes()), observable_catalog(), st);
    for (std::size_t o = 0; o < rep.estimates.size(); ++o) {
        const double at_zero = observable_catalog()[o].eval(SpectralField(sim.modes()), sim.dynamics());
        CHECK(rep.estimates[o].stats.mean == at_zero);
        CHECK(rep.estimates[o].stats.std_error == 0.0);
    }
    CHECK(rep.burn_in == 0.5);
}

TEST_CASE("time averages are reproducible and error bars follow CLT scaling") {
    const SimConfig cfg = small_additive(0.005);
    const Simulator sim(cfg);
    const SpectralField u0(sim.modes());
    const auto catalog = observable_catalog();
    const std::vector<Observable> obs{catalog[0]};
    KbSettings st;
    st.burn_in = 1.0;
    st.average = 5.0;
    st.batches = 16;
    const auto a = kb_average(cfg, u0, obs, st);
    const auto b = kb_average(cfg, u0, obs, st);
    CHECK(a.estimates[0].stats.mean == b.estimates[0].stats.mean);
    CHECK(a.estimates[0].stats.std_error == b.estimates[0].stats.std_error);

    // pool squared error bars over independent paths to tame their own noise
    double v1 = 0.0, v2 = 0.0;
    for (std::uint32_t p = 0; p < 8; ++p) {
        KbSettings s = st;
        s.path = p;
        s.batches = 32;
        s.average = 20.0;
        const double e1 = kb_average(cfg, u0, obs, s).estimates[0].stats.std_error;
        s.average = 40.0;
        const double e2 = kb_average(cfg, u0, obs, s).estimates[0].stats.std_error;
        v1 += e1 * e1;
        v2 += e2 * e2;
    }
    const double ratio = std::sqrt(v1 / v2);
    CHECK(ratio >= 1.2);
    CHECK(ratio <= 2.8);
}

TEST_CASE("moment audit is trivial without noise and grows with the noise energy") {
    SimConfig off = small_additive(0.01);
    off.noise = NoiseKind::none;
    off.horizon = 2.0;
    off.record_stride = 10;
    const Simulator quiet(off);
    const auto z = moment_audit({quiet.simulate(SpectralField(quiet.modes()))}, 0.5, 2.0);
    for (double c : z.composite) CHECK(c == 0.0);
    CHECK(z.fit.slope == 0.0);

    std::vector<double> slopes;
    for (double q : {1.0, std::sqrt(2.0)}) {
        SimConfig cfg = small_additive(0.01);
        cfg.additive.q = std::vector<double>(12, q);
        cfg.horizon = 6.0;
        cfg.record_stride = 10;
        const Simulator sim(cfg);
        std::vector<TrajectoryRecord> recs;
        for (std::uint32_t p = 0; p < 8; ++p) recs.push_back(sim.simulate(SpectralField(sim.modes()), p));
        const auto a = moment_audit(recs, 2.0, 6.0);
        CHECK(a.components_nonnegative);
        CHECK(a.integrals_nondecreasing);
        CHECK(a.fit.r_squared > 0.95);
        slopes.push_back(a.fit.slope);
    }
    CHECK(slopes[1] > slopes[0]);
}

TEST_CASE("exponential moments: trivial cases and saturation") {
    SimConfig cfg = small_additive(0.01);
    cfg.horizon = 1.0;
    cfg.record_stride = 10;
    const Simulator sim(cfg);
    std::vector<TrajectoryRecord> recs;
    for (std::uint32_t p = 0; p < 4; ++p) recs.push_back(sim.simulate(SpectralField(sim.modes()), p));
    const auto zero = exp_moment_probe(recs, 0.0, {0.5, 1.0});
    for (const auto& p : zero.points) {
        CHECK(p.estimate == 1.0);
        CHECK(p.relative_variance == 0.0);
    }
    const auto huge = exp_moment_probe(recs, 1e9, {1.0});
    CHECK(huge.points[0].saturated == 4);
    CHECK(std::isfinite(huge.points[0].estimate));
    CHECK_THROWS_AS(exp_moment_probe(recs, 0.1, {0.55}), InvalidArgument);

    SimConfig off = cfg;
    off.noise = NoiseKind::none;
    const Simulator quiet(off);
    const auto q = exp_moment_probe({quiet.simulate(SpectralField(quiet.modes()))}, 0.5, {1.0});
    CHECK(q.points[0].estimate == 1.0);
}

TEST_CASE("support probe: zero stays zero and small data decay at the first eigenvalue") {
    SimConfig cfg;
    cfg.k_max = 2;
    cfg.dt = 1e-3;
    const auto modes = build_mode_set(2);
    const auto zero = support_probe(cfg, SpectralField(modes), {}, 0.1, 1.0);
    CHECK(zero.found);
    CHECK(zero.h1.front() == 0.0);

    const auto u0 = random_u(modes, 3, 1e-3);
    const auto r = support_probe(cfg, u0, {}, 1e-12, 0.2);
    const double step = 1.0 / (1.0 + modes->lambda1() * cfg.dt);
    for (std::size_t n = 0; n < r.t.size(); ++n)
        CHECK(r.h1[n] <= r.h1.front() * std::pow(step, double(n)) * (1.0 + 1e-6));

    const auto big = support_probe(cfg, random_u(modes, 4, 1.0), {}, 0.1, 10.0);
    CHECK(big.found);
    CHECK(big.hit_time <= 10.0);
    for (std::size_t n = 1; n < big.h0.size(); ++n) CHECK(big.h0[n] <= big.h0[n - 1]);

    const auto wiggle = support_probe(cfg, random_u(modes, 4, 1.0), {5e-4, 3.0, 2}, 0.1, 10.0);
    CHECK(wiggle.found);
    CHECK(wiggle.path_h6_sup == 5e-4);
}
