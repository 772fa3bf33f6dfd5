#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "tamed/errors.hpp"
#include "tamed/sensitivity.hpp"

using namespace tamed;
using namespace tamed::test;

namespace {

SimConfig additive_cfg(double dt, double T) {
    SimConfig cfg;
    cfg.k_max = 2;
    cfg.dt = dt;
    cfg.horizon = T;
    cfg.noise = NoiseKind::additive;
    cfg.additive.q = std::vector<double>(12, 0.8);
    cfg.seed = 31;
    return cfg;
}

}  // namespace

TEST_CASE("derivative flow matches finite differences to first order") {
    SimConfig cfg;
    cfg.k_max = 2;
    cfg.dt = 1e-3;
    cfg.horizon = 0.2;
    cfg.noise = NoiseKind::multiplicative;
    cfg.model.sigma = {0.2};
    cfg.model.h_b = {0.3};
    cfg.model.h_c = {0.5};
    cfg.model.k_noise = 1;
    const Simulator sim(cfg);
    const auto u0 = random_u(sim.modes(), 1, 3.0);
    const auto v0 = random_u(sim.modes(), 2, 1.0);
    const auto jc = jacobian_check(cfg, u0, v0, {4e-3, 2e-3, 1e-3});
    REQUIRE(jc.ratio.size() == 2);
    for (double r : jc.ratio) CHECK(r == doctest::Approx(2.0).epsilon(0.2));
    CHECK(jc.error.back() < 1e-2);
}

TEST_CASE("derivative flow is linear in the direction") {
    const SimConfig cfg = additive_cfg(2e-3, 0.05);
    const Simulator sim(cfg);
    const auto states = sim.trace(random_u(sim.modes(), 3, 2.0), 0);
    const auto v = random_u(sim.modes(), 4, 1.0);
    const auto a = derivative_flow(sim, states, 0, v);
    const auto b = derivative_flow(sim, states, 0, 2.0 * v);
    CHECK(max_abs_diff(2.0 * a.v.back(), b.v.back()) < 1e-13 * max_abs(b.v.back()));
    CHECK(a.t.back() == doctest::Approx(0.05));
}

TEST_CASE("malliavin derivative matches a shifted noise path") {
    SimConfig cfg = additive_cfg(2e-3, 0.1);
    cfg.keep_increments = true;
    const Simulator sim(cfg);
    const auto u0 = random_u(sim.modes(), 5, 3.0);
    const auto rec = sim.simulate(u0, 2);
    const auto states = sim.trace(u0, 2);
    std::vector<std::vector<double>> vdot(sim.step_count());
    for (std::size_t n = 0; n < vdot.size(); ++n)
        for (std::size_t i = 0; i < 12; ++i) vdot[n].push_back(std::cos(0.3 * double(i) + 0.01 * double(n)));
    const auto a = malliavin_derivative(sim, states, vdot);
    const double eps = 1e-5;
    auto shifted = [&](double s) {
        auto inc = rec.increments;
        for (std::size_t n = 0; n < inc.size(); ++n)
            for (std::size_t i = 0; i < 12; ++i) inc[n][i] += s * cfg.dt * vdot[n][i];
        return *sim.replay(u0, inc).final_state;
    };
    SpectralField fd = shifted(eps) - shifted(-eps);
    fd *= 1.0 / (2 * eps);
    CHECK(max_abs_diff(fd, a.v.back()) < 1e-6 * max_abs(a.v.back()));
}

TEST_CASE("control ramps the low modes to zero and satisfies the control identity") {
    std::vector<double> worst;
    for (double dt : {4e-3, 2e-3}) {
        const SimConfig cfg = additive_cfg(dt, 0.4);
        const Simulator sim(cfg);
        const auto states = sim.trace(random_u(sim.modes(), 6, 1.0), 0);
        SpectralField v0 = basis_field(sim.modes(), 0, BasisScale::H1_homog) + basis_field(sim.modes(), 20, BasisScale::H1_homog);
        v0 *= 0.1;
        const auto c = build_control(sim, states, v0, cfg.additive, {true, false});
        CHECK(c.ramp_end == doctest::Approx(0.2));
        CHECK(c.low_h1_sq.front() == doctest::Approx(0.01));
        CHECK(c.low_h1_sq.back() == 0.0);
        CHECK(std::isfinite(c.cost.back()));
        CHECK(c.cost.back() > 0.0);
        for (std::size_t i = 1; i < c.cost.size(); ++i) CHECK(c.cost[i] >= c.cost[i - 1]);
        worst.push_back(*std::max_element(c.residual_h1.begin(), c.residual_h1.end()));
    }
    // the identity v = J v0 - A v holds up to the O(dt) splitting of the scheme
    CHECK(worst[0] / worst[1] == doctest::Approx(2.0).epsilon(0.25));
    CHECK(worst[1] < 1e-2);
}

TEST_CASE("control and malliavin derivative need additive noise") {
    SimConfig cfg;
    cfg.k_max = 2;
    cfg.dt = 1e-3;
    cfg.horizon = 0.002;
    cfg.noise = NoiseKind::multiplicative;
    cfg.model.h_c = {0.1};
    cfg.model.k_noise = 1;
    const Simulator sim(cfg);
    const auto states = sim.trace(SpectralField(sim.modes()), 0);
    AdditiveNoiseMap q{std::vector<double>(12, 1.0)};
    CHECK_THROWS_AS(build_control(sim, states, basis_field(sim.modes(), 0, BasisScale::H0), q), ConfigError);
    CHECK_THROWS_AS(malliavin_derivative(sim, states, {{}, {}}), ConfigError);
    AdditiveNoiseMap singular{std::vector<double>{1.0, 0.0}};
    CHECK_THROWS_AS(apply_Q_inverse(singular, basis_field(sim.modes(), 0, BasisScale::H0)), ConfigError);
}

TEST_CASE("noise-off high-mode decay follows the first unforced eigenvalue") {
    DecaySettings st;
    st.base.k_max = 2;
    st.base.dt = 2e-4;
    st.base.horizon = 0.3;
    st.m_values = {12};
    st.noise = false;
    st.ensemble = 1;
    st.fit_start = 0.1;
    const auto pts = highmode_decay_experiment(st);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].rate == doctest::Approx(-pts[0].lambda_next).epsilon(0.02));
    CHECK(pts[0].fit_r_squared > 0.999);
}

TEST_CASE("gradient probe of a constant observable vanishes") {
    const SimConfig cfg = additive_cfg(2e-3, 0.02);
    const Simulator sim(cfg);
    const auto r = gradient_probe(cfg, constant_observable(2.0), SpectralField(sim.modes()),
                                  basis_field(sim.modes(), 0, BasisScale::H0), 4, 1e-4);
    CHECK(r.fd_estimate == 0.0);
    CHECK(r.flow_term == 0.0);
    CHECK(r.bound >= 0.0);
}
