#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "support.hpp"
#include "tamed/errors.hpp"
#include "tamed/integrator.hpp"
#include "tamed/stats.hpp"
#include "tamed/trajectory_io.hpp"

using namespace tamed;
using namespace tamed::test;

TEST_CASE("philox4x32-10 known answers") {
    using W = std::array<std::uint32_t, 4>;
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == W{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          W{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          W{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("brownian increments are addressable and have the right law") {
    const RngKey key{42, 3};
    CHECK(brownian_increments(key, 17, 0.01, 5) == brownian_increments(key, 17, 0.01, 5));
    CHECK(brownian_increments(key, 17, 0.01, 5) != brownian_increments(key, 18, 0.01, 5));
    CHECK(brownian_increments(key, 17, 0.01, 5) != brownian_increments(RngKey{42, 4}, 17, 0.01, 5));
    // a prefix of directions does not depend on how many are drawn
    const auto a = brownian_increments(key, 5, 0.01, 3);
    const auto b = brownian_increments(key, 5, 0.01, 8);
    for (int i = 0; i < 3; ++i) CHECK(a[i] == b[i]);
    std::vector<double> xs;
    const double dt = 0.01;
    for (std::uint64_t s = 0; s < 20000; ++s)
        for (double x : brownian_increments(key, s, dt, 4)) xs.push_back(x);
    const double n = double(xs.size());
    CHECK(std::abs(mean(xs)) < 4.0 * std::sqrt(dt / n));
    CHECK(variance(xs) == doctest::Approx(dt).epsilon(4.0 * std::sqrt(2.0 / n)));
    double k4 = 0.0;
    for (double x : xs) k4 += x * x * x * x;
    CHECK(k4 / n == doctest::Approx(3.0 * dt * dt).epsilon(0.05));
}

TEST_CASE("single mode follows the discrete heat flow") {
    for (Scheme scheme : {Scheme::semi_implicit_em, Scheme::explicit_em}) {
        SimConfig cfg;
        cfg.k_max = 2;
        cfg.dt = 1e-3;
        cfg.horizon = 0.05;
        cfg.scheme = scheme;
        const Simulator sim(cfg);
        // a single transverse cosine mode has no self-advection and |u|^2 stays below N
        const auto u0 = 0.5 * basis_field(sim.modes(), 3, BasisScale::unit_amplitude);
        const auto rec = sim.simulate(u0);
        const double lam = (*sim.modes())[3].lambda;
        const double factor = scheme == Scheme::semi_implicit_em ? 1.0 / (1.0 + lam * cfg.dt) : 1.0 - lam * cfg.dt;
        const double expected = sobolev_norm(u0, 0, NormConvention::full) * std::pow(factor, double(rec.steps));
        CHECK(rec.steps == 50);
        CHECK(rec.rows.back().h0 == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("additive noise reproduces the discrete Ornstein-Uhlenbeck variance") {
    SimConfig cfg;
    cfg.k_max = 1;
    cfg.dt = 2e-3;
    cfg.horizon = 0.04;
    cfg.noise = NoiseKind::additive;
    cfg.additive.q = std::vector<double>(12, 0.7);
    cfg.options.advection = false;
    cfg.options.taming = false;
    const Simulator sim(cfg);
    const SpectralField u0(sim.modes());
    std::vector<double> x2;
    for (std::uint32_t p = 0; p < 400; ++p) {
        const auto states = sim.trace(u0, p);
        for (std::size_t i = 0; i < 12; ++i) {
            const double c = basis_coordinate(states.back(), i, BasisScale::H1_homog);
            x2.push_back(c * c);
        }
    }
    const double a = 1.0 / (1.0 + (*sim.modes())[0].lambda * cfg.dt);
    double expected = 0.0;
    for (std::uint64_t j = 1; j <= sim.step_count(); ++j) expected += 0.49 * cfg.dt * std::pow(a, 2.0 * double(j));
    CHECK(mean(x2) == doctest::Approx(expected).epsilon(0.1));
}

TEST_CASE("replay, trace and twins agree with simulate") {
    SimConfig cfg;
    cfg.k_max = 2;
    cfg.dt = 2e-3;
    cfg.horizon = 0.1;
    cfg.noise = NoiseKind::multiplicative;
    cfg.model.sigma = {0.2, 0.1};
    cfg.model.h_b = {0.3, 0.0};
    cfg.model.h_c = {0.4, 0.4};
    cfg.model.k_noise = 2;
    cfg.keep_increments = true;
    cfg.snapshots = true;
    cfg.seed = 99;
    const Simulator sim(cfg);
    const auto u0 = random_u(sim.modes(), 1, 2.0);
    const auto rec = sim.simulate(u0, 5);
    const auto again = sim.replay(u0, rec.increments);
    CHECK(max_abs_diff(*rec.final_state, *again.final_state) == 0.0);
    const auto states = sim.trace(u0, 5);
    CHECK(max_abs_diff(states.back(), *rec.final_state) == 0.0);
    const auto tw = sim.twin_simulate(u0, u0, 5);
    for (double d : tw.dist_h1) CHECK(d == 0.0);
    for (const auto& row : rec.rows) {
        CHECK(row.div_residual < 1e-12);
        CHECK(row.imag_residual < 1e-12);
    }
    const auto other = sim.simulate(u0, 6);
    CHECK(max_abs_diff(*rec.final_state, *other.final_state) > 0.0);
}

TEST_CASE("recorded diagnostics match direct computation") {
    SimConfig cfg;
    cfg.k_max = 2;
    cfg.horizon = 0.0;
    const Simulator sim(cfg);
    const auto u = random_u(sim.modes(), 2, 5.0);
    const RecordRow r = sim.diagnostics(u, 0);
    CHECK(r.h1_homog == doctest::Approx(5.0));
    CHECK(r.h0 == doctest::Approx(sobolev_norm(u, 0, NormConvention::full)));
    CHECK(r.h2_full == doctest::Approx(sobolev_norm(u, 2, NormConvention::full)));
    CHECK(r.au_u == doctest::Approx(pairing(sim.dynamics().drift_A(u), u, PairingSpace::H0)));
    const auto g = sim.dynamics().grid().to_physical(u);
    CHECK(r.l4_pow4 == doctest::Approx(lp_integral(g, 4)));
    CHECK(r.taming_fraction >= 0.0);
    CHECK(r.taming_fraction <= 1.0);
    CHECK(r.cn >= sobolev_norm_sq(u, 2, NormConvention::homogeneous));
}

TEST_CASE("galerkin projection and step counts") {
    SimConfig cfg;
    cfg.k_max = 2;
    cfg.n = 12;
    cfg.dt = 0.3;
    cfg.horizon = 1.0;
    cfg.noise = NoiseKind::additive;
    cfg.additive.q = std::vector<double>(12, 1.0);
    const Simulator sim(cfg);
    CHECK(sim.step_count() == 4);
    const auto states = sim.trace(SpectralField(sim.modes()), 0);
    for (std::size_t i = 12; i < 64; ++i) CHECK(states.back()[i] == Complex{});
    CHECK_THROWS_AS(sim.check_in_galerkin_space(random_u(sim.modes(), 3)), InvalidArgument);

    SimConfig c2;
    c2.dt = 0.1;
    c2.horizon = 0.3;
    CHECK(Simulator(c2).step_count() == 3);
    c2.n = 13;
    CHECK_THROWS(Simulator{c2});
    c2.n = 0;
    c2.grid = 6;
    CHECK_THROWS_AS(Simulator{c2}, ResolutionError);
}

TEST_CASE("explicit scheme with an unstable step raises blow-up") {
    SimConfig cfg;
    cfg.k_max = 2;
    cfg.dt = 0.1;
    cfg.horizon = 10.0;
    cfg.scheme = Scheme::explicit_em;
    const Simulator sim(cfg);
    CHECK_THROWS_AS(sim.simulate(random_u(sim.modes(), 4)), BlowUpError);
}

TEST_CASE("trajectory CSV and snapshot files round-trip") {
    SimConfig cfg;
    cfg.k_max = 2;
    cfg.dt = 1e-3;
    cfg.horizon = 0.01;
    cfg.snapshots = true;
    cfg.record_stride = 3;
    const Simulator sim(cfg);
    const auto rec = sim.simulate(random_u(sim.modes(), 5, 3.0));
    CHECK(rec.rows.size() == 5);  // 0, 3, 6, 9, 10
    std::stringstream csv;
    write_csv(csv, rec);
    const auto rows = read_csv(csv);
    REQUIRE(rows.size() == rec.rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].t == rec.rows[i].t);
        CHECK(rows[i].h1_full == rec.rows[i].h1_full);
        CHECK(rows[i].cn == rec.rows[i].cn);
    }
    std::stringstream bin(std::ios::in | std::ios::out | std::ios::binary);
    write_snapshots(bin, rec);
    const auto snap = read_snapshots(bin);
    REQUIRE(snap.fields.size() == rec.snapshots.size());
    for (std::size_t i = 0; i < snap.fields.size(); ++i) CHECK(max_abs_diff(snap.fields[i], rec.snapshots[i]) == 0.0);
    std::stringstream bad("not a snapshot file");
    CHECK_THROWS_AS(read_snapshots(bad), IoError);
}

TEST_CASE("ensembles do not depend on the worker count") {
    SimConfig cfg;
    cfg.k_max = 1;
    cfg.dt = 1e-3;
    cfg.horizon = 0.02;
    cfg.noise = NoiseKind::additive;
    cfg.additive.q = std::vector<double>(12, 1.0);
    const Simulator sim(cfg);
    const SpectralField u0(sim.modes());
    auto run = [&] {
        return parallel_map(6, [&](std::size_t p) { return *sim.simulate(u0, std::uint32_t(p)).final_state; });
    };
    setenv("TAMED_THREADS", "1", 1);
    const auto a = run();
    setenv("TAMED_THREADS", "3", 1);
    const auto b = run();
    unsetenv("TAMED_THREADS");
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(max_abs_diff(a[i], b[i]) == 0.0);
}

TEST_CASE("scheme and noise names parse") {
    CHECK(parse_scheme("explicit_em") == Scheme::explicit_em);
    CHECK(parse_noise_kind(to_string(NoiseKind::additive)) == NoiseKind::additive);
    CHECK_THROWS_AS(parse_scheme("rk4"), ConfigError);
}
