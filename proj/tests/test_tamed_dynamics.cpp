#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tamed/coefficients.hpp"
#include "tamed/errors.hpp"
#include "tamed/operators.hpp"
#include "tamed/taming.hpp"

using namespace tamed;
using namespace tamed::test;

TEST_CASE("taming function shape") {
    for (double N : {0.5, 1.0, 7.0}) {
        const TamingConfig cfg{N};
        CHECK(taming_g(0.0, cfg) == 0.0);
        CHECK(taming_g(N, cfg) == 0.0);
        CHECK(taming_g(N + 1.0, cfg) == doctest::Approx(1.0));
        CHECK(taming_g(N + 3.5, cfg) == doctest::Approx(3.5));
        double gmax = 0.0;
        for (int i = 0; i <= 4000; ++i) {
            const double r = N - 1.0 + 3.0 * i / 4000.0;
            const double gp = taming_g_prime(r, cfg);
            CHECK(gp >= 0.0);
            CHECK(gp <= 2.0);
            gmax = std::max(gmax, gp);
            if (r <= N || r >= N + 1.0) CHECK(taming_g_second(r, cfg) == 0.0);
            // g(r) >= r - N - excess, the lower bound behind the taming coercivity
            CHECK(taming_g(r, cfg) >= r - N - taming_blend_excess() - 1e-15);
        }
        CHECK(gmax == doctest::Approx(taming_lipschitz()).epsilon(1e-6));
    }
    CHECK(taming_lipschitz() == doctest::Approx(1.512));
    CHECK(taming_blend_excess() == doctest::Approx(16.0 / 81.0).epsilon(1e-10));
    CHECK_THROWS_AS(validate(TamingConfig{0.0}), InvalidArgument);
}

TEST_CASE("taming derivatives match second-order finite differences") {
    const TamingConfig cfg{1.0};
    for (double r : {1.13, 1.4, 1.77, 1.95}) {
        double prev1 = 0.0, prev2 = 0.0;
        for (int level = 0; level < 3; ++level) {
            const double d = 1e-2 / std::pow(2.0, level);
            const double fd1 = (taming_g(r + d, cfg) - taming_g(r - d, cfg)) / (2 * d);
            const double fd2 = (taming_g_prime(r + d, cfg) - taming_g_prime(r - d, cfg)) / (2 * d);
            const double e1 = std::abs(fd1 - taming_g_prime(r, cfg));
            const double e2 = std::abs(fd2 - taming_g_second(r, cfg));
            if (level > 0) {
                CHECK(prev1 / e1 == doctest::Approx(4.0).epsilon(0.05));
                CHECK(prev2 / e2 == doctest::Approx(4.0).epsilon(0.05));
            }
            prev1 = e1;
            prev2 = e2;
        }
    }
}

TEST_CASE("advection matches the dense convolution and is antisymmetric") {
    const auto ms = build_mode_set(2);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto u = random_u(ms, seed, 3.0);
        const auto ref = dense_advection(u);
        const auto got = advection(u, 7);
        CHECK(max_abs_diff(ref, got) <= 1e-11 * max_abs(ref));
        CHECK(max_abs_diff(advection(u, 10), got) <= 1e-12 * max_abs(ref));
        const double skew = pairing(got, u, PairingSpace::H0);
        CHECK(std::abs(skew) <= 1e-11 * sobolev_norm(got, 0, NormConvention::full) * sobolev_norm(u, 0, NormConvention::full));
    }
    CHECK_THROWS_AS(advection(random_u(ms, 1), 6), ResolutionError);
}

TEST_CASE("energy identity across taming regimes") {
    const auto ms = build_mode_set(2);
    const TamingConfig cfg{1.0};
    const Dynamics dyn(ms, 7, cfg);
    int active = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const double h1 = 0.05 * std::pow(1.6, double(seed));
        const auto u = random_u(ms, 100 + seed, h1);
        const auto s = dyn.physical(u);
        const double au = pairing(dyn.drift_A(u), u, PairingSpace::H0);
        const double grad = sobolev_norm_sq(u, 1, NormConvention::homogeneous);
        const double tame = direct_taming_energy(u, 7, cfg);
        if (tame > 0.0) ++active;
        CHECK(std::abs(au + grad + tame) <= 1e-8 * (1.0 + grad * grad));
        CHECK(dyn.taming_energy(s) == doctest::Approx(tame).epsilon(1e-12));
    }
    CHECK(active > 5);
    CHECK(active < 20);
}

TEST_CASE("K operator is the derivative of the drift") {
    const auto ms = build_mode_set(2);
    const TamingConfig cfg{1.0};
    const Dynamics dyn(ms, 7, cfg);
    const auto u = random_u(ms, 11, 8.0);
    const auto v = random_u(ms, 12, 1.0);
    const auto k = dyn.K_operator(u, v);
    double prev = 0.0;
    for (int level = 0; level < 3; ++level) {
        const double e = 1e-3 / std::pow(2.0, level);
        SpectralField fd = dyn.drift_A(u + e * v) - dyn.drift_A(u - e * v);
        fd *= 1.0 / (2 * e);
        fd -= stokes(v);
        const double err = max_abs_diff(fd, k);
        if (level > 0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.1));
        prev = err;
    }
    CHECK(prev < 1e-5 * max_abs(k));
}

TEST_CASE("noise and forcing derivatives match finite differences") {
    const auto ms = build_mode_set(2);
    CoefficientModel m;
    m.a_f = 0.7;
    m.sigma = {0.2, 0.1, 0.15};
    m.h_b = {0.3, 0.2, 0.1};
    m.h_c = {0.5, 0.0, 0.2};
    m.k_noise = 3;
    const Dynamics dyn(ms, 7, TamingConfig{1.0}, m);
    const auto u = random_u(ms, 13, 6.0);
    const auto v = random_u(ms, 14, 1.0);
    const double e = 1e-5;
    for (int k = 0; k < 3; ++k) {
        SpectralField fd = dyn.noise_B(u + e * v, k) - dyn.noise_B(u - e * v, k);
        fd *= 1.0 / (2 * e);
        const auto an = dyn.noise_B_derivative(u, v, k);
        CHECK(max_abs_diff(fd, an) < 1e-7 * (1.0 + max_abs(an)));
    }
    SpectralField fd = dyn.forcing(u + e * v) - dyn.forcing(u - e * v);
    fd *= 1.0 / (2 * e);
    const auto an = dyn.forcing_derivative(u, v);
    CHECK(max_abs_diff(fd, an) < 1e-7 * (1.0 + max_abs(an)));
}

TEST_CASE("transport part of B is first order and divergence free") {
    const auto ms = build_mode_set(2);
    CoefficientModel m;
    m.sigma = {0.3};
    m.k_noise = 1;
    const Dynamics dyn(ms, 7, TamingConfig{1.0}, m);
    const auto u = random_u(ms, 15, 2.0);
    const auto b = dyn.noise_B(u, 0);
    CHECK(divergence_residual(b) < 1e-13);
    CHECK(reality_defect(b) < 1e-14);
    // linear in u when h = 0
    const auto b2 = dyn.noise_B(2.0 * u, 0);
    CHECK(max_abs_diff(b2, 2.0 * b) < 1e-13 * max_abs(b2));
}

TEST_CASE("assumption validators") {
    const auto ms = build_mode_set(2);
    CoefficientModel m;
    m.a_f = 0.5;
    m.forcing = {0.2, 0.0, 0.1};
    m.sigma = {0.2, 0.2};
    m.h_b = {0.3, 0.1};
    m.h_c = {0.5, 0.5};
    m.k_noise = 2;
    const auto rep = validate_assumptions(m, ms, 2000, 1);
    CHECK(rep.passed());
    CHECK(rep.sigma_sup == doctest::Approx(0.08));
    CHECK(rep.c_f == doctest::Approx(std::max(2 * 0.25, 0.5)));
    CHECK(rep.dh_du_sq == doctest::Approx(0.1));
    CHECK(rep.lp1_constant == doctest::Approx(0.4));
    const double l0 = (*ms)[noise_profile_mode(*ms, 0)].lambda;
    const double l1 = (*ms)[noise_profile_mode(*ms, 1)].lambda;
    CHECK(rep.h_h_l1 == doctest::Approx(0.25 * (1 + l0) + 0.25 * (1 + l1)));
    for (const auto& c : rep.clauses) CHECK(c.worst_ratio <= 1.0);

    m.sigma = {0.4, 0.4};
    try {
        validate_assumptions(m, ms, 100, 1);
        FAIL("expected a violation");
    } catch (const AssumptionViolation& e) {
        CHECK(e.clause() == "sigma-bound");
        CHECK(std::string(e.what()).find("1/4") != std::string::npos);
    }
    CHECK_FALSE(assess_assumptions(m, ms, 100, 1).passed());
}

TEST_CASE("coefficient model round-trips through flat config") {
    CoefficientModel m;
    m.a_f = 0.1 + 0.2;
    m.forcing = {1.0 / 3.0, 0.0};
    m.sigma = {0.123456789012345};
    m.h_b = {0.3};
    m.h_c = {0.5};
    m.k_noise = 1;
    FlatConfig c;
    write_model(c, m);
    const auto back = read_model(FlatConfig::parse(c.to_string()));
    CHECK(back.a_f == m.a_f);
    CHECK(back.forcing == m.forcing);
    CHECK(back.sigma == m.sigma);
    CHECK(back.k_noise == 1);
}

TEST_CASE("additive noise map constants") {
    const auto ms = build_mode_set(2);
    AdditiveNoiseMap q{std::vector<double>(12, 0.5)};
    CHECK(q.e1() == doctest::Approx(3.0));
    CHECK(q.e0(*ms) == doctest::Approx(3.0 / (*ms)[0].lambda));
    std::vector<double> c(12);
    for (std::size_t i = 0; i < 12; ++i) c[i] = double(i) - 5.5;
    const auto v = apply_Q(ms, q, c);
    const auto back = apply_Q_inverse(q, v);
    for (std::size_t i = 0; i < 12; ++i) CHECK(back[i] == doctest::Approx(c[i]));
    CHECK_THROWS_AS(check_shape(AdditiveNoiseMap{std::vector<double>(13, 1.0)}, *ms), InvalidArgument);
}
