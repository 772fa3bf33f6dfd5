#include "tamed/operators.hpp"

#include <cmath>

#include "tamed/errors.hpp"

namespace tamed {
namespace {

inline double dot3(double a0, double a1, double a2, double b0, double b1, double b2) {
    return a0 * b0 + a1 * b1 + a2 * b2;
}

}  // namespace

Dynamics::Dynamics(ModeSetPtr modes, int grid_size, TamingConfig taming, CoefficientModel model,
                   DynamicsOptions options)
    : grid_(modes, grid_size, dealias_floor(*modes)),
      taming_(taming),
      model_(std::move(model)),
      options_(options),
      forcing_field_(modes) {
    validate(taming_);
    check_shape(model_);
    if (model_.forcing.size() > modes->size()) throw InvalidArgument("F has more coordinates than the mode set");
    forcing_field_ = from_basis_coordinates(modes, model_.forcing, BasisScale::unit_amplitude);
    for (int k = 0; k < model_.k_noise; ++k) {
        const std::size_t i = noise_profile_mode(*modes, k);
        profile_.push_back(grid_.to_physical(basis_field(modes, i, BasisScale::unit_amplitude)));
        sine_.push_back(grid_.to_physical(basis_field(modes, modes->partner(i), BasisScale::unit_amplitude)));
    }
}

PhysicalState Dynamics::physical(const SpectralField& u) const {
    return PhysicalState{grid_.to_physical(u), grid_.gradient(u)};
}

SpectralField Dynamics::project(const GridField& w) const { return grid_.to_spectral(w); }

SpectralField Dynamics::advection(const SpectralField& u) const {
    const PhysicalState s = physical(u);
    GridField w(grid_.size());
    for (std::size_t p = 0; p < s.u.points(); ++p) {
        const double u0 = s.u.c[0][p], u1 = s.u.c[1][p], u2 = s.u.c[2][p];
        for (int c = 0; c < 3; ++c) w.c[c][p] = u0 * s.grad[0].c[c][p] + u1 * s.grad[1].c[c][p] + u2 * s.grad[2].c[c][p];
    }
    return project(w);
}

SpectralField Dynamics::taming_term(const SpectralField& u) const {
    const GridField g = grid_.to_physical(u);
    GridField w(grid_.size());
    for (std::size_t p = 0; p < g.points(); ++p) {
        const double r = dot3(g.c[0][p], g.c[1][p], g.c[2][p], g.c[0][p], g.c[1][p], g.c[2][p]);
        const double gn = taming_g(r, taming_);
        for (int c = 0; c < 3; ++c) w.c[c][p] = gn * g.c[c][p];
    }
    return project(w);
}

SpectralField Dynamics::forcing(const SpectralField& u) const {
    SpectralField out = forcing_field_;
    if (model_.a_f == 0.0) return out;
    const GridField g = grid_.to_physical(u);
    GridField w(grid_.size());
    for (std::size_t p = 0; p < g.points(); ++p) {
        const Vec3 ps = psi({g.c[0][p], g.c[1][p], g.c[2][p]});
        for (int c = 0; c < 3; ++c) w.c[c][p] = model_.a_f * ps[c];
    }
    out += project(w);
    return out;
}

SpectralField Dynamics::drift_A(const SpectralField& u) const {
    SpectralField out = stokes(u);
    if (!options_.advection && !options_.taming) return out;
    const PhysicalState s = physical(u);
    GridField w(grid_.size());
    for (std::size_t p = 0; p < s.u.points(); ++p) {
        const double u0 = s.u.c[0][p], u1 = s.u.c[1][p], u2 = s.u.c[2][p];
        const double gn = options_.taming ? taming_g(dot3(u0, u1, u2, u0, u1, u2), taming_) : 0.0;
        for (int c = 0; c < 3; ++c) {
            double adv = 0.0;
            if (options_.advection)
                adv = u0 * s.grad[0].c[c][p] + u1 * s.grad[1].c[c][p] + u2 * s.grad[2].c[c][p];
            w.c[c][p] = -adv - gn * s.u.c[c][p];
        }
    }
    out += project(w);
    return out;
}

SpectralField Dynamics::noise_B(const SpectralField& u, int k) const {
    if (k < 0 || k >= model_.k_noise) throw InvalidArgument("noise direction out of range");
    std::vector<double> dw(model_.k_noise, 0.0);
    dw[k] = 1.0;
    const PhysicalState s = physical(u);
    SpectralField out = increment(u, s, 0.0, dw);
    return out;
}

SpectralField Dynamics::increment(const SpectralField& u, const PhysicalState& s, double dt,
                                  std::span<const double> dw) const {
    if (dw.size() != 0 && dw.size() != static_cast<std::size_t>(model_.k_noise))
        throw InvalidArgument("increment count does not match K_noise");
    const std::size_t pts = s.u.points();
    // sum_k dW_k s_k Phi_k, sum_k dW_k b_k, sum_k dW_k c_k Psi_k
    GridField S(grid_.size()), C(grid_.size());
    double bsum = 0.0;
    bool transport = false, state = false;
    for (std::size_t k = 0; k < dw.size(); ++k) {
        const double sk = model_.s(int(k)) * dw[k], ck = model_.c(int(k)) * dw[k];
        bsum += model_.b(int(k)) * dw[k];
        if (sk != 0.0) {
            transport = true;
            for (int c = 0; c < 3; ++c)
                for (std::size_t p = 0; p < pts; ++p) S.c[c][p] += sk * profile_[k].c[c][p];
        }
        if (ck != 0.0) {
            state = true;
            for (int c = 0; c < 3; ++c)
                for (std::size_t p = 0; p < pts; ++p) C.c[c][p] += ck * sine_[k].c[c][p];
        }
    }
    const double psi_coef = dt * model_.a_f + bsum;
    GridField w(grid_.size());
    for (std::size_t p = 0; p < pts; ++p) {
        const double u0 = s.u.c[0][p], u1 = s.u.c[1][p], u2 = s.u.c[2][p];
        const double r = dot3(u0, u1, u2, u0, u1, u2);
        const double gn = options_.taming && dt != 0.0 ? taming_g(r, taming_) : 0.0;
        const double a = psi_coef != 0.0 ? 1.0 / std::sqrt(1.0 + r) : 0.0;
        const double s0 = S.c[0][p], s1 = S.c[1][p], s2 = S.c[2][p];
        for (int c = 0; c < 3; ++c) {
            const double g0 = s.grad[0].c[c][p], g1 = s.grad[1].c[c][p], g2 = s.grad[2].c[c][p];
            double v = -gn * s.u.c[c][p];
            if (options_.advection) v -= u0 * g0 + u1 * g1 + u2 * g2;
            v *= dt;
            if (transport) v += s0 * g0 + s1 * g1 + s2 * g2;
            v += psi_coef * a * s.u.c[c][p];
            if (state) v += C.c[c][p];
            w.c[c][p] = v;
        }
    }
    SpectralField out = project(w);
    if (dt != 0.0) out.axpy(dt, forcing_field_);
    (void)u;
    return out;
}

SpectralField Dynamics::tangent_increment(const PhysicalState& s, const SpectralField& v, double dt,
                                          std::span<const double> dw) const {
    if (dw.size() != 0 && dw.size() != static_cast<std::size_t>(model_.k_noise))
        throw InvalidArgument("increment count does not match K_noise");
    const PhysicalState t = physical(v);
    const std::size_t pts = s.u.points();
    GridField S(grid_.size());
    double bsum = 0.0;
    bool transport = false;
    for (std::size_t k = 0; k < dw.size(); ++k) {
        const double sk = model_.s(int(k)) * dw[k];
        bsum += model_.b(int(k)) * dw[k];
        if (sk != 0.0) {
            transport = true;
            for (int c = 0; c < 3; ++c)
                for (std::size_t p = 0; p < pts; ++p) S.c[c][p] += sk * profile_[k].c[c][p];
        }
    }
    const double psi_coef = dt * model_.a_f + bsum;
    GridField w(grid_.size());
    for (std::size_t p = 0; p < pts; ++p) {
        const double u0 = s.u.c[0][p], u1 = s.u.c[1][p], u2 = s.u.c[2][p];
        const double v0 = t.u.c[0][p], v1 = t.u.c[1][p], v2 = t.u.c[2][p];
        const double r = dot3(u0, u1, u2, u0, u1, u2);
        const double uv = dot3(u0, u1, u2, v0, v1, v2);
        double gn = 0.0, gp = 0.0;
        if (options_.taming) {
            gn = taming_g(r, taming_);
            gp = taming_g_prime(r, taming_);
        }
        double a = 0.0, a3 = 0.0;
        if (psi_coef != 0.0) {
            a = 1.0 / std::sqrt(1.0 + r);
            a3 = a * a * a;
        }
        const double s0 = S.c[0][p], s1 = S.c[1][p], s2 = S.c[2][p];
        for (int c = 0; c < 3; ++c) {
            double x = -gn * t.u.c[c][p] - 2.0 * gp * uv * s.u.c[c][p];
            if (options_.advection) {
                x -= v0 * s.grad[0].c[c][p] + v1 * s.grad[1].c[c][p] + v2 * s.grad[2].c[c][p];
                x -= u0 * t.grad[0].c[c][p] + u1 * t.grad[1].c[c][p] + u2 * t.grad[2].c[c][p];
            }
            x *= dt;
            if (transport) x += s0 * t.grad[0].c[c][p] + s1 * t.grad[1].c[c][p] + s2 * t.grad[2].c[c][p];
            if (psi_coef != 0.0) x += psi_coef * (a * t.u.c[c][p] - a3 * s.u.c[c][p] * uv);
            w.c[c][p] = x;
        }
    }
    return project(w);
}

SpectralField Dynamics::K_increment(const PhysicalState& s, const SpectralField& v, double dt) const {
    const PhysicalState t = physical(v);
    GridField w(grid_.size());
    for (std::size_t p = 0; p < s.u.points(); ++p) {
        const double u0 = s.u.c[0][p], u1 = s.u.c[1][p], u2 = s.u.c[2][p];
        const double v0 = t.u.c[0][p], v1 = t.u.c[1][p], v2 = t.u.c[2][p];
        double gn = 0.0, gp = 0.0;
        if (options_.taming) {
            const double r = dot3(u0, u1, u2, u0, u1, u2);
            gn = taming_g(r, taming_);
            gp = taming_g_prime(r, taming_);
        }
        const double uv = dot3(u0, u1, u2, v0, v1, v2);
        for (int c = 0; c < 3; ++c) {
            double x = -gn * t.u.c[c][p] - 2.0 * gp * uv * s.u.c[c][p];
            if (options_.advection) {
                x -= v0 * s.grad[0].c[c][p] + v1 * s.grad[1].c[c][p] + v2 * s.grad[2].c[c][p];
                x -= u0 * t.grad[0].c[c][p] + u1 * t.grad[1].c[c][p] + u2 * t.grad[2].c[c][p];
            }
            w.c[c][p] = dt * x;
        }
    }
    return project(w);
}

SpectralField Dynamics::K_operator(const SpectralField& u, const SpectralField& v) const {
    return K_increment(physical(u), v, 1.0);
}

SpectralField Dynamics::forcing_derivative(const SpectralField& u, const SpectralField& v) const {
    if (model_.a_f == 0.0) return SpectralField(mode_set_ptr());
    const GridField g = grid_.to_physical(u);
    const GridField h = grid_.to_physical(v);
    GridField w(grid_.size());
    for (std::size_t p = 0; p < g.points(); ++p) {
        const double u0 = g.c[0][p], u1 = g.c[1][p], u2 = g.c[2][p];
        const double r = dot3(u0, u1, u2, u0, u1, u2);
        const double a = 1.0 / std::sqrt(1.0 + r);
        const double uv = dot3(u0, u1, u2, h.c[0][p], h.c[1][p], h.c[2][p]);
        for (int c = 0; c < 3; ++c) w.c[c][p] = model_.a_f * (a * h.c[c][p] - a * a * a * g.c[c][p] * uv);
    }
    return project(w);
}

SpectralField Dynamics::noise_B_derivative(const SpectralField& u, const SpectralField& v, int k) const {
    if (k < 0 || k >= model_.k_noise) throw InvalidArgument("noise direction out of range");
    std::vector<double> dw(model_.k_noise, 0.0);
    dw[k] = 1.0;
    return tangent_increment(physical(u), v, 0.0, dw);
}

double Dynamics::taming_energy(const PhysicalState& s) const {
    double acc = 0.0;
    for (std::size_t p = 0; p < s.u.points(); ++p) {
        const double r = dot3(s.u.c[0][p], s.u.c[1][p], s.u.c[2][p], s.u.c[0][p], s.u.c[1][p], s.u.c[2][p]);
        acc += taming_g(r, taming_) * r;
    }
    return acc / double(s.u.points());
}

double Dynamics::taming_fraction(const PhysicalState& s) const {
    std::size_t n = 0;
    for (std::size_t p = 0; p < s.u.points(); ++p) {
        const double r = dot3(s.u.c[0][p], s.u.c[1][p], s.u.c[2][p], s.u.c[0][p], s.u.c[1][p], s.u.c[2][p]);
        if (r > taming_.threshold) ++n;
    }
    return double(n) / double(s.u.points());
}

double Dynamics::gradient_weighted_energy(const PhysicalState& s) const {
    double acc = 0.0;
    for (std::size_t p = 0; p < s.u.points(); ++p) {
        const double r = dot3(s.u.c[0][p], s.u.c[1][p], s.u.c[2][p], s.u.c[0][p], s.u.c[1][p], s.u.c[2][p]);
        double g2 = 0.0;
        for (int j = 0; j < 3; ++j)
            for (int c = 0; c < 3; ++c) g2 += s.grad[j].c[c][p] * s.grad[j].c[c][p];
        acc += r * g2;
    }
    return acc / double(s.u.points());
}

double Dynamics::cN(const SpectralField& u, const PhysicalState& s) const {
    return sobolev_norm_sq(u, 2, NormConvention::homogeneous) + gradient_weighted_energy(s);
}

double Dynamics::aliasing_residual(const SpectralField& u) const {
    const GridField g = grid_.to_physical(u);
    GridField w(grid_.size());
    for (std::size_t p = 0; p < g.points(); ++p) {
        const double r = dot3(g.c[0][p], g.c[1][p], g.c[2][p], g.c[0][p], g.c[1][p], g.c[2][p]);
        const double gn = taming_g(r, taming_);
        for (int c = 0; c < 3; ++c) w.c[c][p] = gn * g.c[c][p];
    }
    return grid_.energy_beyond_cutoff(w);
}

SpectralField advection(const SpectralField& u, int grid_size) {
    return Dynamics(u.mode_set_ptr(), grid_size, TamingConfig{}).advection(u);
}

SpectralField taming_term(const SpectralField& u, const TamingConfig& cfg, int grid_size) {
    return Dynamics(u.mode_set_ptr(), grid_size, cfg).taming_term(u);
}

SpectralField drift_A(const SpectralField& u, const TamingConfig& cfg, int grid_size) {
    return Dynamics(u.mode_set_ptr(), grid_size, cfg).drift_A(u);
}

SpectralField K_operator(const SpectralField& u, const SpectralField& v, const TamingConfig& cfg, int grid_size) {
    if (!u.same_modes(v)) throw ModeSetMismatch("K_operator arguments on different mode sets");
    return Dynamics(u.mode_set_ptr(), grid_size, cfg).K_operator(u, v);
}

SpectralField apply_Q(const ModeSetPtr& modes, const AdditiveNoiseMap& map, std::span<const double> c) {
    if (c.size() != map.m()) throw InvalidArgument("Q expects one coordinate per forced mode");
    std::vector<double> scaled(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) scaled[i] = map.q[i] * c[i];
    return from_basis_coordinates(modes, scaled, BasisScale::H1_homog);
}

std::vector<double> apply_Q_inverse(const AdditiveNoiseMap& map, const SpectralField& v) {
    std::vector<double> out(map.m());
    for (std::size_t i = 0; i < map.m(); ++i) {
        if (!(map.q[i] > 0.0)) throw ConfigError("Q is not invertible: q_" + std::to_string(i + 1) + " = 0");
        out[i] = basis_coordinate(v, i, BasisScale::H1_homog) / map.q[i];
    }
    return out;
}

}  // namespace tamed
