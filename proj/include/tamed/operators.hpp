#pragma once

#include <array>
#include <span>
#include <vector>

#include "tamed/coefficients.hpp"
#include "tamed/grid.hpp"
#include "tamed/taming.hpp"

namespace tamed {

/// Grid samples of a field and its gradient. grad[j].c[c] holds d u_c / d x_j.
struct PhysicalState {
    GridField u;
    std::array<GridField, 3> grad;
};

/// Switches for manufactured test configurations.
struct DynamicsOptions {
    bool advection = true;
    bool taming = true;
};

/// Pseudo-spectral evaluation of the tamed drift, the coefficient families
/// and their linearizations on one mode set.
///
/// Quadratic terms are alias-free on the retained modes because the grid is at
/// least 3 K_max + 1. The taming term and psi(u) are not polynomial, so their
/// projection is a grid quadrature; aliasing_residual() measures what it drops.
class Dynamics {
public:
    Dynamics(ModeSetPtr modes, int grid_size, TamingConfig taming, CoefficientModel model = {},
             DynamicsOptions options = {});

    const ModeSet& modes() const noexcept { return grid_.modes(); }
    const ModeSetPtr& mode_set_ptr() const noexcept { return grid_.mode_set_ptr(); }
    const SpectralGrid& grid() const noexcept { return grid_; }
    const TamingConfig& taming() const noexcept { return taming_; }
    const CoefficientModel& model() const noexcept { return model_; }
    const DynamicsOptions& options() const noexcept { return options_; }
    int noise_directions() const noexcept { return model_.k_noise; }

    PhysicalState physical(const SpectralField& u) const;

    /// P((u . grad) u)
    SpectralField advection(const SpectralField& u) const;
    /// P(g_N(|u|^2) u)
    SpectralField taming_term(const SpectralField& u) const;
    /// P f(u) = a_f P psi(u) + F
    SpectralField forcing(const SpectralField& u) const;
    /// P Delta u - P((u . grad) u) - P(g_N(|u|^2) u)
    SpectralField drift_A(const SpectralField& u) const;
    /// B_k(u) = P((sigma_k . grad) u) + P h_k(u)
    SpectralField noise_B(const SpectralField& u, int k) const;
    /// K(u, v) = -P((v . grad) u + (u . grad) v) - P(g v + 2 g' <u, v> u)
    SpectralField K_operator(const SpectralField& u, const SpectralField& v) const;
    /// a_f P(D psi(u) v), the derivative of the forcing.
    SpectralField forcing_derivative(const SpectralField& u, const SpectralField& v) const;
    /// DB_k(u) v
    SpectralField noise_B_derivative(const SpectralField& u, const SpectralField& v, int k) const;

    /// dt (N(u) + P f(u)) + sum_k B_k(u) dW_k, where N is the nonlinear part
    /// of the drift. The Stokes part is left to the caller.
    SpectralField increment(const SpectralField& u, const PhysicalState& s, double dt,
                            std::span<const double> dw) const;
    /// dt (K(u, v) + a_f P D psi(u) v) + sum_k DB_k(u) v dW_k
    SpectralField tangent_increment(const PhysicalState& s, const SpectralField& v, double dt,
                                    std::span<const double> dw) const;
    /// dt K(u, v) only (additive-noise tangents without forcing derivative).
    SpectralField K_increment(const PhysicalState& s, const SpectralField& v, double dt) const;

    /// integral of g_N(|u|^2) |u|^2 by grid quadrature
    double taming_energy(const PhysicalState& s) const;
    /// fraction of grid points with |u|^2 > N
    double taming_fraction(const PhysicalState& s) const;
    /// integral of |u|^2 |grad u|^2 by grid quadrature
    double gradient_weighted_energy(const PhysicalState& s) const;
    /// ||u||_{H^2,homog}^2 + integral |u|^2 |grad u|^2
    double cN(const SpectralField& u, const PhysicalState& s) const;
    /// Energy of g_N(|u|^2) u beyond the retained wavevectors.
    double aliasing_residual(const SpectralField& u) const;

private:
    SpectralField project(const GridField& w) const;

    SpectralGrid grid_;
    TamingConfig taming_;
    CoefficientModel model_;
    DynamicsOptions options_;
    SpectralField forcing_field_;
    std::vector<GridField> profile_;  // Phi_k
    std::vector<GridField> sine_;     // Psi_k
};

/// Single-call forms on an explicit grid. Throw ResolutionError below the
/// dealias floor 3 K_max + 1.
SpectralField advection(const SpectralField& u, int grid_size);
SpectralField taming_term(const SpectralField& u, const TamingConfig& cfg, int grid_size);
SpectralField drift_A(const SpectralField& u, const TamingConfig& cfg, int grid_size);
SpectralField K_operator(const SpectralField& u, const SpectralField& v, const TamingConfig& cfg, int grid_size);

/// Q applied to coordinates c (size m): sum_i q_i c_i e_i.
SpectralField apply_Q(const ModeSetPtr& modes, const AdditiveNoiseMap& map, std::span<const double> c);
/// Coordinates of the low-mode part of v divided by q_i (Q^{-1} on span{e_1..e_m}).
std::vector<double> apply_Q_inverse(const AdditiveNoiseMap& map, const SpectralField& v);

}  // namespace tamed
