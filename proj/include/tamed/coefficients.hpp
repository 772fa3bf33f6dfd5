#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tamed/config.hpp"
#include "tamed/spectral_field.hpp"
#include "tamed/taming.hpp"

namespace tamed {

/// psi(u) = u / sqrt(1 + |u|^2), the bounded state nonlinearity used by f and h.
Vec3 psi(const Vec3& u);

/// Parametric coefficient families of the multiplicative-noise equation.
///
///   f(x,u)     = a_f psi(u) + F(x)
///   sigma_k(x) = s_k Phi_k(x)
///   h_k(x,u)   = b_k psi(u) + c_k Psi_k(x)
///
/// Phi_k is the unit-amplitude cosine field of the k-th canonical mode of the
/// ModeSet and Psi_k the sine field of the same mode, so sum_k |sigma_k(x)|^2
/// peaks at x = 0 with value sum_k s_k^2. F is given by its coordinates on
/// the unit-amplitude real basis (index i of basis_field).
struct CoefficientModel {
    double a_f = 0.0;
    std::vector<double> forcing;  ///< F coordinates by basis index
    std::vector<double> sigma;    ///< s_k, k < K_noise
    std::vector<double> h_b;      ///< b_k
    std::vector<double> h_c;      ///< c_k
    int k_noise = 0;

    /// s_k, b_k, c_k with zero padding (k >= list length).
    double s(int k) const { return k < int(sigma.size()) ? sigma[k] : 0.0; }
    double b(int k) const { return k < int(h_b.size()) ? h_b[k] : 0.0; }
    double c(int k) const { return k < int(h_c.size()) ? h_c[k] : 0.0; }

    bool has_forcing() const;
};

/// Additive low-mode noise Q: Q e_i = q_i e_i for the first m basis fields
/// normalized in homogeneous H^1 (e_i = basis_field(i, H1_homog)).
struct AdditiveNoiseMap {
    std::vector<double> q;  ///< size m

    std::size_t m() const noexcept { return q.size(); }
    /// sum q_i^2 / lambda_i
    double e0(const ModeSet& modes) const;
    /// sum q_i^2
    double e1() const;
};

/// Mode index of the k-th noise profile (k-th canonical mode in ModeSet order).
std::size_t noise_profile_mode(const ModeSet& modes, int k);

/// Result of one hypothesis check.
struct ClauseResult {
    std::string clause;
    bool passed = true;
    double worst_ratio = 0.0;  ///< max over samples of lhs / rhs (<= 1 passes)
    std::string detail;
};

/// Closed-form constants of the coefficient families plus sampled checks.
struct AssumptionReport {
    double c_f = 0.0;           ///< bounds both f inequalities
    double h_f_l1 = 0.0;        ///< ||H_f||_{L^1} = 2 ||F||^2 + ||grad F||^2
    double c_sigma = 0.0;       ///< sup_x ||d_j sigma||_{l2}
    double sigma_sup = 0.0;     ///< sup_x ||sigma(x)||^2_{l2}
    double c_h = 0.0;           ///< covers every growth, derivative and Lipschitz bound on h
    double h_h_l1 = 0.0;        ///< ||H_h||_{L^1} = sum c_k^2 (1 + lambda_k)
    double dh_du_sq = 0.0;      ///< sup ||d_u h||^2_{l2} bound: Lip(psi)^2 sum b_k^2
    double lp1_constant = 0.0;  ///< C in the Hilbert-Schmidt bound: 4 sum b_k^2
    std::size_t samples = 0;
    std::vector<ClauseResult> clauses;

    bool passed() const;
};

/// Computes the constants and samples `samples` random (x, u) points from the
/// counter stream to confirm every inequality. Throws AssumptionViolation
/// naming the clause when one fails (sigma-bound: sup ||sigma||^2 > 1/4).
AssumptionReport validate_assumptions(const CoefficientModel& model, const ModeSetPtr& modes,
                                      std::size_t samples = 10000, std::uint64_t seed = 0);

/// Same checks without throwing.
AssumptionReport assess_assumptions(const CoefficientModel& model, const ModeSetPtr& modes,
                                    std::size_t samples = 10000, std::uint64_t seed = 0);

/// Structural checks independent of a ModeSet (lengths, signs, finiteness).
void check_shape(const CoefficientModel& model);
void check_shape(const AdditiveNoiseMap& map, const ModeSet& modes);

/// Keys: a_f, F, s_k, b_k, c_k, K_noise, N (taming) and q, m (additive).
/// Values are written as shortest round-trip decimals, so read(write(x)) == x.
void write_model(FlatConfig& cfg, const CoefficientModel& model);
CoefficientModel read_model(const FlatConfig& cfg);
void write_taming(FlatConfig& cfg, const TamingConfig& taming);
TamingConfig read_taming(const FlatConfig& cfg);
void write_additive(FlatConfig& cfg, const AdditiveNoiseMap& map);
AdditiveNoiseMap read_additive(const FlatConfig& cfg);

}  // namespace tamed
