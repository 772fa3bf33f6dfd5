#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tamed/integrator.hpp"
#include "tamed/observables.hpp"

namespace tamed {

/// Tangent fields at every step of a base path (t[n] = n dt).
struct TangentSeries {
    std::vector<double> t;
    std::vector<SpectralField> v;
};

/// J_{0,t} v0: the exact derivative of the discrete scheme along the base
/// path `states` (from Simulator::trace), driven by the same increments.
TangentSeries derivative_flow(const Simulator& sim, std::span<const SpectralField> states, std::uint32_t path,
                              const SpectralField& v0);
/// Same, from a record holding a snapshot at every step. Throws
/// InvalidArgument when snapshots are missing.
TangentSeries derivative_flow(const Simulator& sim, const TrajectoryRecord& rec, const SpectralField& v0);

/// A_t v: response to shifting the Brownian path by int vdot. vdot[n] is the
/// control rate (size m) on step n. Additive noise only.
TangentSeries malliavin_derivative(const Simulator& sim, std::span<const SpectralField> states,
                                   const std::vector<std::vector<double>>& vdot);

/// Low/high-mode control along a base path.
struct ControlSeries {
    std::vector<double> t;
    double ramp_end = 0.0;                    ///< 2 ||v0_low||_{H^1}; 0 when the ramp is absent
    std::vector<std::vector<double>> vdot;    ///< per step, size m
    std::vector<double> cost;                 ///< running integral of |vdot|^2, per record
    std::vector<double> high_h1_sq;           ///< ||v_high||^2_{H^1}
    std::vector<double> low_h1_sq;            ///< ||v_low||^2_{H^1}
    std::vector<double> v_h1_sq;              ///< ||v||^2_{H^1}
    std::vector<double> residual_h1;          ///< ||v - (J v0 - A v)||_{H^1} when requested
    std::vector<SpectralField> v_low;         ///< when keep_fields
    std::vector<SpectralField> v_high;        ///< when keep_fields
};

struct ControlOptions {
    bool residual = false;     ///< co-integrate J and A to check the defining identity
    bool keep_fields = false;
};

/// Builds the control of the asymptotic gradient estimate. v_low follows the
/// linear ramp v0_low (1 - t / (2 ||v0_low||)), v_high solves the high-mode
/// linearized equation and vdot = Q^{-1}[ramp + Delta v_low + Pi_low K(u, v)],
/// all evaluated at the left end of each step. Norms are homogeneous H^1.
/// The control map Q may differ from the simulator's noise (zero-noise runs).
ControlSeries build_control(const Simulator& sim, std::span<const SpectralField> states, const SpectralField& v0,
                            const AdditiveNoiseMap& control_map, ControlOptions options = {});

/// Zero violations expected: ||Delta Pi_high u||^2 >= lambda_{m+1} ||grad Pi_high u||^2.
struct SpectralGapReport {
    std::size_t fields = 0;
    std::size_t violations = 0;
    double worst_margin = 0.0;  ///< min over fields of lhs / rhs - 1
};
SpectralGapReport spectral_gap_check(const ModeSetPtr& modes, std::size_t m, std::size_t fields, std::uint64_t seed);

struct DecaySettings {
    SimConfig base;                  ///< additive or none; its additive map is replaced per m
    std::vector<std::size_t> m_values;
    double q = 1.0;                  ///< per-mode amplitude of Q
    bool noise = true;               ///< false: u stays at u0 = 0, pure heat flow for v_high
    std::size_t ensemble = 16;
    double fit_start = 2.0;
};

struct DecayPoint {
    std::size_t m = 0;
    double lambda_next = 0.0;  ///< lambda_{m+1}
    double rate = 0.0;         ///< fitted 1/2 d/dt log E||v_high||^2
    double rate_std_error = 0.0;
    double fit_r_squared = 0.0;
    double cost = 0.0;         ///< E int_0^T |vdot|^2
    std::vector<double> t;
    std::vector<double> mean_high_sq;
    std::vector<double> mean_v_sq;
    std::vector<double> mean_cost;
};

/// Runs the control along `ensemble` additive-noise paths from u0 = 0 with
/// v0 = (e_1 + e_{m+1}) / sqrt 2 for each m and fits the decay of v_high.
std::vector<DecayPoint> highmode_decay_experiment(const DecaySettings& settings);

struct GradientProbeReport {
    double fd_estimate = 0.0;   ///< (E phi(u(t; u0 + eps v0)) - E phi(u(t; u0))) / eps, shared noise
    double fd_std_error = 0.0;
    double cost_term = 0.0;     ///< ||phi||_inf (E int |vdot|^2)^{1/2}
    double flow_term = 0.0;     ///< ||grad phi||_inf E ||v(t)||_{H^1}
    double bound = 0.0;
    double mean_v_h1 = 0.0;
    std::size_t paths = 0;
};

/// Finite-difference directional derivative of T_t phi against the bound
/// assembled from the control. Additive noise only; v0 is normalized in H^1.
GradientProbeReport gradient_probe(const SimConfig& cfg, const Observable& phi, const SpectralField& u0,
                                   const SpectralField& v0, std::size_t ensemble, double eps);

}  // namespace tamed

namespace tamed {

struct JacobianCheck {
    std::vector<double> eps;
    std::vector<double> error;  ///< sup_t ||(u(t; u0 + eps v0) - u(t; u0)) / eps - J v0||_{H^1}, full
    std::vector<double> ratio;  ///< error[i] / error[i + 1]
};

/// Finite differences of the discrete flow against derivative_flow along one
/// path. v0 is normalized in full H^1.
JacobianCheck jacobian_check(const SimConfig& cfg, const SpectralField& u0, const SpectralField& v0,
                             const std::vector<double>& eps, std::uint32_t path = 0);

}  // namespace tamed
