#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tamed/integrator.hpp"
#include "tamed/observables.hpp"
#include "tamed/stats.hpp"

namespace tamed {

struct KbSettings {
    double burn_in = -1.0;  ///< negative selects T_avg / 2
    double average = 10.0;  ///< T_avg
    std::size_t batches = 16;
    int sample_every = 1;   ///< steps between observable evaluations
    std::uint32_t path = 0;
};

struct KbEstimate {
    std::string name;
    BatchMeans stats;
};

struct KbReport {
    std::vector<KbEstimate> estimates;
    std::size_t samples = 0;
    double burn_in = 0.0;
};

/// Time averages of each observable along one path after burn-in, with
/// batch-means standard errors.
KbReport kb_average(const SimConfig& cfg, const SpectralField& u0, const std::vector<Observable>& observables,
                    const KbSettings& settings);

struct MomentAudit {
    std::vector<double> t;
    std::vector<double> mean_h0_sq;   ///< E ||u(t)||^2_{H^0}
    std::vector<double> int_h1_sq;    ///< int_0^t E ||u||^2_{H^1} (full)
    std::vector<double> int_l4;       ///< int_0^t E ||u||^4_{L^4}
    std::vector<double> composite;    ///< sum of the three
    LinearFit fit;                    ///< composite vs t on the fit window
    bool integrals_nondecreasing = true;
    bool components_nonnegative = true;
};

/// Left side of the linear-growth moment bound from ensemble records that
/// share record times.
MomentAudit moment_audit(const std::vector<TrajectoryRecord>& records, double fit_from, double fit_to);

struct ExpMomentPoint {
    double T = 0.0;
    double estimate = 0.0;           ///< E exp(eta int_0^T N(u) ds)
    double log_estimate = 0.0;
    double relative_variance = 0.0;  ///< Var / mean^2 of the exponentials
    double terminal_estimate = 0.0;  ///< E exp(eta ||u(T)||^2_{H^1})
    std::size_t saturated = 0;       ///< exponents capped at 700
    bool heavy_tail = false;         ///< relative variance above 1
};

struct ExpMomentReport {
    std::vector<ExpMomentPoint> points;
    LinearFit fit;  ///< log estimate vs T
};

/// Exponential moments of the path integral of N(u) = ||u||^2_{H^2} + int |u|^2 |grad u|^2
/// from ensemble records (homogeneous norms, record times must include each T).
ExpMomentReport exp_moment_probe(const std::vector<TrajectoryRecord>& records, double eta,
                                 const std::vector<double>& horizons);

/// Prescribed small path w(t) = amplitude sin(omega t) e, with e the basis
/// field `mode` normalized in full H^6, so sup_t ||w||_{H^6} = |amplitude|.
struct SmallPath {
    double amplitude = 0.0;
    double omega = 1.0;
    std::size_t mode = 0;
};

struct SupportReport {
    bool found = false;
    double hit_time = 0.0;
    double path_h6_sup = 0.0;
    std::vector<double> t;
    std::vector<double> h1;  ///< ||u(t)||_{H^1}, homogeneous
    std::vector<double> h0;
};

/// Integrates v' = A(v + w) with u = v + w from u0 until ||u||_{H^1} <= r2 or
/// t_max. Noise settings of cfg are ignored.
SupportReport support_probe(const SimConfig& cfg, const SpectralField& u0, const SmallPath& w, double r2,
                            double t_max);

struct ComparisonBound {
    double value = 0.0;
    bool valid = true;  ///< false when the bracket raised to 1/(1-p) is nonpositive
};

/// e^{-C0 T} [(r0 + C4 (e^{C0 T} - 1))^{1-p} + C1 (1-p) eps T]^{1/(1-p)},
/// C4 = (C2 eps + C3) / C0: an upper bound for any positive phi with
/// phi' <= -C0 phi + C1 eps phi^p + C2 eps + C3, phi(0) = r0.
ComparisonBound comparison_bound(double r0, double c0, double c1, double c2, double c3, double p, double T,
                                 double eps);

}  // namespace tamed
