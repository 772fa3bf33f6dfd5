#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "tamed/operators.hpp"
#include "tamed/rng.hpp"

namespace tamed {

enum class Scheme { explicit_em, semi_implicit_em };
enum class NoiseKind { none, multiplicative, additive };

const char* to_string(Scheme s);
const char* to_string(NoiseKind k);
Scheme parse_scheme(const std::string& s);
NoiseKind parse_noise_kind(const std::string& s);

struct SimConfig {
    int k_max = 2;
    std::size_t n = 0;  ///< Galerkin dimension; 0 selects the full mode set
    double dt = 1e-3;
    double horizon = 1.0;
    int grid = 0;  ///< 0 selects the dealias floor 3 K_max + 1
    Scheme scheme = Scheme::semi_implicit_em;
    NoiseKind noise = NoiseKind::none;
    CoefficientModel model;    ///< f always; sigma and h when noise is multiplicative
    AdditiveNoiseMap additive;  ///< used when noise is additive
    TamingConfig taming;
    DynamicsOptions options;
    std::uint64_t seed = 0;
    int record_stride = 1;
    bool snapshots = false;
    bool keep_increments = false;
    double blowup_threshold = 1e12;
};

/// Scalars recorded at one time. Norms are not squared except l4_pow4.
struct RecordRow {
    std::uint64_t step = 0;
    double t = 0.0;
    double h0 = 0.0;
    double h1_full = 0.0;
    double h1_homog = 0.0;
    double h2_full = 0.0;
    double h2_homog = 0.0;
    double l4_pow4 = 0.0;          ///< integral |u|^4
    double au_u = 0.0;             ///< <A(u), u>_{H^0}
    double taming_fraction = 0.0;  ///< share of grid points with |u|^2 > N
    double cn = 0.0;               ///< ||u||^2_{H^2,homog} + integral |u|^2 |grad u|^2
    double div_residual = 0.0;     ///< max |k . u_hat| / ||u||_{H^0}
    double imag_residual = 0.0;    ///< max |Im u(x)| / max |u(x)|
};

struct TrajectoryRecord {
    ModeSetPtr modes;
    std::uint32_t path = 0;
    double dt = 0.0;
    std::uint64_t steps = 0;
    std::vector<RecordRow> rows;
    std::vector<SpectralField> snapshots;         ///< one per row when requested
    std::vector<std::vector<double>> increments;  ///< per step when requested
    std::optional<SpectralField> final_state;
};

struct TwinRecord {
    TrajectoryRecord first;
    TrajectoryRecord second;
    std::vector<double> t;
    std::vector<double> dist_h0;
    std::vector<double> dist_h1;  ///< full convention
};

/// Fixed-step Euler-Maruyama integrator of the Galerkin system.
///
/// Noise is evaluated at the start of the step (Ito). semi_implicit_em treats
/// the Stokes part implicitly, u+ = [u + dt N(u) + noise] / (1 + lambda dt),
/// and projects onto the first n modes after each step.
class Simulator {
public:
    explicit Simulator(SimConfig cfg);

    const SimConfig& config() const noexcept { return cfg_; }
    const Dynamics& dynamics() const noexcept { return dyn_; }
    const ModeSetPtr& modes() const noexcept { return modes_; }
    std::size_t galerkin_dim() const noexcept { return n_; }

    /// Brownian directions per step.
    std::size_t noise_count() const noexcept;
    std::uint64_t step_count() const noexcept;
    std::vector<double> increments(std::uint32_t path, std::uint64_t step) const;

    /// One step from u with increments dw. `state` may pass a precomputed
    /// physical state of u.
    SpectralField step(const SpectralField& u, std::span<const double> dw,
                       const PhysicalState* state = nullptr) const;
    /// Stokes part: 1 / (1 + lambda dt) for the implicit scheme, applied to
    /// an already-assembled right-hand side.
    void apply_linear(SpectralField& rhs, const SpectralField& u) const;

    RecordRow diagnostics(const SpectralField& u, std::uint64_t step) const;

    TrajectoryRecord simulate(const SpectralField& u0, std::uint32_t path = 0) const;
    /// Re-run with stored increments instead of drawing them.
    TrajectoryRecord replay(const SpectralField& u0, const std::vector<std::vector<double>>& increments) const;
    /// States after 0..steps steps, without diagnostics (base path for tangents).
    std::vector<SpectralField> trace(const SpectralField& u0, std::uint32_t path = 0) const;
    TwinRecord twin_simulate(const SpectralField& u0, const SpectralField& u0_alt, std::uint32_t path = 0) const;

    /// Throws BlowUpError on non-finite or runaway amplitudes.
    void check_finite(const SpectralField& u, double t) const;
    /// Throws InvalidArgument when u has energy beyond the Galerkin dimension.
    void check_in_galerkin_space(const SpectralField& u) const;

private:
    TrajectoryRecord run(const SpectralField& u0, std::uint32_t path,
                         const std::vector<std::vector<double>>* replay) const;

    SimConfig cfg_;
    ModeSetPtr modes_;
    Dynamics dyn_;
    std::size_t n_;
    std::vector<double> implicit_;  // 1 / (1 + lambda dt)
};

/// Worker count for ensembles: TAMED_THREADS if set, else hardware threads.
unsigned ensemble_threads();

/// Runs fn(0..count-1) across threads and returns results in index order.
template <class Fn>
auto parallel_map(std::size_t count, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using R = decltype(fn(std::size_t{}));
    std::vector<std::optional<R>> slots(count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(ensemble_threads(), static_cast<unsigned>(count)));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    std::vector<R> out;
    out.reserve(count);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace tamed
