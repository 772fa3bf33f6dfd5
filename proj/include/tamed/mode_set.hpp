#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace tamed {

using Wavevector = std::array<int, 3>;
using Vec3 = std::array<double, 3>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// One divergence-free Fourier mode on the unit torus: wavevector k != 0,
/// polarization p in {1, 2} and Stokes eigenvalue 4 pi^2 |k|^2.
struct ModeIndex {
    Wavevector k{};
    int polarization = 1;
    int k_squared = 0;
    double lambda = 0.0;
};

/// Ordered divergence-free Fourier basis of the torus truncated at |k| <= K_max.
///
/// Modes are sorted by eigenvalue, ties broken lexicographically by
/// (k1, k2, k3, p). The set is closed under k -> -k and the polarization
/// vectors satisfy eps_p(-k) = eps_p(k), so the reality constraint pairs
/// mode (k, p) with mode (-k, p).
class ModeSet {
public:
    explicit ModeSet(int k_max);

    int k_max() const noexcept { return k_max_; }
    std::size_t size() const noexcept { return modes_.size(); }
    const ModeIndex& operator[](std::size_t i) const { return modes_[i]; }
    std::span<const ModeIndex> modes() const noexcept { return modes_; }

    /// Unit polarization vector of mode i (orthogonal to k).
    const Vec3& polarization_vector(std::size_t i) const { return eps_[i]; }
    /// Index of the conjugate partner (-k, p).
    std::size_t partner(std::size_t i) const { return partner_[i]; }
    /// True when k is the representative of its pair (first nonzero component positive).
    bool is_canonical(std::size_t i) const { return canonical_[i]; }

    double lambda1() const noexcept { return modes_.front().lambda; }

    /// Whether the first n modes form a conjugate-closed set.
    bool is_closed_prefix(std::size_t n) const;
    /// All admissible Galerkin cutoffs, ascending, including 0 and size().
    std::vector<std::size_t> closed_prefixes() const;
    /// Number of modes in the first `shells` distinct eigenvalue shells.
    std::size_t shell_end(int shells) const;

    /// Distinct wavevectors in mode order (each appears once).
    std::size_t wavevector_count() const noexcept { return wavevectors_.size(); }
    const Wavevector& wavevector(std::size_t w) const { return wavevectors_[w]; }
    /// Mode index of (wavevector w, polarization p), p in {1, 2}.
    std::size_t mode_of(std::size_t w, int p) const { return wave_modes_[w][p - 1]; }
    /// Wavevector slot of mode i.
    std::size_t wavevector_of(std::size_t i) const { return mode_wave_[i]; }
    std::optional<std::size_t> find_wavevector(const Wavevector& k) const;

    /// Stable 64-bit fingerprint of the ordered (k, p) list.
    std::uint64_t hash() const noexcept { return hash_; }

private:
    int k_max_;
    std::vector<ModeIndex> modes_;
    std::vector<Vec3> eps_;
    std::vector<std::size_t> partner_;
    std::vector<bool> canonical_;
    std::vector<Wavevector> wavevectors_;
    std::vector<std::array<std::size_t, 2>> wave_modes_;
    std::vector<std::size_t> mode_wave_;
    std::vector<std::int32_t> lookup_;
    std::uint64_t hash_ = 0;
};

using ModeSetPtr = std::shared_ptr<const ModeSet>;

/// All modes with |k|^2 <= K_max^2. Throws InvalidArgument for K_max < 1.
ModeSetPtr build_mode_set(int k_max);

/// Deterministic polarization pair for a canonical wavevector: Gram-Schmidt of
/// (1,0,0) (fallback (0,1,0) when parallel) against k, then k-hat x eps1.
std::array<Vec3, 2> polarization_basis(const Wavevector& k);

/// Smallest grid size whose products of retained modes are alias-free after
/// truncation: 3 K_max + 1.
int dealias_floor(const ModeSet& modes);
/// Smallest grid size that represents every retained mode exactly: 2 K_max + 1.
int resolution_floor(const ModeSet& modes);

}  // namespace tamed
