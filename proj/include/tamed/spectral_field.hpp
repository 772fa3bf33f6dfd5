#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "tamed/mode_set.hpp"

namespace tamed {

class CounterStream;

using Complex = std::complex<double>;
using CVec3 = std::array<Complex, 3>;

/// Which weights a Sobolev norm uses: (1 + lambda)^m or lambda^m.
enum class NormConvention { full, homogeneous };

/// Real inner products available on spectral fields.
enum class PairingSpace { H0, H1_full, H1_homog };

/// Scaling of the real basis fields returned by basis_field().
enum class BasisScale {
    unit_amplitude,  ///< sup_x |e(x)| = 1: eps cos(2 pi k.x) or eps sin(2 pi k.x)
    H0,
    H1_full,
    H1_homog,
};

/// Velocity field as complex amplitudes on the polarized modes of a ModeSet.
///
/// Divergence-free and mean-zero by construction. The reality constraint
/// u(-k, p) = conj(u(k, p)) is maintained by every library operation; fields
/// assembled by hand should be passed through enforce_reality().
class SpectralField {
public:
    explicit SpectralField(ModeSetPtr modes);
    SpectralField(ModeSetPtr modes, std::vector<Complex> amplitudes);

    const ModeSet& modes() const noexcept { return *modes_; }
    const ModeSetPtr& mode_set_ptr() const noexcept { return modes_; }
    std::size_t size() const noexcept { return amp_.size(); }

    Complex& operator[](std::size_t i) { return amp_[i]; }
    const Complex& operator[](std::size_t i) const { return amp_[i]; }
    std::span<Complex> amplitudes() noexcept { return amp_; }
    std::span<const Complex> amplitudes() const noexcept { return amp_; }

    /// Cartesian amplitude sum_p u(k,p) eps_p(k) of wavevector slot w.
    CVec3 vector_amplitude(std::size_t w) const;

    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(double s);
    /// this += s * o
    SpectralField& axpy(double s, const SpectralField& o);

    bool is_zero() const noexcept;
    bool same_modes(const SpectralField& o) const noexcept;

private:
    ModeSetPtr modes_;
    std::vector<Complex> amp_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

/// Raw three-component Fourier coefficients on the wavevectors of a ModeSet,
/// plus the k = 0 coefficient. Input of leray_project().
struct VectorSpectrum {
    ModeSetPtr modes;
    std::vector<CVec3> coeff;  ///< indexed by wavevector slot
    CVec3 mean{};

    explicit VectorSpectrum(ModeSetPtr m);
};

/// Leray projection (I - k k^T/|k|^2) followed by expansion in the
/// polarization pair. Throws InvalidArgument when the mean is nonzero.
SpectralField leray_project(const VectorSpectrum& v);

/// Cartesian coefficients of a field (inverse of leray_project on H).
VectorSpectrum to_vector_spectrum(const SpectralField& u);

double sobolev_norm(const SpectralField& u, int order, NormConvention convention);
double sobolev_norm_sq(const SpectralField& u, int order, NormConvention convention);

/// Real bilinear pairing with weights 1, 1 + lambda, lambda. Throws
/// ModeSetMismatch when the fields live on different mode sets.
double pairing(const SpectralField& u, const SpectralField& v, PairingSpace space);

/// Galerkin projection onto the first n modes. n must be a conjugate-closed prefix.
SpectralField truncate(const SpectralField& u, std::size_t n);
/// In-place variant of truncate().
void truncate_in_place(SpectralField& u, std::size_t n);

/// Multiply each amplitude by -lambda (the Stokes operator P Delta).
SpectralField stokes(const SpectralField& u);

/// i-th element of the real orthogonal basis attached to the mode ordering:
/// cosine type on canonical modes, sine type on their partners.
SpectralField basis_field(const ModeSetPtr& modes, std::size_t i, BasisScale scale);

/// Expansion coefficient of u along basis_field(i, scale). For the normalized
/// scales this is the inner product with the basis field in that space.
double basis_coordinate(const SpectralField& u, std::size_t i, BasisScale scale);

/// Field sum_i c_i e_i over the first c.size() basis fields.
SpectralField from_basis_coordinates(const ModeSetPtr& modes, std::span<const double> c, BasisScale scale);

/// Random real field supported on the first n modes with amplitude decaying
/// like (1 + lambda)^(-decay/2), rescaled to the requested norm.
SpectralField random_field(const ModeSetPtr& modes, std::size_t n, CounterStream& rng, double decay,
                           double target_norm, int norm_order, NormConvention convention);

/// Overwrite partner amplitudes with conjugates of canonical ones.
void enforce_reality(SpectralField& u);

/// max_i |u(-k,p) - conj(u(k,p))|
double reality_defect(const SpectralField& u);

/// max over wavevectors of |k . u_hat(k)| (exactly zero up to rounding).
double divergence_residual(const SpectralField& u);

}  // namespace tamed
