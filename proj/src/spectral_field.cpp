#include "tamed/spectral_field.hpp"

#include <algorithm>
#include <cmath>

#include "tamed/errors.hpp"
#include "tamed/rng.hpp"

namespace tamed {
namespace {

double weight(double lambda, PairingSpace space) {
    switch (space) {
    case PairingSpace::H0: return 1.0;
    case PairingSpace::H1_full: return 1.0 + lambda;
    case PairingSpace::H1_homog: return lambda;
    }
    return 1.0;
}

double weight(double lambda, BasisScale scale) {
    switch (scale) {
    case BasisScale::unit_amplitude:
    case BasisScale::H0: return 1.0;
    case BasisScale::H1_full: return 1.0 + lambda;
    case BasisScale::H1_homog: return lambda;
    }
    return 1.0;
}

/// Amplitude c such that the cos/sin basis field built from c has unit norm.
double basis_amplitude(double lambda, BasisScale scale) {
    if (scale == BasisScale::unit_amplitude) return 0.5;
    return 1.0 / std::sqrt(2.0 * weight(lambda, scale));
}

}  // namespace

SpectralField::SpectralField(ModeSetPtr modes) : modes_(std::move(modes)), amp_(modes_->size()) {}

SpectralField::SpectralField(ModeSetPtr modes, std::vector<Complex> amplitudes)
    : modes_(std::move(modes)), amp_(std::move(amplitudes)) {
    if (amp_.size() != modes_->size()) throw InvalidArgument("amplitude count does not match mode set");
}

CVec3 SpectralField::vector_amplitude(std::size_t w) const {
    const std::size_t i1 = modes_->mode_of(w, 1);
    const std::size_t i2 = modes_->mode_of(w, 2);
    const Vec3& e1 = modes_->polarization_vector(i1);
    const Vec3& e2 = modes_->polarization_vector(i2);
    CVec3 out;
    for (int c = 0; c < 3; ++c) out[c] = amp_[i1] * e1[c] + amp_[i2] * e2[c];
    return out;
}

bool SpectralField::same_modes(const SpectralField& o) const noexcept {
    return modes_ == o.modes_ || modes_->k_max() == o.modes_->k_max();
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
    if (!same_modes(o)) throw ModeSetMismatch("adding fields on different mode sets");
    for (std::size_t i = 0; i < amp_.size(); ++i) amp_[i] += o.amp_[i];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
    if (!same_modes(o)) throw ModeSetMismatch("subtracting fields on different mode sets");
    for (std::size_t i = 0; i < amp_.size(); ++i) amp_[i] -= o.amp_[i];
    return *this;
}

SpectralField& SpectralField::operator*=(double s) {
    for (auto& a : amp_) a *= s;
    return *this;
}

SpectralField& SpectralField::axpy(double s, const SpectralField& o) {
    if (!same_modes(o)) throw ModeSetMismatch("axpy on different mode sets");
    for (std::size_t i = 0; i < amp_.size(); ++i) amp_[i] += s * o.amp_[i];
    return *this;
}

bool SpectralField::is_zero() const noexcept {
    return std::all_of(amp_.begin(), amp_.end(), [](const Complex& a) { return a == Complex{}; });
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

VectorSpectrum::VectorSpectrum(ModeSetPtr m) : modes(std::move(m)), coeff(modes->wavevector_count()) {}

SpectralField leray_project(const VectorSpectrum& v) {
    for (const Complex& c : v.mean)
        if (c != Complex{}) throw InvalidArgument("leray_project: nonzero k = 0 component (field is not mean-zero)");
    const ModeSet& ms = *v.modes;
    SpectralField out(v.modes);
    for (std::size_t w = 0; w < ms.wavevector_count(); ++w) {
        const CVec3& c = v.coeff[w];
        for (int p = 1; p <= 2; ++p) {
            const std::size_t i = ms.mode_of(w, p);
            const Vec3& e = ms.polarization_vector(i);
            out[i] = e[0] * c[0] + e[1] * c[1] + e[2] * c[2];
        }
    }
    return out;
}

VectorSpectrum to_vector_spectrum(const SpectralField& u) {
    VectorSpectrum out(u.mode_set_ptr());
    for (std::size_t w = 0; w < u.modes().wavevector_count(); ++w) out.coeff[w] = u.vector_amplitude(w);
    return out;
}

double sobolev_norm_sq(const SpectralField& u, int order, NormConvention convention) {
    if (order < 0) throw InvalidArgument("Sobolev order must be nonnegative");
    const ModeSet& ms = u.modes();
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double base = convention == NormConvention::full ? 1.0 + ms[i].lambda : ms[i].lambda;
        s += std::pow(base, order) * std::norm(u[i]);
    }
    return s;
}

double sobolev_norm(const SpectralField& u, int order, NormConvention convention) {
    return std::sqrt(sobolev_norm_sq(u, order, convention));
}

double pairing(const SpectralField& u, const SpectralField& v, PairingSpace space) {
    if (!u.same_modes(v)) throw ModeSetMismatch("pairing fields on different mode sets");
    const ModeSet& ms = u.modes();
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const Complex& a = u[i];
        const Complex& b = v[i];
        s += weight(ms[i].lambda, space) * (a.real() * b.real() + a.imag() * b.imag());
    }
    return s;
}

void truncate_in_place(SpectralField& u, std::size_t n) {
    if (n > u.size()) throw InvalidArgument("truncation size exceeds mode count");
    if (!u.modes().is_closed_prefix(n))
        throw InvalidArgument("truncation size " + std::to_string(n) + " splits a conjugate pair");
    for (std::size_t i = n; i < u.size(); ++i) u[i] = Complex{};
}

SpectralField truncate(const SpectralField& u, std::size_t n) {
    SpectralField out = u;
    truncate_in_place(out, n);
    return out;
}

SpectralField stokes(const SpectralField& u) {
    SpectralField out = u;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= -u.modes()[i].lambda;
    return out;
}

SpectralField basis_field(const ModeSetPtr& modes, std::size_t i, BasisScale scale) {
    if (i >= modes->size()) throw InvalidArgument("basis index out of range");
    SpectralField out(modes);
    const double c = basis_amplitude((*modes)[i].lambda, scale);
    const std::size_t j = modes->partner(i);
    if (modes->is_canonical(i)) {
        out[i] = c;
        out[j] = c;
    } else {
        // sine type: the canonical partner j carries -i c, this mode carries +i c
        out[j] = Complex(0.0, -c);
        out[i] = Complex(0.0, c);
    }
    return out;
}

double basis_coordinate(const SpectralField& u, std::size_t i, BasisScale scale) {
    const ModeSet& ms = u.modes();
    const double lambda = ms[i].lambda;
    // unit-amplitude fields have squared H0 norm 1/2; return the expansion coefficient
    const double c = scale == BasisScale::unit_amplitude ? 1.0 : basis_amplitude(lambda, scale) * weight(lambda, scale);
    const std::size_t j = ms.partner(i);
    if (ms.is_canonical(i)) return c * (u[i].real() + u[j].real());
    return c * (u[i].imag() - u[j].imag());
}

SpectralField from_basis_coordinates(const ModeSetPtr& modes, std::span<const double> coords, BasisScale scale) {
    if (coords.size() > modes->size()) throw InvalidArgument("too many basis coordinates");
    SpectralField out(modes);
    for (std::size_t i = 0; i < coords.size(); ++i) {
        const double c = basis_amplitude((*modes)[i].lambda, scale) * coords[i];
        const std::size_t j = modes->partner(i);
        if (modes->is_canonical(i)) {
            out[i] += c;
            out[j] += c;
        } else {
            out[j] += Complex(0.0, -c);
            out[i] += Complex(0.0, c);
        }
    }
    return out;
}

SpectralField random_field(const ModeSetPtr& modes, std::size_t n, CounterStream& rng, double decay,
                           double target_norm, int norm_order, NormConvention convention) {
    SpectralField out(modes);
    if (!modes->is_closed_prefix(n)) throw InvalidArgument("random_field support must be a closed prefix");
    for (std::size_t i = 0; i < n; ++i) {
        if (!modes->is_canonical(i)) continue;
        const double scale = std::pow(1.0 + (*modes)[i].lambda, -0.5 * decay);
        const double re = rng.normal();
        const double im = rng.normal();
        out[i] = scale * Complex(re, im);
    }
    enforce_reality(out);
    const double norm = sobolev_norm(out, norm_order, convention);
    if (norm > 0.0) out *= target_norm / norm;
    return out;
}

void enforce_reality(SpectralField& u) {
    const ModeSet& ms = u.modes();
    for (std::size_t i = 0; i < u.size(); ++i)
        if (ms.is_canonical(i)) u[ms.partner(i)] = std::conj(u[i]);
}

double reality_defect(const SpectralField& u) {
    const ModeSet& ms = u.modes();
    double d = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) d = std::max(d, std::abs(u[ms.partner(i)] - std::conj(u[i])));
    return d;
}

double divergence_residual(const SpectralField& u) {
    const ModeSet& ms = u.modes();
    double d = 0.0;
    for (std::size_t w = 0; w < ms.wavevector_count(); ++w) {
        const CVec3 a = u.vector_amplitude(w);
        const Wavevector& k = ms.wavevector(w);
        d = std::max(d, std::abs(double(k[0]) * a[0] + double(k[1]) * a[1] + double(k[2]) * a[2]));
    }
    return d;
}

}  // namespace tamed
