#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include "tamed/spectral_field.hpp"

namespace tamed {

/// Real velocity samples on the uniform G x G x G grid of [0,1)^3.
/// Point (x, y, z) is stored at (x * G + y) * G + z.
struct GridField {
    int n = 0;
    std::array<std::vector<double>, 3> c;

    GridField() = default;
    explicit GridField(int g);

    std::size_t points() const noexcept { return c[0].size(); }
};

/// Tabulated separable Fourier sums between a ModeSet and a uniform grid.
///
/// Transforms are plain dense sums, done one axis at a time over the
/// (2 K_max + 1)^3 wavevector cube, so a transform costs O(G^3 K_max).
/// The object is immutable after construction and safe to share.
class SpectralGrid {
public:
    /// Throws ResolutionError when g < min_size. min_size defaults to the
    /// resolution floor 2 K_max + 1.
    SpectralGrid(ModeSetPtr modes, int g, int min_size = -1);

    int size() const noexcept { return g_; }
    std::size_t points() const noexcept { return static_cast<std::size_t>(g_) * g_ * g_; }
    const ModeSet& modes() const noexcept { return *modes_; }
    const ModeSetPtr& mode_set_ptr() const noexcept { return modes_; }

    /// Real part of the trigonometric sum. Use imaginary_residue() for the
    /// discarded imaginary part.
    GridField to_physical(const SpectralField& u) const;
    /// Cartesian gradient: result[j] holds d u / d x_j (three components).
    std::array<GridField, 3> gradient(const SpectralField& u) const;

    /// Fourier analysis restricted to the ModeSet wavevectors, plus the mean.
    VectorSpectrum analyze(const GridField& g) const;
    /// Analysis, truncation to the ModeSet (mean dropped) and Leray projection.
    SpectralField to_spectral(const GridField& g) const;
    /// Energy (1/G^3) sum |g|^2 not carried by the ModeSet wavevectors
    /// (mean and frequencies beyond the cutoff).
    double energy_beyond_cutoff(const GridField& g) const;

    /// max |Im u(x)| / max |u(x)| of the complex synthesis.
    double imaginary_residue(const SpectralField& u) const;

private:
    using CubeC = std::vector<std::complex<double>>;

    CubeC synthesize(const CubeC& dense) const;      // (2K+1)^3 coefficients -> G^3 complex
    CubeC analyze_scalar(const std::vector<double>& values) const;  // G^3 real -> (2K+1)^3
    std::size_t cube_index(const Wavevector& k) const;

    ModeSetPtr modes_;
    int g_;
    int kmax_;
    int side_;
    std::vector<std::complex<double>> twiddle_;  // [(f + K) * G + x] = exp(2 pi i f x / G)
};

/// Uniform-grid quadrature of (integral |u|^p)^(1/p); p = 0 means the sup norm.
double lp_norm(const GridField& g, double p);

/// Grid quadrature of |u|^p without the final root.
double lp_integral(const GridField& g, double p);

}  // namespace tamed
