#pragma once

#include <cmath>
#include <complex>

#include "tamed/grid.hpp"
#include "tamed/rng.hpp"
#include "tamed/spectral_field.hpp"

namespace tamed::test {

inline SpectralField random_u(const ModeSetPtr& modes, std::uint64_t seed, double h1 = 1.0, double decay = 2.0) {
    CounterStream rng(seed, 77);
    return random_field(modes, modes->size(), rng, decay, h1, 1, NormConvention::homogeneous);
}

/// Direct trigonometric sum at one point.
inline std::array<std::complex<double>, 3> eval_at(const SpectralField& u, const Vec3& x) {
    std::array<std::complex<double>, 3> out{};
    const ModeSet& ms = u.modes();
    for (std::size_t i = 0; i < u.size(); ++i) {
        const auto& k = ms[i].k;
        const double phase = kTwoPi * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
        const std::complex<double> e = u[i] * std::polar(1.0, phase);
        for (int c = 0; c < 3; ++c) out[c] += e * ms.polarization_vector(i)[c];
    }
    return out;
}

inline double max_abs_diff(const SpectralField& a, const SpectralField& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

inline double max_abs(const SpectralField& a) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i]));
    return d;
}

}  // namespace tamed::test
