#include "tamed/grid.hpp"

#include <algorithm>
#include <cmath>

#include "tamed/errors.hpp"

namespace tamed {

GridField::GridField(int g) : n(g) {
    const auto pts = static_cast<std::size_t>(g) * g * g;
    for (auto& comp : c) comp.assign(pts, 0.0);
}

SpectralGrid::SpectralGrid(ModeSetPtr modes, int g, int min_size)
    : modes_(std::move(modes)), g_(g), kmax_(modes_->k_max()), side_(2 * kmax_ + 1) {
    const int floor = min_size < 0 ? resolution_floor(*modes_) : min_size;
    if (g_ < floor)
        throw ResolutionError("grid size " + std::to_string(g_) + " below required " + std::to_string(floor) +
                              " for K_max = " + std::to_string(kmax_));
    twiddle_.resize(static_cast<std::size_t>(side_) * g_);
    for (int f = 0; f <= kmax_; ++f) {
        for (int x = 0; x < g_; ++x) {
            const long r = (static_cast<long>(f) * x) % g_;
            const std::complex<double> w = std::polar(1.0, kTwoPi * double(r) / double(g_));
            twiddle_[static_cast<std::size_t>(f + kmax_) * g_ + x] = w;
            // negative frequencies are exact conjugates so real data stays real
            twiddle_[static_cast<std::size_t>(-f + kmax_) * g_ + x] = std::conj(w);
        }
    }
}

std::size_t SpectralGrid::cube_index(const Wavevector& k) const {
    return static_cast<std::size_t>(((k[0] + kmax_) * side_ + (k[1] + kmax_)) * side_ + (k[2] + kmax_));
}

SpectralGrid::CubeC SpectralGrid::synthesize(const CubeC& dense) const {
    const int s = side_, g = g_;
    // axis 3
    CubeC s1(static_cast<std::size_t>(s) * s * g);
    for (int a = 0; a < s; ++a)
        for (int b = 0; b < s; ++b) {
            const std::complex<double>* in = &dense[static_cast<std::size_t>(a * s + b) * s];
            std::complex<double>* out = &s1[static_cast<std::size_t>(a * s + b) * g];
            for (int c = 0; c < s; ++c) {
                if (in[c] == std::complex<double>{}) continue;
                const std::complex<double>* tw = &twiddle_[static_cast<std::size_t>(c) * g];
                for (int z = 0; z < g; ++z) out[z] += in[c] * tw[z];
            }
        }
    // axis 2
    CubeC s2(static_cast<std::size_t>(s) * g * g);
    for (int a = 0; a < s; ++a)
        for (int b = 0; b < s; ++b) {
            const std::complex<double>* in = &s1[static_cast<std::size_t>(a * s + b) * g];
            const std::complex<double>* tw = &twiddle_[static_cast<std::size_t>(b) * g];
            for (int y = 0; y < g; ++y) {
                std::complex<double>* out = &s2[static_cast<std::size_t>(a * g + y) * g];
                const std::complex<double> t = tw[y];
                for (int z = 0; z < g; ++z) out[z] += in[z] * t;
            }
        }
    // axis 1
    CubeC out(static_cast<std::size_t>(g) * g * g);
    for (int a = 0; a < s; ++a) {
        const std::complex<double>* tw = &twiddle_[static_cast<std::size_t>(a) * g];
        const std::complex<double>* in = &s2[static_cast<std::size_t>(a) * g * g];
        for (int x = 0; x < g; ++x) {
            const std::complex<double> t = tw[x];
            std::complex<double>* o = &out[static_cast<std::size_t>(x) * g * g];
            for (int yz = 0; yz < g * g; ++yz) o[yz] += in[yz] * t;
        }
    }
    return out;
}

SpectralGrid::CubeC SpectralGrid::analyze_scalar(const std::vector<double>& values) const {
    const int s = side_, g = g_;
    // axis 1 (real input)
    CubeC t1(static_cast<std::size_t>(s) * g * g);
    for (int a = 0; a < s; ++a) {
        const std::complex<double>* tw = &twiddle_[static_cast<std::size_t>(a) * g];
        std::complex<double>* o = &t1[static_cast<std::size_t>(a) * g * g];
        for (int x = 0; x < g; ++x) {
            const std::complex<double> t = std::conj(tw[x]);
            const double* in = &values[static_cast<std::size_t>(x) * g * g];
            for (int yz = 0; yz < g * g; ++yz) o[yz] += in[yz] * t;
        }
    }
    // axis 2
    CubeC t2(static_cast<std::size_t>(s) * s * g);
    for (int a = 0; a < s; ++a)
        for (int b = 0; b < s; ++b) {
            const std::complex<double>* tw = &twiddle_[static_cast<std::size_t>(b) * g];
            std::complex<double>* o = &t2[static_cast<std::size_t>(a * s + b) * g];
            for (int y = 0; y < g; ++y) {
                const std::complex<double> t = std::conj(tw[y]);
                const std::complex<double>* in = &t1[static_cast<std::size_t>(a * g + y) * g];
                for (int z = 0; z < g; ++z) o[z] += in[z] * t;
            }
        }
    // axis 3
    const double inv = 1.0 / (double(g) * g * g);
    CubeC out(static_cast<std::size_t>(s) * s * s);
    for (int a = 0; a < s; ++a)
        for (int b = 0; b < s; ++b) {
            const std::complex<double>* in = &t2[static_cast<std::size_t>(a * s + b) * g];
            for (int c = 0; c < s; ++c) {
                const std::complex<double>* tw = &twiddle_[static_cast<std::size_t>(c) * g];
                std::complex<double> acc{};
                for (int z = 0; z < g; ++z) acc += in[z] * std::conj(tw[z]);
                out[static_cast<std::size_t>(a * s + b) * s + c] = acc * inv;
            }
        }
    return out;
}

GridField SpectralGrid::to_physical(const SpectralField& u) const {
    if (!u.same_modes(SpectralField(modes_))) throw ModeSetMismatch("field and grid use different mode sets");
    const ModeSet& ms = *modes_;
    const std::size_t cube = static_cast<std::size_t>(side_) * side_ * side_;
    std::array<CubeC, 3> dense{CubeC(cube), CubeC(cube), CubeC(cube)};
    for (std::size_t w = 0; w < ms.wavevector_count(); ++w) {
        const CVec3 a = u.vector_amplitude(w);
        const std::size_t idx = cube_index(ms.wavevector(w));
        for (int c = 0; c < 3; ++c) dense[c][idx] = a[c];
    }
    GridField out(g_);
    for (int c = 0; c < 3; ++c) {
        const CubeC vals = synthesize(dense[c]);
        for (std::size_t p = 0; p < vals.size(); ++p) out.c[c][p] = vals[p].real();
    }
    return out;
}

std::array<GridField, 3> SpectralGrid::gradient(const SpectralField& u) const {
    const ModeSet& ms = *modes_;
    const std::size_t cube = static_cast<std::size_t>(side_) * side_ * side_;
    std::array<GridField, 3> out;
    for (int j = 0; j < 3; ++j) {
        std::array<CubeC, 3> dense{CubeC(cube), CubeC(cube), CubeC(cube)};
        for (std::size_t w = 0; w < ms.wavevector_count(); ++w) {
            const Wavevector& k = ms.wavevector(w);
            if (k[j] == 0) continue;
            const CVec3 a = u.vector_amplitude(w);
            const std::complex<double> mult(0.0, kTwoPi * k[j]);
            const std::size_t idx = cube_index(k);
            for (int c = 0; c < 3; ++c) dense[c][idx] = mult * a[c];
        }
        out[j] = GridField(g_);
        for (int c = 0; c < 3; ++c) {
            const CubeC vals = synthesize(dense[c]);
            for (std::size_t p = 0; p < vals.size(); ++p) out[j].c[c][p] = vals[p].real();
        }
    }
    return out;
}

VectorSpectrum SpectralGrid::analyze(const GridField& g) const {
    if (g.n != g_) throw InvalidArgument("grid field size does not match transform");
    const ModeSet& ms = *modes_;
    VectorSpectrum out(modes_);
    const std::size_t zero = cube_index({0, 0, 0});
    for (int c = 0; c < 3; ++c) {
        const CubeC coeffs = analyze_scalar(g.c[c]);
        for (std::size_t w = 0; w < ms.wavevector_count(); ++w) out.coeff[w][c] = coeffs[cube_index(ms.wavevector(w))];
        out.mean[c] = coeffs[zero];
    }
    return out;
}

SpectralField SpectralGrid::to_spectral(const GridField& g) const {
    VectorSpectrum v = analyze(g);
    v.mean = {};
    SpectralField u = leray_project(v);
    enforce_reality(u);
    return u;
}

double SpectralGrid::energy_beyond_cutoff(const GridField& g) const {
    const VectorSpectrum v = analyze(g);
    double total = 0.0;
    for (const auto& comp : g.c)
        for (double x : comp) total += x * x;
    total /= double(g.points());
    double kept = 0.0;
    for (const CVec3& a : v.coeff)
        for (const auto& z : a) kept += std::norm(z);
    return std::max(0.0, total - kept);
}

double SpectralGrid::imaginary_residue(const SpectralField& u) const {
    const ModeSet& ms = *modes_;
    const std::size_t cube = static_cast<std::size_t>(side_) * side_ * side_;
    double max_im = 0.0, max_abs = 0.0;
    for (int c = 0; c < 3; ++c) {
        CubeC dense(cube);
        for (std::size_t w = 0; w < ms.wavevector_count(); ++w) dense[cube_index(ms.wavevector(w))] = u.vector_amplitude(w)[c];
        const CubeC vals = synthesize(dense);
        for (const auto& z : vals) {
            max_im = std::max(max_im, std::abs(z.imag()));
            max_abs = std::max(max_abs, std::abs(z));
        }
    }
    return max_abs > 0.0 ? max_im / max_abs : 0.0;
}

double lp_integral(const GridField& g, double p) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.points(); ++i) {
        const double r2 = g.c[0][i] * g.c[0][i] + g.c[1][i] * g.c[1][i] + g.c[2][i] * g.c[2][i];
        s += std::pow(r2, 0.5 * p);
    }
    return s / double(g.points());
}

double lp_norm(const GridField& g, double p) {
    if (p < 0.0) throw InvalidArgument("L^p exponent must be positive (0 selects the sup norm)");
    if (p == 0.0) {
        double m = 0.0;
        for (std::size_t i = 0; i < g.points(); ++i)
            m = std::max(m, g.c[0][i] * g.c[0][i] + g.c[1][i] * g.c[1][i] + g.c[2][i] * g.c[2][i]);
        return std::sqrt(m);
    }
    return std::pow(lp_integral(g, p), 1.0 / p);
}

}  // namespace tamed
