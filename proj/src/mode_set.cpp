#include "tamed/mode_set.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "tamed/errors.hpp"

namespace tamed {
namespace {

bool is_canonical_k(const Wavevector& k) {
    for (int c : k) {
        if (c != 0) return c > 0;
    }
    return false;
}

Wavevector negate(const Wavevector& k) { return {-k[0], -k[1], -k[2]}; }

std::uint64_t fnv1a(std::uint64_t h, std::int64_t value) {
    for (int b = 0; b < 8; ++b) {
        h ^= static_cast<std::uint64_t>((value >> (8 * b)) & 0xff);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::array<Vec3, 2> polarization_basis(const Wavevector& k) {
    const double norm = std::sqrt(double(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]));
    const Vec3 khat{k[0] / norm, k[1] / norm, k[2] / norm};
    Vec3 ref{1.0, 0.0, 0.0};
    if (k[1] == 0 && k[2] == 0) ref = {0.0, 1.0, 0.0};

    const double proj = ref[0] * khat[0] + ref[1] * khat[1] + ref[2] * khat[2];
    Vec3 e1{ref[0] - proj * khat[0], ref[1] - proj * khat[1], ref[2] - proj * khat[2]};
    const double n1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
    for (double& c : e1) c /= n1;
    const Vec3 e2{khat[1] * e1[2] - khat[2] * e1[1], khat[2] * e1[0] - khat[0] * e1[2],
                  khat[0] * e1[1] - khat[1] * e1[0]};
    return {e1, e2};
}

ModeSet::ModeSet(int k_max) : k_max_(k_max) {
    if (k_max < 1) throw InvalidArgument("mode set cutoff K_max must be >= 1");

    std::vector<Wavevector> ks;
    const int r2 = k_max * k_max;
    for (int a = -k_max; a <= k_max; ++a)
        for (int b = -k_max; b <= k_max; ++b)
            for (int c = -k_max; c <= k_max; ++c) {
                const int q = a * a + b * b + c * c;
                if (q == 0 || q > r2) continue;
                ks.push_back({a, b, c});
            }
    std::sort(ks.begin(), ks.end(), [](const Wavevector& x, const Wavevector& y) {
        const int qx = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        const int qy = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
        if (qx != qy) return qx < qy;
        return x < y;
    });

    const int side = 2 * k_max + 1;
    lookup_.assign(static_cast<std::size_t>(side) * side * side, -1);
    auto slot = [&](const Wavevector& k) {
        return static_cast<std::size_t>(((k[0] + k_max) * side + (k[1] + k_max)) * side + (k[2] + k_max));
    };

    // Polarization is assigned per wavevector, so ties in (k, p) order reduce
    // to the wavevector order with p = 1 before p = 2.
    wavevectors_ = ks;
    wave_modes_.resize(ks.size());
    for (std::size_t w = 0; w < ks.size(); ++w) {
        const Wavevector& k = ks[w];
        lookup_[slot(k)] = static_cast<std::int32_t>(w);
        const Wavevector rep = is_canonical_k(k) ? k : negate(k);
        const auto basis = polarization_basis(rep);
        const int q = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        for (int p = 1; p <= 2; ++p) {
            wave_modes_[w][p - 1] = modes_.size();
            modes_.push_back({k, p, q, 4.0 * kPi * kPi * q});
            eps_.push_back(basis[p - 1]);
            canonical_.push_back(is_canonical_k(k));
            mode_wave_.push_back(w);
        }
    }

    partner_.resize(modes_.size());
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        const auto w = find_wavevector(negate(modes_[i].k));
        partner_[i] = wave_modes_[*w][modes_[i].polarization - 1];
    }

    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& m : modes_) {
        h = fnv1a(h, m.k[0]);
        h = fnv1a(h, m.k[1]);
        h = fnv1a(h, m.k[2]);
        h = fnv1a(h, m.polarization);
    }
    hash_ = h;
}

std::optional<std::size_t> ModeSet::find_wavevector(const Wavevector& k) const {
    for (int c : k)
        if (c < -k_max_ || c > k_max_) return std::nullopt;
    const int side = 2 * k_max_ + 1;
    const auto idx = static_cast<std::size_t>(((k[0] + k_max_) * side + (k[1] + k_max_)) * side + (k[2] + k_max_));
    if (lookup_[idx] < 0) return std::nullopt;
    return static_cast<std::size_t>(lookup_[idx]);
}

bool ModeSet::is_closed_prefix(std::size_t n) const {
    if (n > modes_.size()) return false;
    for (std::size_t i = 0; i < n; ++i)
        if (partner_[i] >= n) return false;
    return true;
}

std::vector<std::size_t> ModeSet::closed_prefixes() const {
    std::vector<std::size_t> out;
    for (std::size_t n = 0; n <= modes_.size(); ++n)
        if (is_closed_prefix(n)) out.push_back(n);
    return out;
}

std::size_t ModeSet::shell_end(int shells) const {
    if (shells <= 0) return 0;
    int seen = 0;
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        if (i == 0 || modes_[i].k_squared != modes_[i - 1].k_squared) {
            if (seen == shells) return i;
            ++seen;
        }
    }
    if (seen < shells) throw InvalidArgument("mode set has fewer shells than requested");
    return modes_.size();
}

ModeSetPtr build_mode_set(int k_max) { return std::make_shared<const ModeSet>(k_max); }

int dealias_floor(const ModeSet& modes) { return 3 * modes.k_max() + 1; }
int resolution_floor(const ModeSet& modes) { return 2 * modes.k_max() + 1; }

}  // namespace tamed
