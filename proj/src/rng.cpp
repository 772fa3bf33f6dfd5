#include "tamed/rng.hpp"

#include <cmath>

#include "tamed/mode_set.hpp"

namespace tamed {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

double box_muller(const std::array<std::uint32_t, 4>& w) {
    const double u1 = uniform_open01(w[0], w[1]);
    const double u2 = uniform_open01(w[2], w[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

std::array<std::uint32_t, 2> split_key(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kWeyl0;
            k[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

double uniform_open01(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double standard_normal(const RngKey& key, std::uint64_t step, std::uint32_t direction) {
    const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(step),
                                           static_cast<std::uint32_t>(step >> 32), direction, key.path};
    return box_muller(philox4x32(ctr, split_key(key.seed)));
}

std::vector<double> brownian_increments(const RngKey& key, std::uint64_t step, double dt, std::size_t count) {
    std::vector<double> out(count);
    const double scale = std::sqrt(dt);
    for (std::size_t d = 0; d < count; ++d)
        out[d] = scale * standard_normal(key, step, static_cast<std::uint32_t>(d));
    return out;
}

double CounterStream::normal() {
    const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(counter_),
                                           static_cast<std::uint32_t>(counter_ >> 32), 0xFFFFFFFFu, key_.path};
    ++counter_;
    auto key = split_key(key_.seed);
    key[1] ^= 0x5bd1e995u;
    return box_muller(philox4x32(ctr, key));
}

double CounterStream::uniform() {
    const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(counter_),
                                           static_cast<std::uint32_t>(counter_ >> 32), 0xFFFFFFFEu, key_.path};
    ++counter_;
    auto key = split_key(key_.seed);
    key[1] ^= 0x5bd1e995u;
    const auto w = philox4x32(ctr, key);
    return uniform_open01(w[0], w[1]);
}

}  // namespace tamed
