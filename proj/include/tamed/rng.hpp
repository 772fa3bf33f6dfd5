#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace tamed {

/// Philox4x32-10 counter-based generator (Salmon et al.). Pure function of
/// (counter, key); no hidden state.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Uniform double in (0, 1) from two 32-bit words (53 random bits).
double uniform_open01(std::uint32_t hi, std::uint32_t lo);

/// Identifies one random stream: the experiment seed and an ensemble member.
struct RngKey {
    std::uint64_t seed = 0;
    std::uint32_t path = 0;
};

/// Standard normal draw addressed by (key, step, direction). Every call with
/// the same arguments returns the same value on every platform.
double standard_normal(const RngKey& key, std::uint64_t step, std::uint32_t direction);

/// Brownian increments N(0, dt) for directions 0..count-1 of one time step.
std::vector<double> brownian_increments(const RngKey& key, std::uint64_t step, double dt,
                                        std::size_t count);

/// Sequential convenience stream over the counter space; used for random
/// initial data and validator sampling. Stream `lane` keeps it disjoint from
/// the Brownian counters.
class CounterStream {
public:
    CounterStream(std::uint64_t seed, std::uint32_t lane) : key_{seed, lane} {}

    double normal();
    double uniform();

private:
    RngKey key_;
    std::uint64_t counter_ = 0;
};

}  // namespace tamed
