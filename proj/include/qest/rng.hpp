#pragma once

#include <cstdint>
#include <random>

namespace qest {

// Randomness is deterministic and documented so that any implementation of
// the same recipe reproduces identical trajectories:
//   * per-trajectory seeds come from the splitmix64 stream of the master
//     seed (trajectory i uses the (i+1)-th output),
//   * each trajectory draws from std::mt19937_64 seeded with that value,
//   * 64-bit engine words map to [0,1) via u = (x >> 11) * 2^-53.

inline constexpr std::uint64_t kSplitmix64Increment = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// i-th output (0-based) of the splitmix64 sequence seeded with `seed`.
constexpr std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t i) {
    return splitmix64_mix(seed + (i + 1) * kSplitmix64Increment);
}

constexpr std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index) {
    return splitmix64_at(master_seed, index);
}

// Stream of i.i.d. uniforms on [0,1), bit-reproducible from its seed on any
// conforming platform.
class UniformStream {
  public:
    explicit UniformStream(std::uint64_t seed) : engine_(seed) {}

    double operator()() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

  private:
    std::mt19937_64 engine_;
};

} // namespace qest
